"""Independence systems: cardinality constraints, matroids, and intersections.

Constraints are exposed purely through an independence oracle (a feasibility
test on subsets); solvers never need ranks.  All shipped single constraints
are matroids; intersections of p matroids are downward closed and contain
the empty set but need not satisfy the exchange axiom, so they are never
validated as matroids.

Explicit matroids (given by listing their independent family) are validated
eagerly at construction: empty-set membership, downward closure, and the
exchange axiom, each reported with a concrete witness on failure.  The
exhaustive axiom check is gated at n <= 16.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .core import GroundSet, ScaleLimitError

VERIFY_LIMIT = 16


@dataclass(frozen=True)
class MatroidViolation:
    """First failing matroid axiom, with the sets that witness the failure."""

    axiom: str  # "empty" | "downward" | "exchange"
    sets: tuple[frozenset[int], ...]

    def describe(self) -> str:
        def fmt(s):
            return "{" + ",".join(map(str, sorted(s))) + "}"

        if self.axiom == "empty":
            return "the empty set is not independent"
        if self.axiom == "downward":
            return (
                f"downward closure fails: {fmt(self.sets[0])} is independent "
                f"but its subset {fmt(self.sets[1])} is not"
            )
        return f"exchange fails for X={fmt(self.sets[0])}, Y={fmt(self.sets[1])}"


class ConstraintError(ValueError):
    """Raised when a constraint specification violates its axioms."""

    def __init__(self, message: str, violation: MatroidViolation | None = None):
        super().__init__(message)
        self.violation = violation


class IndependenceConstraint:
    """Feasibility oracle over subsets of a ground set.

    ``p`` counts constituent matroids (1 for every single constraint, the
    sum over constituents for an intersection) and feeds the p-matroid
    guarantee formulas.
    """

    __slots__ = ("ground", "kind", "p", "_test", "detail")

    def __init__(self, ground: GroundSet, kind: str, test, p: int = 1, detail=None):
        self.ground = ground
        self.kind = kind
        self._test = test
        self.p = p
        self.detail = detail

    @property
    def n(self) -> int:
        return self.ground.n

    def independent_mask(self, mask: int) -> bool:
        return self._test(mask)

    def is_independent(self, X: Iterable[int]) -> bool:
        return self._test(self.ground.mask_of(X))

    def __repr__(self):
        return f"<IndependenceConstraint {self.kind} n={self.ground.n} p={self.p}>"


def make_cardinality(n: int, k: int) -> IndependenceConstraint:
    if k < 0:
        raise ValueError(f"cardinality bound must be non-negative, got {k}")
    ground = GroundSet(n)
    return IndependenceConstraint(
        ground, "cardinality", lambda m: m.bit_count() <= k, p=1, detail={"k": k}
    )


def make_uniform_matroid(n: int, k: int) -> IndependenceConstraint:
    c = make_cardinality(n, k)
    return IndependenceConstraint(c.ground, "uniform_matroid", c._test, p=1, detail={"k": k})


def make_partition_matroid(
    blocks: Sequence[Iterable[int]], capacities: Sequence[int]
) -> IndependenceConstraint:
    """Partition matroid: at most capacities[i] elements from blocks[i].

    The blocks must partition the ground set 0..n-1 (n inferred from the
    largest id).
    """
    if len(blocks) != len(capacities):
        raise ValueError(
            f"got {len(blocks)} blocks but {len(capacities)} capacities"
        )
    caps = [int(c) for c in capacities]
    if any(c < 0 for c in caps):
        raise ValueError("capacities must be non-negative")
    ids = [sorted(set(int(v) for v in b)) for b in blocks]
    flat = [v for b in ids for v in b]
    if not flat:
        raise ValueError("blocks must cover a non-empty ground set")
    n = max(flat) + 1
    if len(flat) != len(set(flat)):
        raise ValueError("blocks must be disjoint")
    if sorted(flat) != list(range(n)):
        raise ValueError("blocks must partition the ground set 0..n-1")
    ground = GroundSet(n)
    block_masks = [ground.mask_of(b) for b in ids]
    pairs = tuple(zip(block_masks, caps))

    def test(mask: int) -> bool:
        return all((mask & bm).bit_count() <= cap for bm, cap in pairs)

    return IndependenceConstraint(
        ground, "partition_matroid", test, p=1, detail={"blocks": ids, "capacities": caps}
    )


def make_explicit_matroid(n: int, family: Iterable[Iterable[int]]) -> IndependenceConstraint:
    """Matroid from an explicit independent family; axioms checked eagerly."""
    ground = GroundSet(n)
    masks = frozenset(ground.mask_of(s) for s in family)
    constraint = IndependenceConstraint(
        ground, "explicit_matroid", lambda m: m in masks, p=1, detail={"family_size": len(masks)}
    )
    violation = verify_matroid_axioms(constraint)
    if violation is not None:
        raise ConstraintError(f"not a matroid: {violation.describe()}", violation)
    return constraint


def make_intersection(constraints: Sequence[IndependenceConstraint]) -> IndependenceConstraint:
    if not constraints:
        raise ValueError("intersection needs at least one constraint")
    n = constraints[0].ground.n
    if any(c.ground.n != n for c in constraints):
        raise ValueError("all constituents must share the same ground set")
    parts = tuple(constraints)

    def test(mask: int) -> bool:
        return all(c._test(mask) for c in parts)

    return IndependenceConstraint(
        constraints[0].ground,
        "intersection",
        test,
        p=sum(c.p for c in parts),
        detail={"of": parts},
    )


def verify_matroid_axioms(c: IndependenceConstraint) -> MatroidViolation | None:
    """Exhaustively check the three matroid axioms; None means all hold.

    Returns the first violation in a deterministic scan order (masks
    ascending, which makes the reported witness the lexicographically
    smallest one of its kind).  Gated at n <= 16.  Do not treat a matroid
    intersection as a matroid: it legitimately fails exchange.
    """
    n = c.ground.n
    if n > VERIFY_LIMIT:
        raise ScaleLimitError(f"matroid verification requires n <= {VERIFY_LIMIT}, got n={n}")

    independent = [m for m in c.ground.subsets() if c._test(m)]
    ind_set = set(independent)

    if 0 not in ind_set:
        return MatroidViolation("empty", (frozenset(),))

    for m in independent:
        rem = m
        while rem:
            bit = rem & -rem
            if (m ^ bit) not in ind_set:
                return MatroidViolation(
                    "downward", (c.ground.ids_of(m), c.ground.ids_of(m ^ bit))
                )
            rem ^= bit

    # With downward closure in hand, exchange for |X| = |Y| + 1 implies the
    # general case, so only size-adjacent pairs are scanned.
    by_size: dict[int, list[int]] = {}
    for m in independent:
        by_size.setdefault(m.bit_count(), []).append(m)
    for size, ys in sorted(by_size.items()):
        xs = by_size.get(size + 1, [])
        for y in ys:
            for x in xs:
                cand = x & ~y
                found = False
                while cand:
                    bit = cand & -cand
                    if (y | bit) in ind_set:
                        found = True
                        break
                    cand ^= bit
                if not found:
                    return MatroidViolation(
                        "exchange", (c.ground.ids_of(x), c.ground.ids_of(y))
                    )
    return None


def maximal_independent_sets(c: IndependenceConstraint) -> list[frozenset[int]]:
    """All inclusion-maximal independent sets (exhaustive; n <= 16)."""
    n = c.ground.n
    if n > VERIFY_LIMIT:
        raise ScaleLimitError(f"exhaustive scan requires n <= {VERIFY_LIMIT}, got n={n}")
    independent = [m for m in c.ground.subsets() if c._test(m)]
    ind_set = set(independent)
    out = []
    for m in independent:
        grown = False
        for v in range(n):
            if not m >> v & 1 and (m | 1 << v) in ind_set:
                grown = True
                break
        if not grown:
            out.append(c.ground.ids_of(m))
    return out


# --- JSON vocabulary -------------------------------------------------------

def constraint_from_spec(n: int, spec: dict) -> IndependenceConstraint:
    """Build a constraint from its JSON description.

    Vocabulary: {"type": "cardinality", "k": int},
    {"type": "partition", "blocks": [[ids], ..], "capacities": [ints]},
    {"type": "intersection", "of": [specs]}.
    """
    if not isinstance(spec, dict):
        raise ValueError(f"constraint spec must be an object, got {type(spec).__name__}")
    kind = spec.get("type")
    if kind == "cardinality":
        _reject_extra(spec, {"type", "k"})
        return make_cardinality(n, int(_require(spec, "k")))
    if kind == "partition":
        _reject_extra(spec, {"type", "blocks", "capacities"})
        c = make_partition_matroid(_require(spec, "blocks"), _require(spec, "capacities"))
        if c.ground.n != n:
            raise ValueError(
                f"partition blocks cover {c.ground.n} elements but the instance has n={n}"
            )
        return c
    if kind == "intersection":
        _reject_extra(spec, {"type", "of"})
        parts = _require(spec, "of")
        if not isinstance(parts, list) or not parts:
            raise ValueError("'of' must be a non-empty list of constraint specs")
        return make_intersection([constraint_from_spec(n, s) for s in parts])
    raise ValueError(f"unknown constraint type {kind!r}")


def _require(spec: dict, key: str):
    if key not in spec:
        raise ValueError(f"constraint spec missing required key {key!r}")
    return spec[key]


def _reject_extra(spec: dict, allowed: set):
    extra = set(spec) - allowed
    if extra:
        raise ValueError(f"unknown constraint key(s) {sorted(extra)}")
