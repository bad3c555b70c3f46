"""Ground-set primitives, set-function oracles, and query accounting.

Sets over a ground set of n elements (ids 0..n-1) are represented two ways:

* publicly as plain iterables / frozensets of ids, and
* internally as integer bitmasks (bit i <=> element i), which makes
  exhaustive scans over all 2^n subsets cheap for n up to
  ``EXHAUSTIVE_LIMIT``.

A :class:`SetFunctionOracle` wraps a pure ``mask -> float`` evaluator and
counts every evaluation.  The counter uses an atomic tick so concurrent
evaluation of an immutable oracle from several threads cannot lose
increments; a read peeks at the tick without consuming it.

All floating-point comparisons in the library go through :func:`isclose` /
:func:`leq`, which use relative tolerance ``REL_TOL`` with absolute floor
``ABS_TOL``.
"""

from __future__ import annotations

import copy
import itertools
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

REL_TOL = 1e-9
ABS_TOL = 1e-12

# Hard gate for anything that walks all 2^n subsets.
EXHAUSTIVE_LIMIT = 30


class ScaleLimitError(RuntimeError):
    """Raised when an exhaustive operation is requested beyond its n-gate."""


def isclose(a: float, b: float) -> bool:
    return abs(a - b) <= max(ABS_TOL, REL_TOL * max(abs(a), abs(b)))


def leq(a: float, b: float) -> bool:
    """a <= b up to tolerance."""
    return a <= b + max(ABS_TOL, REL_TOL * max(abs(a), abs(b)))


def definitely_greater(a: float, b: float) -> bool:
    """a > b beyond tolerance (used for strict-improvement tests)."""
    return a - b > max(ABS_TOL, REL_TOL * max(abs(a), abs(b)))


@dataclass(frozen=True)
class GroundSet:
    """Indexed universe {0, .., n-1}."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"ground set size must be a positive integer, got {self.n!r}")

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def elements(self) -> range:
        return range(self.n)

    def mask_of(self, ids: Iterable[int]) -> int:
        mask = 0
        for v in ids:
            if not 0 <= v < self.n:
                raise ValueError(f"element id {v} out of range for ground set of size {self.n}")
            mask |= 1 << v
        return mask

    def ids_of(self, mask: int) -> frozenset[int]:
        self.check_mask(mask)
        return frozenset(i for i in range(self.n) if mask >> i & 1)

    def check_mask(self, mask: int) -> None:
        if mask < 0 or mask >> self.n:
            raise ValueError(f"mask {mask:#x} out of range for ground set of size {self.n}")

    def subsets(self) -> Iterator[int]:
        """All 2^n subset masks in increasing mask order; gated at n <= 30."""
        if self.n > EXHAUSTIVE_LIMIT:
            raise ScaleLimitError(
                f"exhaustive enumeration requires n <= {EXHAUSTIVE_LIMIT}, got n={self.n}"
            )
        return iter(range(1 << self.n))


def sorted_ids(mask: int) -> tuple[int, ...]:
    """Element ids of a mask in increasing order (lexicographic set key)."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class SetFunctionOracle:
    """Evaluatable set function with a role tag and exact query accounting.

    ``fn`` must be a pure function of the subset mask.  Evaluation is
    deterministic and side-effect-free except for the query counter.
    """

    __slots__ = ("ground", "role", "name", "_fn", "_tick")

    ROLES = ("submodular", "supermodular", "modular", "unknown")

    def __init__(self, ground: GroundSet, fn, role: str = "unknown", name: str = ""):
        if role not in self.ROLES:
            raise ValueError(f"unknown role {role!r}")
        self.ground = ground
        self.role = role
        self.name = name
        self._fn = fn
        self._tick = itertools.count()

    @property
    def n(self) -> int:
        return self.ground.n

    def eval_mask(self, mask: int) -> float:
        """Evaluate on a subset mask (the hot path)."""
        if mask < 0 or mask >> self.ground.n:
            raise ValueError(
                f"mask {mask:#x} out of range for ground set of size {self.ground.n}"
            )
        next(self._tick)
        return self._fn(mask)

    def evaluate(self, X: Iterable[int]) -> float:
        """Evaluate on a collection of element ids."""
        return self.eval_mask(self.ground.mask_of(X))

    def marginal_gain(self, v: int, X: Iterable[int]) -> float:
        """f(v | X) = f(X + v) - f(X).  Requires v not in X; costs 2 queries."""
        mask = self.ground.mask_of(X)
        return self.gain_mask(v, mask)

    def gain_mask(self, v: int, mask: int) -> float:
        if not 0 <= v < self.ground.n:
            raise ValueError(f"element id {v} out of range for ground set of size {self.ground.n}")
        if mask >> v & 1:
            raise ValueError(f"element {v} already in the base set")
        return self.eval_mask(mask | 1 << v) - self.eval_mask(mask)

    @property
    def query_count(self) -> int:
        # copy() peeks at the atomic tick without advancing it
        return next(copy.copy(self._tick))

    def read_query_count(self) -> int:
        return self.query_count

    def reset_query_count(self) -> None:
        self._tick = itertools.count()

    def __repr__(self):
        label = self.name or "set function"
        return f"<SetFunctionOracle {label!r} role={self.role} n={self.ground.n}>"


def scale_oracle(oracle: SetFunctionOracle, factor: float, name: str = "") -> SetFunctionOracle:
    """Non-negative rescaling c*f.  Preserves role, monotonicity and curvature.

    Each evaluation of the scaled oracle evaluates (and counts on) the base
    oracle once, plus once on its own counter.
    """
    if factor < 0:
        raise ValueError(f"scale factor must be non-negative, got {factor}")
    return SetFunctionOracle(
        oracle.ground,
        lambda m, _o=oracle, _c=factor: _c * _o.eval_mask(m),
        role=oracle.role,
        name=name or f"{factor:g}*{oracle.name or 'f'}",
    )


class BPInstance:
    """A pair (f, g) with f monotone submodular, g monotone supermodular.

    The derived objective ``h`` evaluates ``f + g``; one h-query costs one
    f-query plus one g-query.
    """

    __slots__ = ("f", "g", "h")

    def __init__(self, f: SetFunctionOracle, g: SetFunctionOracle):
        if f.ground.n != g.ground.n:
            raise ValueError("f and g must share the same ground set")
        if f.role not in ("submodular", "modular"):
            raise ValueError(f"f must be submodular or modular, got role {f.role!r}")
        if g.role not in ("supermodular", "modular"):
            raise ValueError(f"g must be supermodular or modular, got role {g.role!r}")
        self.f = f
        self.g = g
        self.h = SetFunctionOracle(
            f.ground,
            lambda m, _f=f, _g=g: _f.eval_mask(m) + _g.eval_mask(m),
            role="modular" if (f.role == "modular" and g.role == "modular") else "unknown",
            name=f"{f.name or 'f'}+{g.name or 'g'}",
        )

    @property
    def ground(self) -> GroundSet:
        return self.f.ground

    @property
    def n(self) -> int:
        return self.f.ground.n

    def component_queries(self) -> int:
        """Total f-queries plus g-queries so far (solver cost accounting)."""
        return self.f.query_count + self.g.query_count

    def reset_query_counts(self) -> None:
        self.f.reset_query_count()
        self.g.reset_query_count()
        self.h.reset_query_count()


@dataclass(frozen=True)
class SolveTrace:
    """Output of a solver run.

    ``step_gains`` holds per-step objective gains: for greedy runs the
    marginal gains a_i of the chain, for the semigradient loop the accepted
    per-iteration improvements.  ``chosen_order`` records the greedy
    addition order so the solution chain can be reconstructed.
    ``oracle_queries`` counts component (f and g) evaluator calls.
    """

    algorithm: str
    chosen_set: frozenset[int]
    value: float
    step_gains: tuple[float, ...]
    iterations: int
    oracle_queries: int
    chosen_order: tuple[int, ...] = field(default=())

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "set": sorted(self.chosen_set),
            "value": self.value,
            "step_gains": list(self.step_gains),
            "iterations": self.iterations,
            "oracle_queries": self.oracle_queries,
        }
