"""Curvature computation, guarantee formulas, and brute-force diagnostics.

Curvatures
----------
For monotone submodular f:    kappa_f = 1 - min_v f(v | V-v) / f(v).
For monotone supermodular g:  kappa^g = 1 - min_v g(v) / g(v | V-v),
which equals the curvature of the dual submodular function
g(V) - g(V \\ X).  Each is computed with at most 2n+1 oracle queries.

Elements whose ratio denominator vanishes (f(v) = 0, resp.
g(v | V-v) = 0) are excluded from the minimization and reported; if every
element is excluded the curvature is defined as 0.  Ratios outside [0, 1]
beyond floating-point noise raise, since they certify the oracle does not
have the promised structure.

Guarantee surfaces
------------------
greedy/semigradient lower bounds as functions of (kappa_f, kappa^g):

* cardinality:          (1/kf) * [1 - exp(-(1-kg)*kf)]
* cardinality, size k:  (1/kf) * [1 - (1 - (1-kg)*kf/k)^k]
* weak cardinality:     ((1-kg)/kf) * [1 - exp(-kf)]
* p matroids:           (1-kg) / ((1-kg)*kf + p)

The kf -> 0 limits (all equal to 1-kg) switch in analytically below
``KAPPA_F_LIMIT`` instead of evaluating 0/0.  Approximability ceilings:
1 - kg for cardinality; (1-kg) * ln(p)/p for p matroids, the latter only
up to an unspecified constant, which the result object says explicitly.

Diagnostics
-----------
Exhaustive, deliberately n-gated tools: structure verifiers (diminishing /
increasing returns, monotone + normalized), the submodularity ratio, the
generalized curvature, the joint curvature c with
1 - c = min_j min_{A,B} h(j|A) / h(j|B), and the four-clause gain
inequality check for sums of a submodular and a supermodular function.
These quantities are oracle-hard in general, which is why only desk-scale
brute force is offered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ABS_TOL,
    REL_TOL,
    BPInstance,
    GroundSet,
    ScaleLimitError,
    SetFunctionOracle,
)

KAPPA_F_LIMIT = 1e-9  # below this, bound formulas use the kf -> 0 limit
CLAMP = 1e-12  # curvature clamp window for floating-point noise

VERIFY_LIMIT = 12
RATIO_LIMIT = 12
GENCURV_LIMIT = 10
JOINT_LIMIT = 10
LEMMA_LIMIT = 8


# --- curvature -------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureValue:
    """One curvature with its accounting: value, queries, exclusions, argmin."""

    value: float
    queries_used: int
    skipped_elements: tuple[int, ...]
    argmin_element: int | None


def _clamp_unit(x: float, what: str) -> float:
    if -CLAMP <= x < 0:
        return 0.0
    if 1 < x <= 1 + CLAMP:
        return 1.0
    if not 0 <= x <= 1:
        raise ValueError(f"{what} = {x} outside [0, 1]: oracle lacks the promised structure")
    return x


def _curvature_scan(oracle: SetFunctionOracle, dual: bool) -> CurvatureValue:
    ground = oracle.ground
    n = ground.n
    before = oracle.query_count
    top = oracle.eval_mask(ground.full_mask)
    best: tuple[float, int] | None = None
    skipped = []
    for v in range(n):
        single = oracle.eval_mask(1 << v)
        gain_at_top = top - oracle.eval_mask(ground.full_mask ^ (1 << v))
        num, den = (single, gain_at_top) if dual else (gain_at_top, single)
        if abs(den) <= ABS_TOL:
            skipped.append(v)
            continue
        ratio = num / den
        if ratio < -REL_TOL:
            kind = "supermodular" if dual else "submodular"
            raise ValueError(
                f"negative curvature ratio {ratio} at element {v}: "
                f"oracle is not monotone {kind}"
            )
        if best is None or ratio < best[0]:
            best = (ratio, v)
    queries = oracle.query_count - before
    if best is None:
        return CurvatureValue(0.0, queries, tuple(skipped), None)
    what = "kappa^g" if dual else "kappa_f"
    return CurvatureValue(_clamp_unit(1.0 - best[0], what), queries, tuple(skipped), best[1])


def submodular_curvature_detail(f: SetFunctionOracle) -> CurvatureValue:
    return _curvature_scan(f, dual=False)


def supermodular_curvature_detail(g: SetFunctionOracle) -> CurvatureValue:
    return _curvature_scan(g, dual=True)


def submodular_curvature(f: SetFunctionOracle) -> float:
    """Total curvature of a normalized monotone submodular f; <= 2n+1 queries."""
    return submodular_curvature_detail(f).value


def supermodular_curvature(g: SetFunctionOracle) -> float:
    """Supermodular curvature of a normalized monotone supermodular g; <= 2n+1 queries."""
    return supermodular_curvature_detail(g).value


def dual_oracle(oracle: SetFunctionOracle) -> SetFunctionOracle:
    """The complement-reflected function X -> F(V) - F(V \\ X).

    Swaps submodularity and supermodularity and preserves curvature:
    the submodular curvature of f equals the supermodular curvature of
    its dual.  F(V) is cached at construction (one query).
    """
    full = oracle.ground.full_mask
    top = oracle.eval_mask(full)
    flip = {"submodular": "supermodular", "supermodular": "submodular"}
    return SetFunctionOracle(
        oracle.ground,
        lambda m, _o=oracle, _t=top, _f=full: _t - _o.eval_mask(_f ^ m),
        role=flip.get(oracle.role, oracle.role),
        name=f"dual({oracle.name or 'f'})",
    )


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature analysis of one submodular-plus-supermodular instance."""

    kappa_f: float
    kappa_g: float
    queries_used: int
    skipped_elements: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "kappa_f": self.kappa_f,
            "kappa_g": self.kappa_g,
            "queries_used": self.queries_used,
            "skipped_elements": sorted(self.skipped_elements),
        }


def curvature_report(instance: BPInstance) -> CurvatureReport:
    """Both curvatures of an instance; at most 2n+1 queries per component."""
    f_detail = submodular_curvature_detail(instance.f)
    g_detail = supermodular_curvature_detail(instance.g)
    return CurvatureReport(
        kappa_f=f_detail.value,
        kappa_g=g_detail.value,
        queries_used=f_detail.queries_used + g_detail.queries_used,
        skipped_elements=tuple(sorted(set(f_detail.skipped_elements)
                                      | set(g_detail.skipped_elements))),
    )


# --- guarantee and hardness formulas ----------------------------------------

def _check_kappas(kappa_f: float, kappa_g: float) -> tuple[float, float]:
    for name, value in (("kappa_f", kappa_f), ("kappa_g", kappa_g)):
        if not 0 <= value <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return float(kappa_f), float(kappa_g)


def bound_cardinality(kappa_f: float, kappa_g: float) -> float:
    """Worst-case approximation factor under a cardinality constraint."""
    kf, kg = _check_kappas(kappa_f, kappa_g)
    if kf <= KAPPA_F_LIMIT:
        return 1.0 - kg
    return (1.0 - math.exp(-(1.0 - kg) * kf)) / kf


def bound_cardinality_finite_k(kappa_f: float, kappa_g: float, k: int) -> float:
    """Sharper cardinality factor at solution size k; decreases to the
    exponential form as k grows."""
    kf, kg = _check_kappas(kappa_f, kappa_g)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if kf <= KAPPA_F_LIMIT:
        return 1.0 - kg
    return (1.0 - (1.0 - (1.0 - kg) * kf / k) ** k) / kf


def bound_weak_cardinality(kappa_f: float, kappa_g: float) -> float:
    """Factor obtained through the modular surrogate f + sum of singleton
    values of g; dominated by :func:`bound_cardinality` everywhere."""
    kf, kg = _check_kappas(kappa_f, kappa_g)
    if kf <= KAPPA_F_LIMIT:
        return 1.0 - kg
    return (1.0 - kg) * (1.0 - math.exp(-kf)) / kf


def bound_matroids(kappa_f: float, kappa_g: float, p: int) -> float:
    """Worst-case factor under an intersection of p matroid constraints."""
    kf, kg = _check_kappas(kappa_f, kappa_g)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return (1.0 - kg) / ((1.0 - kg) * kf + p)


def hardness_cardinality(kappa_g: float) -> float:
    """Polynomial-time approximability ceiling under a cardinality
    constraint (up to an arbitrarily small additive epsilon)."""
    _, kg = _check_kappas(0.0, kappa_g)
    return 1.0 - kg


@dataclass(frozen=True)
class HardnessShape:
    """Asymptotic ceiling whose hidden constant is not pinned down.

    ``value`` is (1 - kappa^g) * ln(p) / p; the true ceiling is this shape
    times an unspecified constant, hence ``constant_unspecified``.
    """

    value: float
    p: int
    constant_unspecified: bool = True

    def to_json_dict(self) -> dict:
        return {"value": self.value, "p": self.p, "constant_unspecified": True}


def hardness_matroids(kappa_g: float, p: int) -> HardnessShape:
    """Approximability ceiling shape under p matroid constraints."""
    _, kg = _check_kappas(0.0, kappa_g)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return HardnessShape(value=(1.0 - kg) * math.log(p) / p, p=p)


# --- exhaustive structure verification ---------------------------------------

@dataclass(frozen=True)
class StructureViolation:
    """Witness for a failed structural property, with both gain values."""

    kind: str  # "submodular" | "supermodular" | "monotone" | "normalized"
    context: frozenset[int]
    element: int
    other: int | None
    lhs: float
    rhs: float

    def describe(self) -> str:
        ctx = sorted(self.context)
        if self.kind == "normalized":
            return f"value at the empty set is {self.lhs}, expected 0"
        if self.kind == "monotone":
            return f"gain of {self.element} at {ctx} is {self.lhs} < 0"
        rel = ">=" if self.kind == "submodular" else "<="
        return (
            f"{self.kind} gain violation: element {self.element} at context {ctx} "
            f"gives {self.lhs}, but with {self.other} added gives {self.rhs} "
            f"(needed {self.lhs} {rel} {self.rhs})"
        )


def _value_table(oracle: SetFunctionOracle, limit: int, what: str) -> list[float]:
    n = oracle.ground.n
    if n > limit:
        raise ScaleLimitError(f"{what} requires n <= {limit}, got n={n}")
    return [oracle.eval_mask(m) for m in range(1 << n)]


def _scale_of(table) -> float:
    return max(1.0, max(abs(v) for v in table))


def verify_submodular(oracle: SetFunctionOracle) -> StructureViolation | None:
    """Exhaustive diminishing-returns check over all (X, v, w); None if it holds."""
    return _verify_returns(oracle, sub=True)


def verify_supermodular(oracle: SetFunctionOracle) -> StructureViolation | None:
    """Exhaustive increasing-returns check over all (X, v, w); None if it holds."""
    return _verify_returns(oracle, sub=False)


def _verify_returns(oracle: SetFunctionOracle, sub: bool) -> StructureViolation | None:
    n = oracle.ground.n
    table = _value_table(oracle, VERIFY_LIMIT, "structure verification")
    tol = REL_TOL * _scale_of(table)
    for x in range(1 << n):
        for v in range(n):
            if x >> v & 1:
                continue
            gain_small = table[x | 1 << v] - table[x]
            for w in range(n):
                if w == v or x >> w & 1:
                    continue
                y = x | 1 << w
                gain_large = table[y | 1 << v] - table[y]
                small, large = (gain_small, gain_large) if sub else (gain_large, gain_small)
                if small < large - tol:
                    return StructureViolation(
                        kind="submodular" if sub else "supermodular",
                        context=oracle.ground.ids_of(x),
                        element=v,
                        other=w,
                        lhs=gain_small,
                        rhs=gain_large,
                    )
    return None


def verify_monotone_normalized(oracle: SetFunctionOracle) -> StructureViolation | None:
    """Check value 0 at the empty set and non-negative gains everywhere."""
    n = oracle.ground.n
    table = _value_table(oracle, VERIFY_LIMIT, "structure verification")
    if abs(table[0]) > ABS_TOL:
        return StructureViolation("normalized", frozenset(), -1, None, table[0], 0.0)
    tol = REL_TOL * _scale_of(table)
    for x in range(1 << n):
        for v in range(n):
            if x >> v & 1:
                continue
            gain = table[x | 1 << v] - table[x]
            if gain < -tol:
                return StructureViolation(
                    "monotone", oracle.ground.ids_of(x), v, None, gain, 0.0
                )
    return None


# --- hard-to-compute diagnostics (brute force, n-gated) ----------------------

@dataclass(frozen=True)
class RatioResult:
    """A ratio extremum with the argument pair that attains it."""

    value: float
    witness: tuple[frozenset[int], ...] | None
    witness_element: int | None = None


def submodularity_ratio_bruteforce(oracle: SetFunctionOracle) -> RatioResult:
    """gamma over the full ground set: exhaustive minimum of
    sum_{x in S} h(x|L) / h(S|L) over disjoint pairs (L, S), S non-empty.

    Pairs whose denominator vanishes are skipped: with a vanishing
    numerator the ratio is vacuous, with a positive numerator it is +inf
    and cannot be the minimum.  Equals 1 exactly for submodular oracles
    (attained by singleton S); defaults to 1 when every pair is skipped.
    """
    n = oracle.ground.n
    table = _value_table(oracle, RATIO_LIMIT, "submodularity ratio")
    full = (1 << n) - 1
    best = None
    best_pair = None
    for low in range(1 << n):
        base = table[low]
        comp = full ^ low
        gains = [0.0] * n
        rem = comp
        while rem:
            v = (rem & -rem).bit_length() - 1
            gains[v] = table[low | 1 << v] - base
            rem &= rem - 1
        s = comp
        while s:
            den = table[low | s] - base
            if abs(den) > ABS_TOL:
                num = 0.0
                rem = s
                while rem:
                    v = (rem & -rem).bit_length() - 1
                    num += gains[v]
                    rem &= rem - 1
                ratio = num / den
                if best is None or ratio < best:
                    best = ratio
                    best_pair = (low, s)
            s = (s - 1) & comp
    if best is None:
        return RatioResult(1.0, None)
    low, s = best_pair
    return RatioResult(best, (oracle.ground.ids_of(low), oracle.ground.ids_of(s)))


def generalized_curvature_bruteforce(oracle: SetFunctionOracle) -> RatioResult:
    """Smallest alpha with h(i|B) >= (1-alpha) h(i|A) over all i and all
    nested contexts A subset of B avoiding i; exhaustive, gated at n <= 10.

    Pairs with h(i|A) = 0 are skipped (the inequality is vacuous there).
    The witness is (A, B) with the element i attaining the extreme ratio.
    """
    n = oracle.ground.n
    table = _value_table(oracle, GENCURV_LIMIT, "generalized curvature")
    full = (1 << n) - 1
    worst = None
    witness = None
    for i in range(n):
        bit = 1 << i
        rest = full ^ bit
        gains = [table[a | bit] - table[a] for a in range(1 << n)]
        b = rest
        while True:
            gain_b = gains[b]
            a = b
            while True:
                gain_a = gains[a]
                if abs(gain_a) > ABS_TOL:
                    ratio = gain_b / gain_a
                    if worst is None or ratio < worst:
                        worst = ratio
                        witness = (i, a, b)
                if a == 0:
                    break
                a = (a - 1) & b
            if b == 0:
                break
            b = (b - 1) & rest
    if worst is None:
        return RatioResult(0.0, None)
    i, a, b = witness
    alpha = _clamp_unit(1.0 - worst, "generalized curvature")
    return RatioResult(alpha, (oracle.ground.ids_of(a), oracle.ground.ids_of(b)), i)


def joint_curvature_c_bruteforce(instance: BPInstance) -> RatioResult:
    """Joint curvature c with 1 - c = min_j min_{A,B not containing j} of
    h(j|A) / h(j|B); exhaustive, gated at n <= 10.

    Since numerator and denominator range independently, the inner minimum
    is (min_A gain) / (max_B gain) per element; elements whose gains all
    vanish are skipped, and c defaults to 0 if that removes every element.
    Satisfies c <= max(kappa_f, kappa^g), with equality c = kappa^g for
    purely supermodular instances.
    """
    n = instance.n
    if n > JOINT_LIMIT:
        raise ScaleLimitError(f"joint curvature requires n <= {JOINT_LIMIT}, got n={n}")
    table = [instance.h.eval_mask(m) for m in range(1 << n)]
    full = (1 << n) - 1
    worst = None
    witness = None
    for j in range(n):
        bit = 1 << j
        rest = full ^ bit
        lo = hi = None
        lo_arg = hi_arg = 0
        a = rest
        while True:
            gain = table[a | bit] - table[a]
            if lo is None or gain < lo:
                lo, lo_arg = gain, a
            if hi is None or gain > hi:
                hi, hi_arg = gain, a
            if a == 0:
                break
            a = (a - 1) & rest
        if hi is None or abs(hi) <= ABS_TOL:
            continue
        ratio = lo / hi
        if worst is None or ratio < worst:
            worst = ratio
            witness = (j, lo_arg, hi_arg)
    if worst is None:
        return RatioResult(0.0, None)
    j, lo_arg, hi_arg = witness
    c = _clamp_unit(1.0 - worst, "joint curvature")
    return RatioResult(c, (instance.ground.ids_of(lo_arg), instance.ground.ids_of(hi_arg)), j)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Brute-force diagnostic quantities with their attaining witnesses."""

    gamma: RatioResult
    generalized_alpha: RatioResult
    joint_c: RatioResult

    def to_json_dict(self) -> dict:
        def wit(r: RatioResult) -> dict:
            out: dict = {}
            if r.witness is not None:
                out["sets"] = [sorted(s) for s in r.witness]
            if r.witness_element is not None:
                out["element"] = r.witness_element
            return out

        return {
            "gamma": self.gamma.value,
            "generalized_alpha": self.generalized_alpha.value,
            "joint_c": self.joint_c.value,
            "gamma_witness": wit(self.gamma),
            "generalized_alpha_witness": wit(self.generalized_alpha),
            "joint_c_witness": wit(self.joint_c),
        }


def diagnostics_report(instance: BPInstance) -> DiagnosticsReport:
    """All three brute-force diagnostics of the combined objective (n <= 10)."""
    return DiagnosticsReport(
        gamma=submodularity_ratio_bruteforce(instance.h),
        generalized_alpha=generalized_curvature_bruteforce(instance.h),
        joint_c=joint_curvature_c_bruteforce(instance),
    )


# --- four-clause gain inequality check ---------------------------------------

@dataclass(frozen=True)
class ClauseViolation:
    """Failed clause of the curvature gain inequalities, with its witness."""

    clause: str  # "i" | "ii" | "iii" | "iv"
    small: frozenset[int]
    large: frozenset[int]
    element: int | None
    lhs: float
    rhs: float


def check_curvature_inequalities(instance: BPInstance) -> ClauseViolation | None:
    """Exhaustively check, for h = f + g with curvatures kf and kg:

    (i)   h(v|Y) >= (1-kf) h(v|X)            for X subset Y, v outside Y
    (ii)  h(v|Y) <= h(v|X) / (1-kg)          likewise (skipped when kg = 1)
    (iii) h(X|Y) >= (1-kf) sum_{v in X-Y} h(v|Y)     for all X, Y
    (iv)  h(X|Y) <= sum_{v in X-Y} h(v|Y) / (1-kg)   (skipped when kg = 1)

    Returns None when all hold; otherwise the first violating clause with
    its witness.  Gated at n <= 8.
    """
    n = instance.n
    if n > LEMMA_LIMIT:
        raise ScaleLimitError(f"inequality check requires n <= {LEMMA_LIMIT}, got n={n}")
    kf = submodular_curvature(instance.f)
    kg = supermodular_curvature(instance.g)
    size = 1 << n
    full = size - 1
    table = np.fromiter((instance.h.eval_mask(m) for m in range(size)), float, size)
    tol = REL_TOL * max(1.0, float(np.max(np.abs(table))))
    check_upper = kg < 1.0 - CLAMP
    one_mf = 1.0 - kf
    one_mg = 1.0 - kg
    ids_of = instance.ground.ids_of

    # clauses (i)/(ii): per element, nested context pairs
    for v in range(n):
        bit = 1 << v
        rest = full ^ bit
        gains = [table[a | bit] - table[a] for a in range(size)]
        b = rest
        while True:
            gain_b = gains[b]
            a = b
            while True:
                gain_a = gains[a]
                if gain_b < one_mf * gain_a - tol:
                    return ClauseViolation("i", ids_of(a), ids_of(b), v,
                                           float(gain_b), float(one_mf * gain_a))
                if check_upper and one_mg * gain_b > gain_a + tol:
                    return ClauseViolation("ii", ids_of(a), ids_of(b), v,
                                           float(gain_b), float(gain_a / one_mg))
                if a == 0:
                    break
                a = (a - 1) & b
            if b == 0:
                break
            b = (b - 1) & rest

    # clauses (iii)/(iv): all ordered pairs (X, Y); the singleton-gain matrix
    # has zero rows wherever v is already in Y, so summing rows over v in X
    # automatically restricts to X - Y.
    masks = np.arange(size)
    gain_rows = np.empty((n, size))
    for v in range(n):
        gain_rows[v] = table[masks | (1 << v)] - table
    for x in range(size):
        vs = [v for v in range(n) if x >> v & 1]
        sums = gain_rows[vs].sum(axis=0) if vs else np.zeros(size)
        lhs = table[masks | x] - table
        bad = lhs < one_mf * sums - tol
        if bad.any():
            y = int(np.argmax(bad))
            return ClauseViolation("iii", ids_of(x), ids_of(y), None,
                                   float(lhs[y]), float(one_mf * sums[y]))
        if check_upper:
            bad = one_mg * lhs > sums + tol
            if bad.any():
                y = int(np.argmax(bad))
                return ClauseViolation("iv", ids_of(x), ids_of(y), None,
                                       float(lhs[y]), float(sums[y] / one_mg))
    return None
