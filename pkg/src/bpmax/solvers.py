"""Greedy and semigradient maximization, plus the exhaustive exact solver.

The greedy maximizer adds, at every step, the feasible element of largest
marginal gain (ties to the smallest id, which makes traces reproducible)
until no feasible element remains.  The value of the current set is cached
across each scan, so one round of r candidates costs r evaluations; the
query counters always reflect actual evaluator calls.

The semigradient loop replaces the supermodular part by one of its tight
modular lower bounds at the current set X:

    m1(Y) = g(X) - sum_{j in X-Y} g(j | X-j)  + sum_{j in Y-X} g(j | empty)
    m2(Y) = g(X) - sum_{j in X-Y} g(j | V-j)  + sum_{j in Y-X} g(j | X)

Both satisfy m(Y) <= g(Y) everywhere with equality at X, and both collapse
to Y -> sum_{v in Y} g(v) at X = empty.  Dropping the constant leaves a
non-negative modular function, and the surrogate (f plus that modular part)
is handed back to the greedy maximizer.  The loop keeps the incumbent
whenever the surrogate solution is not strictly better under the true
objective, which forces strictly increasing values and termination on the
finite subset lattice; ``max_iters`` is only a guard against
tolerance-induced oscillation.  The default variant is m2, which dominates
m1 on supersets of the base set.
"""

from __future__ import annotations

import warnings
from collections.abc import Iterable
from dataclasses import dataclass

from .constraints import IndependenceConstraint
from .core import (
    ABS_TOL,
    REL_TOL,
    BPInstance,
    EXHAUSTIVE_LIMIT,
    ScaleLimitError,
    SetFunctionOracle,
    SolveTrace,
    definitely_greater,
    sorted_ids,
)
from .functions import make_modular

SEMIGRADIENT_VARIANTS = ("grad1", "grad2")
EXACT_WARN_LIMIT = 24
DEFAULT_MAX_ITERS = 100


@dataclass(frozen=True)
class ModularLowerBound:
    """Tight modular lower bound of a supermodular function at a base set.

    ``coeffs[j]`` is the removal penalty for j in the base set and the
    addition weight for j outside it, so that

        value(Y) = offset - sum_{j in X-Y} coeffs[j] + sum_{j in Y-X} coeffs[j]

    with offset = g(X).  All coefficients are non-negative for monotone g.
    """

    variant: str
    n: int
    base_mask: int
    offset: float
    coeffs: tuple[float, ...]

    def value_mask(self, mask: int) -> float:
        total = self.offset
        removed = self.base_mask & ~mask
        added = mask & ~self.base_mask
        while removed:
            total -= self.coeffs[(removed & -removed).bit_length() - 1]
            removed &= removed - 1
        while added:
            total += self.coeffs[(added & -added).bit_length() - 1]
            added &= added - 1
        return total

    def value(self, Y: Iterable[int]) -> float:
        mask = 0
        for v in Y:
            if not 0 <= v < self.n:
                raise ValueError(f"element id {v} out of range")
            mask |= 1 << v
        return self.value_mask(mask)

    @property
    def base_set(self) -> frozenset[int]:
        return frozenset(sorted_ids(self.base_mask))


def semigradient(g: SetFunctionOracle, X: Iterable[int], variant: str = "grad2") -> ModularLowerBound:
    """Modular lower bound of monotone supermodular g at base set X."""
    if variant not in SEMIGRADIENT_VARIANTS:
        raise ValueError(f"variant must be one of {SEMIGRADIENT_VARIANTS}, got {variant!r}")
    return _semigradient_mask(g, g.ground.mask_of(X), variant)


def _semigradient_mask(g: SetFunctionOracle, base: int, variant: str) -> ModularLowerBound:
    ground = g.ground
    n = ground.n
    g_base = g.eval_mask(base)
    coeffs = [0.0] * n
    if variant == "grad1":
        g_empty = g.eval_mask(0)
        for v in range(n):
            bit = 1 << v
            if base & bit:
                coeffs[v] = g_base - g.eval_mask(base ^ bit)
            else:
                coeffs[v] = g.eval_mask(bit) - g_empty
    else:
        g_full = g.eval_mask(ground.full_mask)
        for v in range(n):
            bit = 1 << v
            if base & bit:
                coeffs[v] = g_full - g.eval_mask(ground.full_mask ^ bit)
            else:
                coeffs[v] = g.eval_mask(base | bit) - g_base
    tol = REL_TOL * max(1.0, abs(g_base))
    for v, c in enumerate(coeffs):
        if c < -tol:
            raise ValueError(
                f"negative semigradient coefficient {c} at element {v}: g is not monotone"
            )
        if c < 0:
            coeffs[v] = 0.0
    return ModularLowerBound(variant, n, base, g_base, tuple(coeffs))


def greedmax(instance: BPInstance, constraint: IndependenceConstraint) -> SolveTrace:
    """Greedy maximization of f + g subject to an independence constraint."""
    _check_same_ground(instance, constraint)
    before = instance.component_queries()
    mask, value, gains, order = _greedy_masks(instance.h, constraint)
    return SolveTrace(
        algorithm="greedy",
        chosen_set=instance.ground.ids_of(mask),
        value=value,
        step_gains=tuple(gains),
        iterations=1,
        oracle_queries=instance.component_queries() - before,
        chosen_order=tuple(order),
    )


def _greedy_masks(h: SetFunctionOracle, constraint: IndependenceConstraint):
    n = h.ground.n
    mask = 0
    current = h.eval_mask(0)
    remaining = list(range(n))
    gains: list[float] = []
    order: list[int] = []
    while remaining:
        best_v = -1
        best_val = 0.0
        for v in remaining:
            cand = mask | 1 << v
            if not constraint.independent_mask(cand):
                continue
            val = h.eval_mask(cand)
            if best_v < 0 or val > best_val:
                best_v, best_val = v, val
        if best_v < 0:
            break
        gain = best_val - current
        if -max(ABS_TOL, REL_TOL * abs(current)) <= gain < 0:
            gain = 0.0  # monotone objective: tiny negatives are rounding
        gains.append(gain)
        order.append(best_v)
        remaining.remove(best_v)
        mask |= 1 << best_v
        current = best_val
    return mask, current, gains, order


def semigrad(
    instance: BPInstance,
    constraint: IndependenceConstraint,
    init: Iterable[int] = (),
    variant: str = "grad2",
    max_iters: int = DEFAULT_MAX_ITERS,
) -> SolveTrace:
    """Semigradient ascent: repeatedly greedy-solve f plus a modular lower
    bound of g, keeping the incumbent unless the surrogate solution strictly
    improves the true objective.

    ``variant`` is "grad1", "grad2", or "best" (solve both surrogates each
    round and keep the better candidate).  The returned value is never
    below the value of the (feasible) initial set, and the recorded step
    gains are the accepted per-iteration improvements.
    """
    _check_same_ground(instance, constraint)
    if variant not in SEMIGRADIENT_VARIANTS + ("best",):
        raise ValueError(
            f"variant must be one of {SEMIGRADIENT_VARIANTS + ('best',)}, got {variant!r}"
        )
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    current = instance.ground.mask_of(init)
    if not constraint.independent_mask(current):
        raise ValueError(f"initial set {sorted(init)} is not feasible")
    before = instance.component_queries()
    h = instance.h
    current_val = h.eval_mask(current)
    improvements: list[float] = []
    iterations = 0
    variants = SEMIGRADIENT_VARIANTS[::-1] if variant == "best" else (variant,)
    while iterations < max_iters:
        iterations += 1
        best_mask = -1
        best_val = 0.0
        for var in variants:
            lower = _semigradient_mask(instance.g, current, var)
            surrogate = BPInstance(instance.f, make_modular(lower.coeffs))
            cand_mask, _, _, _ = _greedy_masks(surrogate.h, constraint)
            cand_val = h.eval_mask(cand_mask)
            if best_mask < 0 or cand_val > best_val:
                best_mask, best_val = cand_mask, cand_val
        if not definitely_greater(best_val, current_val):
            break
        improvements.append(best_val - current_val)
        current, current_val = best_mask, best_val
    return SolveTrace(
        algorithm="semigrad",
        chosen_set=instance.ground.ids_of(current),
        value=current_val,
        step_gains=tuple(improvements),
        iterations=iterations,
        oracle_queries=instance.component_queries() - before,
    )


@dataclass(frozen=True)
class ExactResult:
    """Exhaustively computed constrained optimum."""

    optimal_set: frozenset[int]
    opt_value: float
    subsets_scanned: int


def exact_bruteforce(instance: BPInstance, constraint: IndependenceConstraint) -> ExactResult:
    """Scan all 2^n subsets for the best feasible one.

    Ties break to the lexicographically smallest set (compared as sorted id
    tuples).  Gated at n <= 30, with a warning beyond n = 24.
    """
    _check_same_ground(instance, constraint)
    n = instance.n
    if n > EXHAUSTIVE_LIMIT:
        raise ScaleLimitError(
            f"exhaustive search requires n <= {EXHAUSTIVE_LIMIT}, got n={n}"
        )
    if n > EXACT_WARN_LIMIT:
        warnings.warn(
            f"exhaustive search over 2^{n} subsets will be slow", RuntimeWarning, stacklevel=2
        )
    h = instance.h
    best_mask = 0
    best_val = h.eval_mask(0)
    best_key = ()
    for mask in range(1, 1 << n):
        if not constraint.independent_mask(mask):
            continue
        val = h.eval_mask(mask)
        if val > best_val:
            best_mask, best_val, best_key = mask, val, sorted_ids(mask)
        elif val == best_val:
            key = sorted_ids(mask)
            if key < best_key:
                best_mask, best_key = mask, key
    return ExactResult(
        optimal_set=instance.ground.ids_of(best_mask),
        opt_value=best_val,
        subsets_scanned=1 << n,
    )


def _check_same_ground(instance: BPInstance, constraint: IndependenceConstraint) -> None:
    if instance.n != constraint.ground.n:
        raise ValueError(
            f"instance ground set (n={instance.n}) does not match "
            f"constraint ground set (n={constraint.ground.n})"
        )
