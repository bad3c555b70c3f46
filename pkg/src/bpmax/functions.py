"""Constructors for the concrete set-function families shipped with bpmax.

Every constructor returns a normalized (value 0 on the empty set) monotone
:class:`~bpmax.core.SetFunctionOracle`.  Ground sets are id ranges 0..n-1;
where a family needs a bipartition, V1 is the first k ids and V2 the rest.

The two benchmark pairs:

* ``exp1``:  f(X) = [(k - a*|X ∩ V2|)/k] * sum_{i: v_i in X} w_i + |X ∩ V2|/k
  with w_i = (1/k)(1 - a/k)^i for i = 1..k (the closed form of a telescoping
  difference; it degrades gracefully to w_i = 1/k at a = 0), and
  g(X) = |X| - b*min(1 + |X ∩ V1|, |X|, k)
       + eps*max(|X|, |X| + (b/(1-b))(|X ∩ V2| - k + 1)).
  The eps correction is engineered so the supermodular curvature of g is
  exactly b; the submodular curvature of f is exactly a.

* ``exp2``:  f(X) = |X ∩ V1|^a  (with 0^a = 0 so f stays normalized) and
  g(X) = max(0, (|X ∩ V2| - b)/(1 - b)).  Curvatures: 1 - k^a + (k-1)^a
  and b.

The remaining families are the diagnostic and hardness constructions:
hidden-set pairs that differ on a single planted subset, the set-packing
objective (1-b)|X| + b*max(|X|-k, 0), power functions |X|^(1+a), convex
transforms of modular functions, a monotone function with no
submodular-plus-supermodular decomposition, and a fully-curved supermodular
function whose submodularity ratio stays near 1.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .core import GroundSet, SetFunctionOracle

DEFAULT_EPS = 1e-5

FAMILY_NAMES = (
    "modular",
    "exp1_f",
    "exp1_g",
    "exp2_f",
    "exp2_g",
    "power",
    "convex_of_modular",
    "hardness_card",
    "hardness_beta",
    "setpacking",
    "non_bp",
    "ratio_counterexample",
    "hidden_dip",
)


def _check_unit(value: float, name: str, *, open_top: bool = False) -> float:
    value = float(value)
    top_ok = value < 1 if open_top else value <= 1
    if not (0 <= value and top_ok):
        rng = "[0, 1)" if open_top else "[0, 1]"
        raise ValueError(f"{name} must lie in {rng}, got {value}")
    return value


def _check_halved(n: int, k: int) -> None:
    if n != 2 * k:
        raise ValueError(f"ground set must satisfy n = 2k, got n={n}, k={k}")


def _mask_of_set(n: int, ids: Iterable[int], name: str) -> int:
    mask = 0
    for v in ids:
        if not 0 <= int(v) < n:
            raise ValueError(f"{name} contains id {v} outside 0..{n - 1}")
        mask |= 1 << int(v)
    return mask


def make_modular(weights: Sequence[float]) -> SetFunctionOracle:
    """Modular function X -> sum of per-element weights (all >= 0)."""
    w = [float(x) for x in weights]
    if not w:
        raise ValueError("weights must be non-empty")
    if any(x < 0 for x in w):
        raise ValueError("modular weights must be non-negative")
    ground = GroundSet(len(w))

    def fn(mask: int) -> float:
        total = 0.0
        i = 0
        while mask:
            if mask & 1:
                total += w[i]
            mask >>= 1
            i += 1
        return total

    return SetFunctionOracle(ground, fn, role="modular", name="modular")


def make_zero(n: int) -> SetFunctionOracle:
    """The all-zero modular function (the trivial submodular partner)."""
    return make_modular([0.0] * n)


def make_exp1_f(n: int, k: int, alpha: float) -> SetFunctionOracle:
    _check_halved(n, k)
    alpha = _check_unit(alpha, "alpha")
    ground = GroundSet(n)
    v1_mask = (1 << k) - 1
    w = [(1.0 / k) * (1.0 - alpha / k) ** i for i in range(1, k + 1)]

    def fn(mask: int) -> float:
        in_v2 = (mask >> k).bit_count()
        total_w = 0.0
        head = mask & v1_mask
        i = 0
        while head:
            if head & 1:
                total_w += w[i]
            head >>= 1
            i += 1
        return ((k - alpha * in_v2) / k) * total_w + in_v2 / k

    return SetFunctionOracle(ground, fn, role="submodular", name=f"exp1_f(a={alpha:g})")


def make_exp1_g(n: int, k: int, beta: float, eps: float = DEFAULT_EPS) -> SetFunctionOracle:
    _check_halved(n, k)
    beta = _check_unit(beta, "beta", open_top=True)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ground = GroundSet(n)
    v1_mask = (1 << k) - 1
    slope = beta / (1.0 - beta)

    def fn(mask: int) -> float:
        size = mask.bit_count()
        in_v1 = (mask & v1_mask).bit_count()
        in_v2 = size - in_v1
        base = size - beta * min(1 + in_v1, size, k)
        return base + eps * max(size, size + slope * (in_v2 - k + 1))

    return SetFunctionOracle(ground, fn, role="supermodular", name=f"exp1_g(b={beta:g})")


def make_exp2_f(n: int, k: int, alpha: float) -> SetFunctionOracle:
    _check_halved(n, k)
    alpha = _check_unit(alpha, "alpha")
    ground = GroundSet(n)
    v1_mask = (1 << k) - 1

    def fn(mask: int) -> float:
        c = (mask & v1_mask).bit_count()
        return 0.0 if c == 0 else float(c) ** alpha

    return SetFunctionOracle(ground, fn, role="submodular", name=f"exp2_f(a={alpha:g})")


def make_exp2_g(n: int, k: int, beta: float) -> SetFunctionOracle:
    _check_halved(n, k)
    beta = _check_unit(beta, "beta", open_top=True)
    ground = GroundSet(n)
    denom = 1.0 - beta

    def fn(mask: int) -> float:
        c = (mask >> k).bit_count()
        return max(0.0, (c - beta) / denom)

    return SetFunctionOracle(ground, fn, role="supermodular", name=f"exp2_g(b={beta:g})")


def make_power_supermodular(n: int, alpha: float) -> SetFunctionOracle:
    """g(X) = |X|^(1+alpha); modular at alpha = 0, else strictly supermodular."""
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    ground = GroundSet(n)
    p = 1.0 + alpha
    role = "modular" if alpha == 0 else "supermodular"

    def fn(mask: int) -> float:
        return float(mask.bit_count()) ** p

    return SetFunctionOracle(ground, fn, role=role, name=f"power(1+{alpha:g})")


class PiecewiseLinearShape:
    """Monotone convex piecewise-linear map with value 0 at 0.

    Knots are (x, y) pairs; the first must be (0, 0), x strictly increasing,
    slopes non-negative and non-decreasing.  Beyond the last knot the final
    slope extrapolates.
    """

    def __init__(self, knots: Sequence[tuple[float, float]]):
        pts = [(float(x), float(y)) for x, y in knots]
        if len(pts) < 2:
            raise ValueError("piecewise shape needs at least two knots")
        if pts[0] != (0.0, 0.0):
            raise ValueError(f"piecewise shape must start at (0, 0), got {pts[0]}")
        slopes = []
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 <= x0:
                raise ValueError("knot x-coordinates must be strictly increasing")
            slopes.append((y1 - y0) / (x1 - x0))
        if any(s < 0 for s in slopes):
            raise ValueError("piecewise shape must be non-decreasing")
        if any(b < a - 1e-15 for a, b in zip(slopes, slopes[1:])):
            raise ValueError("piecewise shape must be convex (non-decreasing slopes)")
        self.points = pts
        self.slopes = slopes
        self.is_linear = all(abs(s - slopes[0]) <= 1e-15 for s in slopes)

    def __call__(self, t: float) -> float:
        pts = self.points
        if t >= pts[-1][0]:
            x0, y0 = pts[-1]
            return y0 + self.slopes[-1] * (t - x0)
        for (x0, y0), (x1, y1), s in zip(pts, pts[1:], self.slopes):
            if t <= x1:
                return y0 + s * (t - x0)
        raise AssertionError("unreachable")


def make_convex_of_modular(weights: Sequence[float], shape) -> SetFunctionOracle:
    """Supermodular g(X) = psi(m(X)) for monotone convex psi with psi(0) = 0.

    ``shape`` is either a number p >= 1 (psi(t) = t^p) or a sequence of
    (x, y) knots defining a piecewise-linear convex psi.
    """
    w = [float(x) for x in weights]
    if not w:
        raise ValueError("weights must be non-empty")
    if any(x < 0 for x in w):
        raise ValueError("weights must be non-negative")
    ground = GroundSet(len(w))

    if isinstance(shape, (int, float)):
        p = float(shape)
        if p < 1:
            raise ValueError(f"power shape must satisfy p >= 1, got {p}")
        psi = lambda t: t**p
        linear = p == 1.0
        label = f"t^{p:g}"
    else:
        psi = PiecewiseLinearShape(shape)
        linear = psi.is_linear
        label = "piecewise"

    def fn(mask: int) -> float:
        total = 0.0
        i = 0
        while mask:
            if mask & 1:
                total += w[i]
            mask >>= 1
            i += 1
        return psi(total)

    role = "modular" if linear else "supermodular"
    return SetFunctionOracle(ground, fn, role=role, name=f"convex_of_modular({label})")


def make_hardness_cardinality_pair(
    n: int, hidden: Iterable[int]
) -> tuple[SetFunctionOracle, SetFunctionOracle]:
    """The planted-set pair (g, g') with g'(X) = max(|X| - n/2, 0), g(R) = 0.5.

    Both are monotone supermodular; they differ only on the hidden set R
    with |R| = n/2, which makes them indistinguishable to any solver that
    never happens to query R.
    """
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    k = n // 2
    ground = GroundSet(n)
    r_mask = _mask_of_set(n, hidden, "hidden set")
    if r_mask.bit_count() != k:
        raise ValueError(f"hidden set must have size n/2 = {k}, got {r_mask.bit_count()}")

    def gprime(mask: int) -> float:
        return float(max(mask.bit_count() - k, 0))

    def g(mask: int) -> float:
        return 0.5 if mask == r_mask else float(max(mask.bit_count() - k, 0))

    return (
        SetFunctionOracle(ground, g, role="supermodular", name="hardness_card:g"),
        SetFunctionOracle(ground, gprime, role="supermodular", name="hardness_card:g'"),
    )


def make_hardness_beta_pair(
    n: int, alpha: int, gamma: int, beta: float, hidden: Iterable[int]
) -> tuple[SetFunctionOracle, SetFunctionOracle]:
    """Planted pair with tunable curvature beta.

    g(X)  = |X| - beta * min(gamma + |X ∩ R̄|, |X|, alpha)
    g'(X) = |X| - beta * min(|X|, alpha)

    Requires 1 <= gamma < alpha <= n/2 - 1 and |R| = alpha.  Both functions
    are monotone supermodular with curvature exactly beta; their constrained
    optima differ: max over |X| <= alpha is alpha - beta*gamma for g
    (attained at X = R) versus alpha*(1 - beta) for g'.
    """
    alpha = int(alpha)
    gamma = int(gamma)
    if not 1 <= gamma < alpha:
        raise ValueError(f"need 1 <= gamma < alpha, got gamma={gamma}, alpha={alpha}")
    if alpha > n // 2 - 1:
        raise ValueError(f"need alpha <= n/2 - 1 = {n // 2 - 1}, got alpha={alpha}")
    beta = _check_unit(beta, "beta")
    ground = GroundSet(n)
    r_mask = _mask_of_set(n, hidden, "hidden set")
    if r_mask.bit_count() != alpha:
        raise ValueError(f"hidden set must have size alpha = {alpha}, got {r_mask.bit_count()}")
    rbar_mask = ground.full_mask ^ r_mask

    def g(mask: int) -> float:
        size = mask.bit_count()
        return size - beta * min(gamma + (mask & rbar_mask).bit_count(), size, alpha)

    def gprime(mask: int) -> float:
        size = mask.bit_count()
        return size - beta * min(size, alpha)

    return (
        SetFunctionOracle(ground, g, role="supermodular", name="hardness_beta:g"),
        SetFunctionOracle(ground, gprime, role="supermodular", name="hardness_beta:g'"),
    )


def make_setpacking_h(n: int, k: int, beta: float) -> SetFunctionOracle:
    """h(X) = (1-beta)|X| + beta*max(|X|-k, 0); supermodular with curvature beta."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    beta = _check_unit(beta, "beta")
    ground = GroundSet(n)

    def fn(mask: int) -> float:
        size = mask.bit_count()
        return (1.0 - beta) * size + beta * max(size - k, 0)

    role = "modular" if beta == 0 else "supermodular"
    return SetFunctionOracle(ground, fn, role=role, name=f"setpacking(k={k},b={beta:g})")


def make_non_bp(n: int) -> SetFunctionOracle:
    """h(X) = min(max(|X|, 1), 3) - 1: monotone but with no decomposition
    into a monotone submodular plus a monotone supermodular part.

    The obstruction: for |A| = 1, |B| = 3, v outside, the gains are
    h(v|empty) = 0, h(v|A) = 1, h(v|B) = 0, so h(v|empty) + h(v|B) < h(v|A),
    which every such decomposition would contradict.
    """
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    ground = GroundSet(n)

    def fn(mask: int) -> float:
        return float(min(max(mask.bit_count(), 1), 3) - 1)

    return SetFunctionOracle(ground, fn, role="unknown", name="non_bp")


def make_ratio_counterexample(n: int, a: int, eps: float) -> SetFunctionOracle:
    """Fully curved supermodular g whose submodularity ratio stays near 1.

    g(A) = |A \\ {a}| + eps * |A \\ {a}| * [a in A].  Since g({a}) = 0 while
    g(a | V \\ {a}) = eps*(n-1) > 0, the curvature is exactly 1 for every
    eps > 0, yet all gain ratios are within O(eps) of 1.
    """
    if not 0 <= a < n:
        raise ValueError(f"distinguished element {a} outside 0..{n - 1}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ground = GroundSet(n)
    a_bit = 1 << a

    def fn(mask: int) -> float:
        rest = (mask & ~a_bit).bit_count()
        return rest + eps * rest if mask & a_bit else float(rest)

    return SetFunctionOracle(ground, fn, role="supermodular", name=f"ratio_cx(eps={eps:g})")


def make_hidden_dip(n: int, hidden: Iterable[int]) -> tuple[SetFunctionOracle, SetFunctionOracle]:
    """(h, h') where h' = |X| and h agrees everywhere except h(R) = n/2 - 1.

    h stays monotone but its generalized curvature jumps from 0 to 1 and its
    submodularity ratio drops to 1/2, none of which is detectable without
    querying R itself.
    """
    if n % 2:
        raise ValueError(f"n must be even, got {n}")
    ground = GroundSet(n)
    r_mask = _mask_of_set(n, hidden, "hidden set")
    if r_mask.bit_count() != n // 2:
        raise ValueError(f"hidden set must have size n/2 = {n // 2}, got {r_mask.bit_count()}")
    dip = float(n // 2 - 1)

    def h(mask: int) -> float:
        return dip if mask == r_mask else float(mask.bit_count())

    def hprime(mask: int) -> float:
        return float(mask.bit_count())

    return (
        SetFunctionOracle(ground, h, role="unknown", name="hidden_dip:h"),
        SetFunctionOracle(ground, hprime, role="modular", name="hidden_dip:h'"),
    )


def sample_hidden_set(n: int, size: int, rng: random.Random) -> frozenset[int]:
    """Uniform random hidden set for the planted constructions (caller seeds rng)."""
    if not 0 <= size <= n:
        raise ValueError(f"size must be in 0..{n}, got {size}")
    return frozenset(rng.sample(range(n), size))


# --- JSON vocabulary -------------------------------------------------------

@dataclass(frozen=True)
class FamilyParams:
    """Parsed instance-JSON description of one set function.

    Parameter keys by family (everything else is rejected):

    * modular:               weights
    * exp1_f / exp2_f:       k, alpha
    * exp1_g:                k, beta, eps (optional)
    * exp2_g:                k, beta
    * power:                 alpha
    * convex_of_modular:     weights, power | knots
    * hardness_card:         R, variant ("g" | "gprime")
    * hardness_beta:         alpha, gamma, beta, R, variant
    * setpacking:            k, beta
    * non_bp:                (none)
    * ratio_counterexample:  a, eps
    * hidden_dip:            R, variant ("h" | "hprime")

    Every family also accepts an optional non-negative "scale" multiplier.
    """

    family: str
    params: tuple[tuple[str, object], ...]
    scale: float = 1.0

    @classmethod
    def from_json_dict(cls, spec: dict) -> "FamilyParams":
        if not isinstance(spec, dict):
            raise ValueError(f"function spec must be an object, got {type(spec).__name__}")
        spec = dict(spec)
        family = spec.pop("family", None)
        if family not in FAMILY_NAMES:
            raise ValueError(f"unknown family {family!r}; expected one of {FAMILY_NAMES}")
        scale = float(spec.pop("scale", 1.0))
        if scale < 0:
            raise ValueError(f"scale must be non-negative, got {scale}")
        allowed = _FAMILY_KEYS[family]
        unknown = set(spec) - set(allowed)
        if unknown:
            raise ValueError(f"unknown parameter(s) {sorted(unknown)} for family {family!r}")
        items = tuple(sorted(spec.items(), key=lambda kv: kv[0]))
        return cls(family=family, params=items, scale=scale)

    def build(self, n: int) -> SetFunctionOracle:
        from .core import scale_oracle

        kwargs = dict(self.params)
        oracle = _FAMILY_BUILDERS[self.family](n, kwargs)
        if self.scale != 1.0:
            oracle = scale_oracle(oracle, self.scale)
        return oracle


_FAMILY_KEYS = {
    "modular": ("weights",),
    "exp1_f": ("k", "alpha"),
    "exp1_g": ("k", "beta", "eps"),
    "exp2_f": ("k", "alpha"),
    "exp2_g": ("k", "beta"),
    "power": ("alpha",),
    "convex_of_modular": ("weights", "power", "knots"),
    "hardness_card": ("R", "variant"),
    "hardness_beta": ("alpha", "gamma", "beta", "R", "variant"),
    "setpacking": ("k", "beta"),
    "non_bp": (),
    "ratio_counterexample": ("a", "eps"),
    "hidden_dip": ("R", "variant"),
}


def _req(kwargs: dict, key: str):
    if key not in kwargs:
        raise ValueError(f"missing required parameter {key!r}")
    return kwargs[key]


def _pick_variant(pair, kwargs, names):
    variant = kwargs.get("variant", names[0])
    if variant not in names:
        raise ValueError(f"variant must be one of {names}, got {variant!r}")
    return pair[names.index(variant)]


def _build_modular(n, kw):
    weights = _req(kw, "weights")
    if len(weights) != n:
        raise ValueError(f"weights must have length n={n}, got {len(weights)}")
    return make_modular(weights)


def _build_convex(n, kw):
    weights = _req(kw, "weights")
    if len(weights) != n:
        raise ValueError(f"weights must have length n={n}, got {len(weights)}")
    if ("power" in kw) == ("knots" in kw):
        raise ValueError("convex_of_modular needs exactly one of 'power' or 'knots'")
    shape = kw["power"] if "power" in kw else [tuple(p) for p in kw["knots"]]
    return make_convex_of_modular(weights, shape)


_FAMILY_BUILDERS = {
    "modular": _build_modular,
    "exp1_f": lambda n, kw: make_exp1_f(n, int(_req(kw, "k")), _req(kw, "alpha")),
    "exp1_g": lambda n, kw: make_exp1_g(
        n, int(_req(kw, "k")), _req(kw, "beta"), kw.get("eps", DEFAULT_EPS)
    ),
    "exp2_f": lambda n, kw: make_exp2_f(n, int(_req(kw, "k")), _req(kw, "alpha")),
    "exp2_g": lambda n, kw: make_exp2_g(n, int(_req(kw, "k")), _req(kw, "beta")),
    "power": lambda n, kw: make_power_supermodular(n, _req(kw, "alpha")),
    "convex_of_modular": _build_convex,
    "hardness_card": lambda n, kw: _pick_variant(
        make_hardness_cardinality_pair(n, _req(kw, "R")), kw, ("g", "gprime")
    ),
    "hardness_beta": lambda n, kw: _pick_variant(
        make_hardness_beta_pair(
            n, _req(kw, "alpha"), _req(kw, "gamma"), _req(kw, "beta"), _req(kw, "R")
        ),
        kw,
        ("g", "gprime"),
    ),
    "setpacking": lambda n, kw: make_setpacking_h(n, int(_req(kw, "k")), _req(kw, "beta")),
    "non_bp": lambda n, kw: make_non_bp(n),
    "ratio_counterexample": lambda n, kw: make_ratio_counterexample(
        n, int(_req(kw, "a")), _req(kw, "eps")
    ),
    "hidden_dip": lambda n, kw: _pick_variant(
        make_hidden_dip(n, _req(kw, "R")), kw, ("h", "hprime")
    ),
}


def oracle_from_spec(n: int, spec: dict) -> SetFunctionOracle:
    """Build a set-function oracle from its instance-JSON description."""
    return FamilyParams.from_json_dict(spec).build(n)
