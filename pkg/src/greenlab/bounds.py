"""Finite-N Green-energy lower bounds and their asymptotic coefficients.

The certified finite-N bound for N points and any probe radius a is

    E >= N (1 - 2N + V/V(a)) K(M, a) - N Theta(M, a),

valid on every compact harmonic manifold. Maximizing the leading terms
over a for d > 2 gives a closed optimal-radius constant and an
asymptotic coefficient of N^(2-2/d), which this module reproduces both
through the general pipeline and through the per-family closed formulas,
together with the prior coefficients they are compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ball_stats import k_value, theta_value
from .errors import DomainError, UnsupportedManifoldError
from .manifold import (
    Family,
    ManifoldSpec,
    ball_volume,
    bm_constant,
    diameter,
    dimension,
    volume,
)
from .special_math import log_gamma, vol_unit_sphere

__all__ = [
    "BoundCoefficients",
    "BoundReport",
    "finite_bound",
    "optimal_radius_constant",
    "asymptotic_radius",
    "sphere_leading_coefficient",
    "matzke_coefficient",
    "our_coefficient",
    "legacy_2d_constants",
    "best_finite_bound",
    "compare_table",
]

GRID_POINTS = 32
GOLDEN_ITERATIONS = 80
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BoundCoefficients:
    """Optimal-radius constant and the leading asymptotic coefficient (d > 2)."""

    spec: ManifoldSpec
    c_opt: float
    leading: float
    exponent: float

    def __post_init__(self):
        if not self.c_opt > 0:
            raise DomainError(
                f"optimal-radius constant must be positive, got {self.c_opt} for {self.spec}"
            )


@dataclass
class BoundReport:
    """Result of maximizing the finite-N bound over the probe radius."""

    spec: ManifoldSpec
    N: int
    radius_grid: list[tuple[float, float]]
    best_a: float
    best_bound: float
    asymptotic_a: float | None = None
    asymptotic_bound: float | None = None
    leading_coefficient: float | None = None
    matzke_coefficient: float | None = None
    exponent: float | None = None

    def __post_init__(self):
        if self.N >= 2 and self.best_bound > 0.0:
            raise DomainError(
                f"a positive lower bound {self.best_bound} contradicts the mean-zero "
                "energy; bound evaluation is broken"
            )

    def to_dict(self) -> dict:
        return {
            "family": self.spec.token,
            "n": self.spec.n,
            "N": self.N,
            "best_a": self.best_a,
            "best_bound": self.best_bound,
            "asymptotic_a": self.asymptotic_a,
            "asymptotic_bound": self.asymptotic_bound,
            "leading_coefficient": self.leading_coefficient,
            "matzke_coefficient": self.matzke_coefficient,
            "exponent": self.exponent,
            "radius_grid": [[a, b] for a, b in self.radius_grid],
        }


def finite_bound(spec: ManifoldSpec, N: int, a: float) -> float:
    """The certified lower bound at probe radius a."""
    if N < 1:
        raise DomainError(f"need N >= 1, got {N}")
    D = diameter(spec)
    if not 0.0 < a <= D * (1.0 + 1e-12):
        raise DomainError(f"need a in (0, D], got {a}")
    a = min(a, D)
    k = k_value(spec, a)
    theta = theta_value(spec, a)
    ratio = volume(spec) / ball_volume(spec, a)
    return N * (1.0 - 2.0 * N + ratio) * k - N * theta


def optimal_radius_constant(spec: ManifoldSpec) -> BoundCoefficients:
    """Closed optimal-radius constant and N^(2-2/d) coefficient for d > 2."""
    d = dimension(spec)
    if d <= 2:
        raise UnsupportedManifoldError(
            "the closed optimal radius needs d > 2; use best_finite_bound for d = 2"
        )
    margin = bm_constant(spec) - volume(spec) / ((d + 2) * vol_unit_sphere(d))
    if margin <= 0.0:
        raise DomainError(
            f"near-diagonal coefficient margin is {margin} for {spec}; the "
            "optimal-radius constant is only defined for a positive margin"
        )
    c_opt = (0.25 * d * (d - 2) * (d + 2) * margin) ** (2.0 / d)
    leading = d * c_opt / ((d * d - 4) * volume(spec))
    return BoundCoefficients(spec=spec, c_opt=c_opt, leading=leading, exponent=2.0 - 2.0 / d)


def asymptotic_radius(spec: ManifoldSpec, N: int) -> float:
    """The optimal probe radius sqrt(c_opt) N^(-1/d) of the leading-term analysis."""
    coeff = optimal_radius_constant(spec)
    return math.sqrt(coeff.c_opt) * float(N) ** (-1.0 / dimension(spec))


def sphere_leading_coefficient(n: int) -> float:
    """The sphere coefficient of N^(2-2/n) in the direct Gamma-function form."""
    if n < 3:
        raise DomainError(f"the closed sphere coefficient needs n >= 3, got {n}")
    v_n = volume(ManifoldSpec(Family.SPHERE, n))
    v_nm1 = vol_unit_sphere(n)  # volume of S^(n-1)
    return n ** (1.0 + 2.0 / n) / (
        (n * n - 4) * v_n ** (1.0 - 2.0 / n) * v_nm1 ** (2.0 / n)
    )


def matzke_coefficient(spec: ManifoldSpec) -> float:
    """Prior leading coefficient (1/V factor excluded, as in the comparisons)."""
    n = spec.n
    if spec.family is Family.REAL_PROJ:
        if n < 3:
            raise DomainError("prior real projective coefficient needs n >= 3")
        return (
            n
            / (4.0 * (n - 2))
            * (math.sqrt(math.pi) / math.gamma(0.5 * (n + 1))) ** (2.0 / n)
        )
    if spec.family is Family.COMPLEX_PROJ:
        if n < 2:
            raise DomainError("prior complex projective coefficient needs n >= 2")
        return n / (4.0 * (n - 1) * math.exp(log_gamma(n + 1.0) / n))
    if spec.family is Family.QUAT_PROJ:
        return n / (2.0 * (2 * n - 1) * math.exp(log_gamma(2 * n + 2.0) / (2 * n)))
    if spec.family is Family.CAYLEY_PLANE:
        return (2.0 / 7.0) * (6.0 / math.factorial(11)) ** 0.125
    raise UnsupportedManifoldError(f"no prior coefficient is tabulated for {spec}")


def our_coefficient(spec: ManifoldSpec) -> float:
    """Our leading coefficient without the 1/V factor (figure normalization)."""
    coeff = optimal_radius_constant(spec)
    return coeff.leading * volume(spec)


def legacy_2d_constants() -> dict[str, float]:
    """Reference constants for the dimension-2 cases, quoted for report footers."""
    c_bhs = (
        2.0 * math.log(2.0)
        + 0.5 * math.log(2.0 / 3.0)
        + 3.0 * math.log(math.sqrt(math.pi) / math.gamma(1.0 / 3.0))
    )
    return {
        # logarithmic-energy constant upper bound and the matching lower-bound constant
        "C_BHS": c_bhs,
        "lauritsen": math.log(2.0) - 0.75,
        # sphere Green energy: E >= -(N/4pi) log N - N/(8pi) + o(N)
        "s2_nlogn": -1.0 / (4.0 * math.pi),
        "s2_linear": -1.0 / (8.0 * math.pi),
        "s2_linear_upper": (2.0 * c_bhs + 1.0 - 2.0 * math.log(2.0)) / (4.0 * math.pi),
        # real projective plane
        "rp2_nlogn": -1.0 / (4.0 * math.pi),
        "rp2_linear": (0.5 - math.log(2.0)) / (4.0 * math.pi),
        # complex projective line, as displayed in the source inventory
        "cp1_nlogn": -1.0 / math.pi,
        "cp1_linear": -1.0 / (2.0 * math.pi),
    }


def _log_grid(spec: ManifoldSpec, N: int, count: int = GRID_POINTS) -> list[float]:
    D = diameter(spec)
    lo = max(1e-4 * D, 0.05 * D * float(N) ** (-2.0 / dimension(spec)))
    hi = D
    step = (math.log(hi) - math.log(lo)) / (count - 1)
    return [math.exp(math.log(lo) + k * step) for k in range(count)]


def _golden_max(f, lo: float, hi: float, iterations: int = GOLDEN_ITERATIONS):
    x1 = hi - _INV_GOLDEN * (hi - lo)
    x2 = lo + _INV_GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iterations):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_GOLDEN * (hi - lo)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def best_finite_bound(spec: ManifoldSpec, N: int) -> BoundReport:
    """Maximize the finite-N bound over the probe radius.

    Seeds a golden-section search at the asymptotic radius when d > 2 and
    always sweeps a coarse log-spaced grid as a mis-bracketing guard; the
    reported best is the maximum over everything evaluated.
    """
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    D = diameter(spec)
    d = dimension(spec)

    def f(a: float) -> float:
        return finite_bound(spec, N, a)

    grid = [(a, f(a)) for a in _log_grid(spec, N)]
    evaluations = dict(grid)

    report = BoundReport(
        spec=spec,
        N=N,
        radius_grid=grid,
        best_a=float("nan"),
        best_bound=-math.inf,
    )
    if d > 2:
        coeff = optimal_radius_constant(spec)
        a_asym = math.sqrt(coeff.c_opt) * float(N) ** (-1.0 / d)
        lo = max(1e-6, 0.1 * a_asym)
        hi = min(0.9 * D, 10.0 * a_asym)
        report.asymptotic_a = a_asym
        report.asymptotic_bound = f(a_asym)
        evaluations[a_asym] = report.asymptotic_bound
        report.leading_coefficient = coeff.leading
        report.exponent = coeff.exponent
        try:
            report.matzke_coefficient = matzke_coefficient(spec)
        except (DomainError, UnsupportedManifoldError):
            report.matzke_coefficient = None
    else:
        # no closed optimum in dimension 2; bracket around the grid argmax
        best_idx = max(range(len(grid)), key=lambda i: grid[i][1])
        lo = grid[max(best_idx - 1, 0)][0]
        hi = grid[min(best_idx + 1, len(grid) - 1)][0]

    a_star, f_star = _golden_max(f, lo, hi)
    evaluations[a_star] = f_star
    best_a, best_bound = max(evaluations.items(), key=lambda kv: kv[1])
    report.best_a = best_a
    report.best_bound = best_bound
    report.__post_init__()
    return report


_COMPARE_RANGES = {
    Family.REAL_PROJ: (3, None),
    Family.COMPLEX_PROJ: (2, None),
    Family.QUAT_PROJ: (1, None),
    Family.CAYLEY_PLANE: (2, 2),
}


def compare_table(family: Family, n_min: int, n_max: int) -> list[tuple[int, float, float, float]]:
    """(n, ours, prior, ratio) rows, both coefficients without the 1/V factor."""
    if family not in _COMPARE_RANGES:
        raise UnsupportedManifoldError(f"no comparison data for family {family}")
    lo, hi = _COMPARE_RANGES[family]
    if n_min < lo or (hi is not None and n_max > hi):
        raise DomainError(
            f"family {family.value} supports n in [{lo}, {hi or 'inf'}], "
            f"got [{n_min}, {n_max}]"
        )
    rows = []
    for n in range(n_min, n_max + 1):
        spec = ManifoldSpec(family, n)
        ours = our_coefficient(spec)
        prior = matzke_coefficient(spec)
        rows.append((n, ours, prior, ours / prior))
    return rows
