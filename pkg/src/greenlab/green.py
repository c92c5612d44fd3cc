"""Radial Green profiles on the harmonic manifolds.

The Green function of each manifold is radial, G(p, q) = phi(d_R(p, q)),
and phi is recovered from the volume data alone:

    phi(r)   = (phi_hat(r) + C) / V,
    phi_hat(r) = integral over [r, D] of (V - V(s)) / v(s) ds,

where the integrand is the negative of the radial derivative of the
profile and C is fixed by the mean-zero property of G. All quadrature
here runs on smooth integrands: the r^(2-d) blow-up toward r = 0 is
tamed by integrating in the variable w = log(r_cut / r), where the
integrand grows like a smooth exponential.

A built profile tabulates phi_hat twice, once on a Chebyshev grid over
[r_cut, D] (scaled by r^(d-2), or with the log term removed when d = 2,
so the stored function is tame) and once in the log variable for the
singular head below r_cut. Below the head table, evaluation falls back
to direct quadrature.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .chebyshev import ChebyshevInterpolant, lobatto_nodes
from .errors import DomainError, SingularityError
from .manifold import (
    Family,
    ManifoldSpec,
    Point,
    diameter,
    dimension,
    distance,
    radial_density,
    volume,
)
from .special_math import (
    QuadratureSettings,
    integrate,
    reg_incomplete_beta,
    vol_unit_sphere,
)

__all__ = [
    "RadialGreenProfile",
    "phi_hat_prime",
    "phi_hat",
    "green_constant",
    "green_eval",
    "green_pair",
    "build_profile",
    "get_profile",
]

_BUILD_SETTINGS = QuadratureSettings(rel_tol=1e-12, abs_tol=1e-290, max_subdivisions=4000)

_MAIN_NODES = 200
_HEAD_NODES = 160


# 1 - (1 + 8x + 36x^2 + 120x^3)(1-x)^8 expanded exactly; lower orders cancel
_CAYLEY_TAIL_COEFFS = (330.0, -1848.0, 4620.0, -6600.0, 5775.0, -3080.0, 924.0, -120.0)


def _sin_power_mass(m: int):
    """Integral of sin^m over [0, u] as a relative-accurate callable.

    Reduces to the regularized incomplete beta, W_m(u) = c_m * I_{sin^2(u/2)}
    with symmetric parameters (m+1)/2, which keeps full relative accuracy
    for u near 0 where the naive Wallis recursion cancels.
    """
    a = 0.5 * (m + 1)
    c_m = math.exp(m * math.log(2.0) + 2.0 * math.lgamma(a) - math.lgamma(2.0 * a))

    def mass(u: float) -> float:
        return c_m * reg_incomplete_beta(math.sin(0.5 * u) ** 2, a, a)

    return mass


@lru_cache(maxsize=None)
def _decreasing_ratio(spec: ManifoldSpec) -> Callable[[float], float]:
    """The profile slope magnitude psi(s) = (V - V(s)) / v(s), stably evaluated.

    Each family gets a cancellation-free form of the numerator: spheres use
    the reflected segment integral of sin^(n-1), the projective families an
    expansion in x = cos^2(s) whose low orders cancel exactly.
    """
    n = spec.n
    d = dimension(spec)
    vol_ratio = volume(spec) / vol_unit_sphere(d)

    def log_sin_sq(s: float) -> float:
        # log(1 - cos^2 s) without the cancellation at either end
        if s <= 0.25 * math.pi:
            return 2.0 * math.log(math.sin(s))
        return math.log1p(-math.cos(s) ** 2)

    if spec.family is Family.SPHERE:
        mass = _sin_power_mass(n - 1)

        def psi(s: float) -> float:
            return mass(math.pi - s) / math.sin(s) ** (n - 1)

    elif spec.family is Family.REAL_PROJ:
        mass = _sin_power_mass(n - 1)

        def psi(s: float) -> float:
            return 0.5 * (mass(math.pi - s) - mass(s)) / math.sin(s) ** (n - 1)

    elif spec.family is Family.COMPLEX_PROJ:

        def psi(s: float) -> float:
            f = -math.expm1(n * log_sin_sq(s))
            return vol_ratio * f / (math.sin(s) ** (2 * n - 1) * math.cos(s))

    elif spec.family is Family.QUAT_PROJ:
        # exact coefficients of 1 - (1+2nx)(1-x)^(2n); orders 0 and 1 vanish
        coeffs = [
            float((-1) ** (j - 1) * (math.comb(2 * n, j) - 2 * n * math.comb(2 * n, j - 1)))
            for j in range(2, 2 * n + 2)
        ]
        x_series = 1.0 / (4.0 * n)

        def psi(s: float) -> float:
            x = math.cos(s) ** 2
            if x < x_series:
                f = 0.0
                for c in reversed(coeffs):
                    f = f * x + c
                f *= x * x
            else:
                f = 1.0 - (1.0 + 2 * n * x) * math.exp(2 * n * log_sin_sq(s))
            return vol_ratio * f / (math.sin(s) ** (4 * n - 1) * math.cos(s) ** 3)

    else:

        def psi(s: float) -> float:
            x = math.cos(s) ** 2
            if x < 0.05:
                f = 0.0
                for c in reversed(_CAYLEY_TAIL_COEFFS):
                    f = f * x + c
                f *= x**4
            else:
                poly = 1.0 + x * (8.0 + x * (36.0 + 120.0 * x))
                f = -math.expm1(8.0 * log_sin_sq(s) + math.log(poly))
            return vol_ratio * f / (math.sin(s) ** 15 * math.cos(s) ** 7)

    return psi


def phi_hat_prime(spec: ManifoldSpec, s: float) -> float:
    """Radial derivative of phi_hat: -(V - V(s)) / v(s), negative on (0, D)."""
    D = diameter(spec)
    if not 0.0 < s < D:
        raise DomainError(f"phi_hat_prime needs 0 < s < D={D}, got s={s}")
    return -_decreasing_ratio(spec)(s)


def _segment_integral(
    psi: Callable[[float], float],
    lo: float,
    hi: float,
    settings: QuadratureSettings,
) -> float:
    """Integral of psi over [lo, hi] with lo > 0, via the log substitution.

    Substituting s = hi * exp(-w) keeps the integrand a smooth exponential
    even when psi carries the s^(1-d) blow-up, so plain adaptive panels
    converge quickly regardless of how small lo is.
    """
    if lo >= hi:
        return 0.0
    w_hi = math.log(hi / lo)

    def integrand(w: float) -> float:
        s = hi * math.exp(-w)
        return psi(s) * s

    return integrate(integrand, 0.0, w_hi, settings)


def phi_hat(
    spec: ManifoldSpec, r: float, settings: QuadratureSettings | None = None
) -> float:
    """phi_hat(r) = integral of (V - V(s))/v(s) over [r, D], by quadrature."""
    D = diameter(spec)
    if r <= 0.0:
        raise DomainError(f"phi_hat needs r > 0, got r={r}")
    if r > D * (1.0 + 1e-12):
        raise DomainError(f"phi_hat needs r <= D={D}, got r={r}")
    if r >= D:
        return 0.0
    if settings is None:
        settings = _BUILD_SETTINGS
    psi = _decreasing_ratio(spec)
    knee = D / 8.0
    if r >= knee:
        return integrate(psi, r, D, settings)
    upper = integrate(psi, knee, D, settings)
    return upper + _segment_integral(psi, r, knee, settings)


@dataclass(frozen=True, eq=False)
class RadialGreenProfile:
    """Evaluable radial Green function phi(r) = (phi_hat(r) + c_m) / V.

    Immutable once built; safe to share across threads.
    """

    spec: ManifoldSpec
    c_m: float
    r_cut: float
    r_min: float
    _main: ChebyshevInterpolant  # phi_hat * r^(d-2) on [r_cut, D] (d=2: +log term removed)
    _head: ChebyshevInterpolant  # log(phi_hat) against w = log(r_cut / r)
    _log_coeff: float  # V / vol(S^(d-1)); the d=2 log-head slope

    @property
    def diameter(self) -> float:
        return diameter(self.spec)

    def phi_hat_values(self, r) -> np.ndarray:
        """Vectorized phi_hat over radii in (0, D]."""
        d = dimension(self.spec)
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr <= 0.0):
            raise SingularityError("phi_hat diverges at r = 0")
        if np.any(r_arr > self.diameter * (1.0 + 1e-12)):
            raise DomainError("radius beyond the manifold diameter")
        out = np.empty_like(r_arr)
        main = r_arr >= self.r_cut
        if np.any(main):
            x = np.minimum(r_arr[main], self.diameter)
            if d > 2:
                out[main] = self._main(x) * x ** (2 - d)
            else:
                out[main] = self._main(x) - self._log_coeff * np.log(x)
        head = ~main
        if np.any(head):
            xh = r_arr[head]
            w = np.log(self.r_cut / np.maximum(xh, self.r_min))
            vals = np.atleast_1d(np.exp(self._head(w)))
            for idx in np.nonzero(xh < self.r_min)[0]:
                vals[idx] = phi_hat(self.spec, float(xh[idx]))
            out[head] = vals
        return out

    def phi(self, r):
        """Green profile value(s) phi(r); scalar in, scalar out."""
        r_arr = np.asarray(r, dtype=float)
        vals = (self.phi_hat_values(r_arr) + self.c_m) / volume(self.spec)
        return float(vals[0]) if r_arr.ndim == 0 else vals.reshape(r_arr.shape)

    def grid_rows(self):
        """(r, phi_hat, phi) rows over the main tabulation nodes."""
        nodes = self._main.nodes
        ph = self.phi_hat_values(nodes)
        phi = (ph + self.c_m) / volume(self.spec)
        return zip(nodes.tolist(), ph.tolist(), phi.tolist())


def _build_phi_hat_tables(spec, r_cut, r_min, settings):
    D = diameter(spec)
    d = dimension(spec)
    psi = _decreasing_ratio(spec)

    main_nodes = lobatto_nodes(_MAIN_NODES, r_cut, D)
    acc = 0.0
    vals = np.empty(_MAIN_NODES)
    vals[-1] = 0.0
    for k in range(_MAIN_NODES - 2, -1, -1):
        acc += _segment_integral(psi, main_nodes[k], main_nodes[k + 1], settings)
        vals[k] = acc
    if d > 2:
        scaled = vals * main_nodes ** (d - 2)
    else:
        scaled = vals + (volume(spec) / vol_unit_sphere(d)) * np.log(main_nodes)
    main = ChebyshevInterpolant(main_nodes, scaled)

    w_max = math.log(r_cut / r_min)
    w_nodes = lobatto_nodes(_HEAD_NODES, 0.0, w_max)
    head_vals = np.empty(_HEAD_NODES)
    acc = vals[0]
    head_vals[0] = acc
    for j in range(1, _HEAD_NODES):
        hi = r_cut * math.exp(-w_nodes[j - 1])
        lo = r_cut * math.exp(-w_nodes[j])
        acc += _segment_integral(psi, lo, hi, settings)
        head_vals[j] = acc
    head = ChebyshevInterpolant(w_nodes, np.log(head_vals))
    return main, head


def build_profile(
    spec: ManifoldSpec,
    r_cut: float | None = None,
    settings: QuadratureSettings | None = None,
) -> RadialGreenProfile:
    """Construct the radial Green profile for a manifold."""
    D = diameter(spec)
    d = dimension(spec)
    if settings is None:
        settings = _BUILD_SETTINGS
    if r_cut is None:
        r_cut = D / 100.0
    if not 0.0 < r_cut < D:
        raise DomainError(f"r_cut must lie in (0, D), got {r_cut}")

    # keep phi_hat representable: r^(2-d) must stay below ~1e280
    if d > 2:
        r_floor = D * 10.0 ** (-270.0 / (d - 2))
        r_min = max(1e-9 * D, r_floor)
    else:
        r_min = 1e-9 * D
    r_min = min(r_min, 0.5 * r_cut)

    main, head = _build_phi_hat_tables(spec, r_cut, r_min, settings)
    log_coeff = volume(spec) / vol_unit_sphere(d)

    profile = RadialGreenProfile(
        spec=spec,
        c_m=0.0,
        r_cut=r_cut,
        r_min=r_min,
        _main=main,
        _head=head,
        _log_coeff=log_coeff,
    )

    # mean-zero constant: C = -(vol(S^{d-1})/V) * int_0^D phi_hat * density
    def weighted(r: float) -> float:
        return float(profile.phi_hat_values(r)[0]) * radial_density(spec, r)

    moment_settings = QuadratureSettings(rel_tol=1e-12, abs_tol=1e-290, max_subdivisions=4000)
    moment = integrate(weighted, r_cut, D, moment_settings) + integrate(
        weighted, 0.0, r_cut, moment_settings
    )
    c_m = -vol_unit_sphere(d) / volume(spec) * moment
    return RadialGreenProfile(
        spec=spec,
        c_m=c_m,
        r_cut=r_cut,
        r_min=r_min,
        _main=main,
        _head=head,
        _log_coeff=log_coeff,
    )


_PROFILE_CACHE: dict[ManifoldSpec, RadialGreenProfile] = {}
_CACHE_LOCK = threading.Lock()


def get_profile(spec: ManifoldSpec) -> RadialGreenProfile:
    """Default-parameter profile, built once per spec and shared."""
    with _CACHE_LOCK:
        prof = _PROFILE_CACHE.get(spec)
    if prof is None:
        prof = build_profile(spec)
        with _CACHE_LOCK:
            _PROFILE_CACHE.setdefault(spec, prof)
            prof = _PROFILE_CACHE[spec]
    return prof


def green_constant(spec: ManifoldSpec) -> float:
    """The mean-zero normalizing constant of the profile."""
    return get_profile(spec).c_m


def green_eval(profile: RadialGreenProfile, r: float) -> float:
    """phi(r) for 0 < r <= D."""
    if r <= 0.0:
        raise SingularityError("the Green function diverges at coincident points")
    return profile.phi(r)


def green_pair(profile: RadialGreenProfile, p: Point, q: Point) -> float:
    """G(p, q) through the profile; symmetric in its arguments."""
    if p.spec != profile.spec or q.spec != profile.spec:
        raise DomainError("points do not live on the profile's manifold")
    r = distance(p, q)
    if r <= 0.0:
        raise SingularityError("coincident points have infinite Green interaction")
    return profile.phi(r)
