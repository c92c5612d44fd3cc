"""Ball-average kernels of the Green function.

Two radial kernels drive the finite-N energy bound:

    K(M, a)     = (1/(V V(a))) int_0^a v(r) int_0^r V(u)/v(u) du dr
    Theta(M, a) = (1/V(a)) int over the ball B(p0, a) of G(p0, .)

Both are computed by nested adaptive quadrature for every family, and by
the exact closed formulas (complex/quaternionic projective spaces and the
Cayley plane) where those exist; the two routes cross-validate each other.
Near a = D the inner integrand V(u)/v(u) blows up like a power of sec, so
integrals are split at D - 1e-3 and the tail taken in the variable
w = -log(D - u), where the growth is a smooth exponential.

The closed formulas suffer heavy floating-point cancellation for small
sin(a); they are evaluated in adaptive-precision arithmetic (mpmath) and
rounded once at the end.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from enum import Enum

import mpmath as mp

from .errors import DomainError, SingularityError, UnsupportedManifoldError
from .green import RadialGreenProfile
from .manifold import (
    Family,
    ManifoldSpec,
    ball_volume,
    bm_constant,
    diameter,
    dimension,
    sphere_area,
    volume,
)
from .special_math import (
    QuadratureSettings,
    harmonic_number,
    integrate,
    reg_incomplete_beta,
    vol_unit_sphere,
)

__all__ = [
    "Method",
    "BallKernelValue",
    "k_quadrature",
    "k_closed",
    "theta_quadrature",
    "theta_closed",
    "k_value",
    "theta_value",
    "k_asymptotic",
    "theta_asymptotic",
    "ball_average_green",
    "spherical_mean",
    "cum_volume_over_area",
    "kernel_row",
]

_TAIL_DELTA = 1e-3  # split distance from D beyond which integrals switch variables
_W_CAP = 34.0  # -log(D - u) cap; going closer contributes below double precision

_INNER_SETTINGS = QuadratureSettings(rel_tol=1e-11, abs_tol=1e-15, max_subdivisions=3000)
_OUTER_SETTINGS = QuadratureSettings(rel_tol=1e-10, abs_tol=1e-15, max_subdivisions=3000)


class Method(Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class BallKernelValue:
    spec: ManifoldSpec
    a: float
    k_value: float
    theta_value: float
    method: Method

    def __post_init__(self):
        if not 0.0 < self.a <= diameter(self.spec):
            raise DomainError(f"radius {self.a} outside (0, D] for {self.spec}")


# ---------------------------------------------------------------------------
# The cumulative inner integral H(r) = int_0^r V(u)/v(u) du
# ---------------------------------------------------------------------------


class _CumulativeCache:
    """Per-manifold monotone cache of H(r) on [0, D - delta].

    Every fresh radius only integrates from the nearest smaller cached
    radius, so repeated kernel evaluations sweep [0, a] once instead of
    re-integrating from zero for every quadrature node.
    """

    def __init__(self, spec: ManifoldSpec):
        self.spec = spec
        self.rs = [0.0]
        self.hs = [0.0]
        self.lock = threading.Lock()

    _MAX_ENTRIES = 4096

    def value(self, r: float, settings: QuadratureSettings) -> float:
        g = _volume_over_area(self.spec)
        with self.lock:
            idx = bisect.bisect_right(self.rs, r) - 1
            base_r = self.rs[idx]
            base_h = self.hs[idx]
            if base_r == r:
                return base_h
            h = base_h + integrate(g, base_r, r, settings)
            if len(self.rs) < self._MAX_ENTRIES:
                self.rs.insert(idx + 1, r)
                self.hs.insert(idx + 1, h)
            return h


_H_CACHES: dict[ManifoldSpec, _CumulativeCache] = {}
_H_LOCK = threading.Lock()


def _volume_over_area(spec: ManifoldSpec):
    def g(u: float) -> float:
        return ball_volume(spec, u) / sphere_area(spec, u)

    return g


def _density_vanishes_at_diameter(spec: ManifoldSpec) -> bool:
    # real projective spaces keep v(D) = vol(S^{d-1}); everywhere else the
    # density carries a sin/cos factor that dies at D
    return spec.family is not Family.REAL_PROJ


def _tail_forms(spec: ManifoldSpec):
    """Stable (v(D-eps), V(D-eps)/v(D-eps)) as functions of eps = D - u.

    Near the diameter, cos(u) evaluated directly loses every digit; the
    shifted forms below run on sin(eps)/cos(eps) instead and stay exact.
    """
    n = spec.n
    d = dimension(spec)
    area = vol_unit_sphere(d)
    vol_ratio = volume(spec) / area

    if spec.family is Family.SPHERE:
        a_half = 0.5 * n
        c_n = math.exp(
            (n - 1) * math.log(2.0) + 2.0 * math.lgamma(a_half) - math.lgamma(n)
        )

        def v_tail(eps: float) -> float:
            return area * math.sin(eps) ** (n - 1)

        def g_tail(eps: float) -> float:
            mass = c_n * reg_incomplete_beta(math.cos(0.5 * eps) ** 2, a_half, a_half)
            return mass / math.sin(eps) ** (n - 1)

    elif spec.family is Family.COMPLEX_PROJ:

        def v_tail(eps: float) -> float:
            return area * math.cos(eps) ** (2 * n - 1) * math.sin(eps)

        def g_tail(eps: float) -> float:
            return vol_ratio * math.cos(eps) / math.sin(eps)

    elif spec.family is Family.QUAT_PROJ:

        def v_tail(eps: float) -> float:
            return area * math.cos(eps) ** (4 * n - 1) * math.sin(eps) ** 3

        def g_tail(eps: float) -> float:
            s2 = math.sin(eps) ** 2
            return vol_ratio * (1.0 + 2 * n * s2) * math.cos(eps) / math.sin(eps) ** 3

    elif spec.family is Family.CAYLEY_PLANE:

        def v_tail(eps: float) -> float:
            return area * math.cos(eps) ** 15 * math.sin(eps) ** 7

        def g_tail(eps: float) -> float:
            x = math.sin(eps) ** 2
            poly = 1.0 + x * (8.0 + x * (36.0 + 120.0 * x))
            return vol_ratio * poly * math.cos(eps) / math.sin(eps) ** 7

    else:
        raise UnsupportedManifoldError(f"no tail forms for {spec}")

    return v_tail, g_tail


def _h_cache(spec: ManifoldSpec) -> _CumulativeCache:
    with _H_LOCK:
        cache = _H_CACHES.get(spec)
        if cache is None:
            cache = _CumulativeCache(spec)
            _H_CACHES[spec] = cache
        return cache


def cum_volume_over_area(
    spec: ManifoldSpec, r: float, settings: QuadratureSettings | None = None
) -> float:
    """H(r) = int_0^r V(u)/v(u) du for 0 <= r < D.

    Diverges at r = D on every family whose density vanishes there, hence
    the strict upper bound.
    """
    D = diameter(spec)
    if settings is None:
        settings = _INNER_SETTINGS
    if r < 0.0 or r >= D:
        raise DomainError(f"cumulative volume ratio needs 0 <= r < D, got {r}")
    if r == 0.0:
        return 0.0
    split = D - _TAIL_DELTA
    cache = _h_cache(spec)
    if r <= split or not _density_vanishes_at_diameter(spec):
        return cache.value(r, settings)
    base = cache.value(split, settings)
    _, g_tail = _tail_forms(spec)

    def tail(w: float) -> float:
        eps = math.exp(-w)
        return g_tail(eps) * eps

    w_hi = min(-math.log(D - r), _W_CAP)
    return base + integrate(tail, -math.log(_TAIL_DELTA), w_hi, settings)


def k_quadrature(
    spec: ManifoldSpec, a: float, settings: QuadratureSettings | None = None
) -> float:
    """K(M, a) by nested adaptive quadrature of its defining double integral."""
    D = diameter(spec)
    if not 0.0 < a <= D * (1.0 + 1e-12):
        raise DomainError(f"K needs a in (0, D], got {a}")
    a = min(a, D)
    outer = settings or _OUTER_SETTINGS
    inner = settings or _INNER_SETTINGS

    def outer_integrand(r: float) -> float:
        return sphere_area(spec, r) * cum_volume_over_area(spec, r, inner)

    split = D - _TAIL_DELTA
    if a <= split or not _density_vanishes_at_diameter(spec):
        total = integrate(outer_integrand, 0.0, a, outer)
    else:
        total = integrate(outer_integrand, 0.0, split, outer)
        v_tail, g_tail = _tail_forms(spec)
        h_base = cum_volume_over_area(spec, split, inner)
        w_lo = -math.log(_TAIL_DELTA)

        def h_near_diameter(w: float) -> float:
            def inner_tail(ww: float) -> float:
                eps = math.exp(-ww)
                return g_tail(eps) * eps

            return h_base + integrate(inner_tail, w_lo, w, inner)

        def tail(w: float) -> float:
            eps = math.exp(-w)
            return v_tail(eps) * h_near_diameter(w) * eps

        w_hi = _W_CAP if a == D else min(-math.log(D - a), _W_CAP)
        total += integrate(tail, w_lo, w_hi, outer)
    return total / (volume(spec) * ball_volume(spec, a))


def theta_quadrature(
    profile: RadialGreenProfile, a: float, settings: QuadratureSettings | None = None
) -> float:
    """Theta(M, a): mean of the Green function over a ball about its pole."""
    spec = profile.spec
    D = diameter(spec)
    if not 0.0 < a <= D * (1.0 + 1e-12):
        raise DomainError(f"Theta needs a in (0, D], got {a}")
    a = min(a, D)
    if settings is None:
        settings = QuadratureSettings(
            rel_tol=1e-10,
            abs_tol=1e-12 * max(abs(profile.c_m), 1e-6),
            max_subdivisions=3000,
        )

    def integrand(r: float) -> float:
        return sphere_area(spec, r) * profile.phi(r)

    return integrate(integrand, 0.0, a, settings) / ball_volume(spec, a)


# ---------------------------------------------------------------------------
# Closed forms (complex/quaternionic projective spaces, Cayley plane)
# ---------------------------------------------------------------------------


def _closed_dps(n: int, a: float, D: float) -> int:
    # the formulas cancel through ~2n*log10(1/S) digits for small S = sin a
    s = math.sin(min(a, D))
    if s <= 0.0:
        raise DomainError("closed forms need a > 0")
    extra = int(2 * max(n, 8) * math.log10(1.0 / s)) + 10 if s < 1.0 else 10
    return min(40 + max(extra, 0), 600)


def k_closed(spec: ManifoldSpec, a: float) -> float:
    """The exact K(M, a) formulas in S = sin a, at adaptive precision."""
    D = diameter(spec)
    if spec.family in (Family.SPHERE, Family.REAL_PROJ):
        raise UnsupportedManifoldError(
            "no closed ball kernel exists for spheres or real projective spaces"
        )
    if not 0.0 < a <= D * (1.0 + 1e-12):
        raise DomainError(f"K needs a in (0, D], got {a}")
    n = spec.n
    V = volume(spec)
    if a >= D:
        # S -> 1 limit: the (1 - S^{2n}) log(1 - S^2) terms vanish
        if spec.family is Family.COMPLEX_PROJ:
            return harmonic_number(n) / (4.0 * n * V)
        if spec.family is Family.QUAT_PROJ:
            return harmonic_number(2 * n + 1) / (4.0 * (2 * n + 1) * V)
        return 83711.0 / 1219680.0 / V

    with mp.workdps(_closed_dps(2 * n if spec.family is Family.QUAT_PROJ else n, a, D)):
        S2 = mp.sin(mp.mpf(a)) ** 2
        log1mS2 = mp.log(1 - S2)
        if spec.family is Family.COMPLEX_PROJ:
            acc = mp.fsum(S2**k / k for k in range(1, n + 1))
            val = ((1 - S2**n) * log1mS2 + acc) / (4 * n * V * S2**n)
        elif spec.family is Family.QUAT_PROJ:
            m = 2 * n
            acc = mp.fsum(S2**k / k for k in range(1, m + 2))
            w = m * (1 - S2) + 1
            val = ((acc + log1mS2) / S2 ** (2 * n) - w * log1mS2) / (
                4 * (m + 1) * w * V
            )
        else:
            S = mp.sqrt(S2)
            poly = (
                815640 * S**20
                - 1826748 * S**18
                + 1019480 * S**16
                + 3465 * S**14
                + 3960 * S**12
                + 4620 * S**10
                + 5544 * S**8
                + 6930 * S**6
                + 9240 * S**4
                + 13860 * S**2
                + 27720
            )
            logpoly = 120 * S**22 - 396 * S**20 + 440 * S**18 - 165 * S**16 + 1
            denom = 1219680 * V * S**16 * (-120 * S**6 + 396 * S**4 - 440 * S**2 + 165)
            val = (S**2 * poly + 27720 * logpoly * mp.log(1 - S**2)) / denom
        return float(val)


def theta_closed(spec: ManifoldSpec, a: float) -> float:
    """The exact Theta(M, a) formulas in S = sin a, at adaptive precision."""
    D = diameter(spec)
    if spec.family in (Family.SPHERE, Family.REAL_PROJ):
        raise UnsupportedManifoldError(
            "no closed ball kernel exists for spheres or real projective spaces"
        )
    if not 0.0 < a <= D * (1.0 + 1e-12):
        raise DomainError(f"Theta needs a in (0, D], got {a}")
    n = spec.n
    V = volume(spec)
    with mp.workdps(_closed_dps(2 * n if spec.family is Family.QUAT_PROJ else n, a, D)):
        S2 = mp.sin(mp.mpf(min(a, D))) ** 2
        logS = mp.log(S2) / 2
        if spec.family is Family.COMPLEX_PROJ:
            acc = mp.fsum(
                mp.mpf(1) / (k * (n - k) * S2**k) for k in range(1, n)
            )
            val = (-harmonic_number(n - 1) - logS + n * acc / 2) / (2 * n * V)
        elif spec.family is Family.QUAT_PROJ:
            m = 2 * n
            w = m * (1 - S2) + 1
            acc = mp.fsum(
                mp.mpf(1) / (k * (k + 1) * (m - k) * S2**k) for k in range(1, m)
            )
            val = (
                n * acc / (2 * w)
                - mp.mpf(harmonic_number(m - 1)) / (2 * (m + 1))
                - logS / (2 * (m + 1))
                - (1 + 2 * (n - 1) * S2) / (4 * (m + 1) * w)
            ) / V
        else:
            S = mp.sqrt(S2)
            poly = (
                101420 * S**20
                - 353334 * S**18
                + 427500 * S**16
                - 190150 * S**14
                + 9900 * S**12
                + 2310 * S**10
                + 924 * S**8
                + 495 * S**6
                + 330 * S**4
                + 275 * S**2
                + 330
            )
            denom = 9240 * S**14 * (-120 * S**6 + 396 * S**4 - 440 * S**2 + 165)
            val = (poly / denom - logS / 22) / V
        return float(val)


# ---------------------------------------------------------------------------
# Route selection, memoization, asymptotics
# ---------------------------------------------------------------------------

_HAS_CLOSED = (Family.COMPLEX_PROJ, Family.QUAT_PROJ, Family.CAYLEY_PLANE)

_K_MEMO: dict[tuple[ManifoldSpec, float], float] = {}
_THETA_MEMO: dict[tuple[ManifoldSpec, float], float] = {}
_MEMO_LOCK = threading.Lock()


def k_value(spec: ManifoldSpec, a: float) -> float:
    """K(M, a) through the preferred route: closed form else quadrature."""
    key = (spec, float(a))
    with _MEMO_LOCK:
        if key in _K_MEMO:
            return _K_MEMO[key]
    val = k_closed(spec, a) if spec.family in _HAS_CLOSED else k_quadrature(spec, a)
    with _MEMO_LOCK:
        _K_MEMO.setdefault(key, val)
    return val


def theta_value(spec: ManifoldSpec, a: float) -> float:
    """Theta(M, a) through the preferred route: closed form else quadrature."""
    key = (spec, float(a))
    with _MEMO_LOCK:
        if key in _THETA_MEMO:
            return _THETA_MEMO[key]
    if spec.family in _HAS_CLOSED:
        val = theta_closed(spec, a)
    else:
        from .green import get_profile

        val = theta_quadrature(get_profile(spec), a)
    with _MEMO_LOCK:
        _THETA_MEMO.setdefault(key, val)
    return val


def k_asymptotic(spec: ManifoldSpec, a: float) -> float:
    """Small-radius law K = a^2 / (2 (d+2) V)."""
    return a * a / (2.0 * (dimension(spec) + 2) * volume(spec))


def theta_asymptotic(spec: ManifoldSpec, a: float) -> float:
    """Small-radius law Theta = d B_M a^(2-d) / (2 V); requires d > 2."""
    d = dimension(spec)
    return d * bm_constant(spec) * a ** (2 - d) / (2.0 * volume(spec))


def kernel_row(spec: ManifoldSpec, a: float) -> BallKernelValue:
    """Both kernels at (spec, a) via the preferred route."""
    method = Method.CLOSED_FORM if spec.family in _HAS_CLOSED else Method.QUADRATURE
    return BallKernelValue(spec, a, k_value(spec, a), theta_value(spec, a), method)


# ---------------------------------------------------------------------------
# Ball and sphere averages of G
# ---------------------------------------------------------------------------


def ball_average_green(
    profile: RadialGreenProfile, t: float, a: float
) -> float:
    """Mean of G(p, .) over the ball B(p0, a) with t = d_R(p0, p).

    Equals phi(t) + K(M, a) for t >= a; for t < a the overlap correction
    subtracts a double integral, collapsed here to a single one by
    swapping the integration order. t = 0 is rejected: phi diverges there
    while the true ball mean is the finite Theta(M, a).
    """
    spec = profile.spec
    D = diameter(spec)
    if t == 0.0:
        raise SingularityError(
            "the ball average at t = 0 is Theta(M, a); phi diverges pointwise"
        )
    if not 0.0 < t <= D:
        raise DomainError(f"need 0 < t <= D, got t={t}")
    if not 0.0 < a < D:
        raise DomainError(f"need 0 < a < D, got a={a}")
    base = profile.phi(t) + k_value(spec, a)
    if t >= a:
        return base
    va = ball_volume(spec, a)

    def overlap(u: float) -> float:
        return (va - ball_volume(spec, u)) / sphere_area(spec, u)

    correction = integrate(overlap, t, a, _INNER_SETTINGS) / va
    return base - correction


def spherical_mean(profile: RadialGreenProfile, t: float, a: float) -> float:
    """Mean of G(p, .) over the geodesic sphere S(p0, a), for a < t = d_R(p, p0).

    Closed identity: phi(t) + (1/V) int_0^a V(u)/v(u) du.
    """
    spec = profile.spec
    D = diameter(spec)
    if not 0.0 < t <= D:
        raise DomainError(f"need 0 < t <= D, got t={t}")
    if not 0.0 < a < t:
        raise DomainError(
            f"the sphere-mean identity holds for a < t only, got a={a}, t={t}"
        )
    return profile.phi(t) + cum_volume_over_area(spec, a) / volume(spec)
