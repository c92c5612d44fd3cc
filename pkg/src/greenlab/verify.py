"""Self-contained invariant suite behind the `verify` subcommand.

Each check returns (passed, detail). The quick tier keeps everything under
a few seconds; the full tier adds the sampling statistics and optimizer
checks.
"""

from __future__ import annotations

import math

import numpy as np

from . import ball_stats as bs
from . import bounds as bd
from . import energy as en
from .green import get_profile, phi_hat, phi_hat_prime
from .manifold import (
    Family,
    ManifoldSpec,
    Point,
    ball_volume,
    ball_volume_fraction,
    bm_constant,
    diameter,
    dimension,
    distance,
    radial_density,
    random_distance,
    sample_uniform,
    sphere_area,
    volume,
)
from .special_math import (
    QuadratureSettings,
    gauss_kronrod_panel,
    integrate,
    reg_incomplete_beta,
    vol_unit_sphere,
)

CORE_SPECS = [
    ManifoldSpec(Family.SPHERE, 2),
    ManifoldSpec(Family.SPHERE, 3),
    ManifoldSpec(Family.REAL_PROJ, 3),
    ManifoldSpec(Family.COMPLEX_PROJ, 2),
    ManifoldSpec(Family.QUAT_PROJ, 1),
    ManifoldSpec(Family.CAYLEY_PLANE, 2),
]


def _check_beta_symmetry():
    worst = 0.0
    for s in (0.01, 0.2, 0.5, 0.77, 0.99):
        for a, b in ((0.5, 0.5), (1.5, 2.5), (8.0, 3.0), (30.0, 30.0)):
            worst = max(
                worst,
                abs(reg_incomplete_beta(s, a, b) + reg_incomplete_beta(1 - s, b, a) - 1),
            )
    return worst < 1e-12, f"max symmetry defect {worst:.2e}"


def _check_panel_exactness():
    worst = 0.0
    for deg in range(23):
        val, _, _ = gauss_kronrod_panel(lambda x: x**deg, 0.0, 1.0)
        worst = max(worst, abs(val - 1.0 / (deg + 1)) * (deg + 1))
    return worst < 1e-13, f"max degree<=22 panel error {worst:.2e}"


def _check_quadrature_additivity():
    f = lambda x: math.exp(-x) * math.sin(3 * x)
    whole = integrate(f, 0.0, 2.0)
    split = integrate(f, 0.0, 0.7) + integrate(f, 0.7, 2.0)
    return abs(whole - split) < 1e-12, f"split defect {abs(whole - split):.2e}"


def _check_volume_consistency():
    worst = 0.0
    specs = CORE_SPECS + [
        ManifoldSpec(Family.SPHERE, 60),
        ManifoldSpec(Family.REAL_PROJ, 60),
        ManifoldSpec(Family.COMPLEX_PROJ, 60),
        ManifoldSpec(Family.QUAT_PROJ, 30),
    ]
    for spec in specs:
        total = vol_unit_sphere(dimension(spec)) * integrate(
            lambda r: radial_density(spec, r), 0.0, diameter(spec)
        )
        worst = max(worst, abs(total - volume(spec)) / volume(spec))
    return worst < 1e-10, f"max volume defect {worst:.2e}"


def _check_ball_volume_quadrature():
    worst = 0.0
    for spec in CORE_SPECS:
        D = diameter(spec)
        for frac in (0.2, 0.5, 0.8, 1.0):
            a = frac * D
            quad = vol_unit_sphere(dimension(spec)) * integrate(
                lambda r: radial_density(spec, r), 0.0, a
            )
            worst = max(worst, abs(quad - ball_volume(spec, a)) / volume(spec))
    return worst < 1e-10, f"max ball-volume defect {worst:.2e}"


def _check_sphere_area_derivative():
    worst = 0.0
    h = 1e-5
    for spec in CORE_SPECS:
        D = diameter(spec)
        for frac in (0.2, 0.5, 0.8):
            a = frac * D
            deriv = (ball_volume(spec, a + h) - ball_volume(spec, a - h)) / (2 * h)
            v = sphere_area(spec, a)
            worst = max(worst, abs(deriv - v) / v)
    return worst < 1e-6, f"max dV/da defect {worst:.2e}"


def _check_distance_axioms():
    rng = np.random.default_rng(2024)
    worst_tri = 0.0
    worst_sym = 0.0
    for spec in CORE_SPECS:
        if spec.family is Family.CAYLEY_PLANE:
            continue
        for _ in range(20):
            p, q, r = (sample_uniform(spec, rng) for _ in range(3))
            dpq, dqp = distance(p, q), distance(q, p)
            worst_sym = max(worst_sym, abs(dpq - dqp))
            worst_tri = max(worst_tri, dpq - distance(p, r) - distance(r, q))
    ok = worst_sym < 1e-12 and worst_tri < 1e-12
    return ok, f"symmetry {worst_sym:.1e}, triangle excess {worst_tri:.1e}"


def _check_green_mean_zero():
    worst = 0.0
    for spec in CORE_SPECS:
        prof = get_profile(spec)
        st = QuadratureSettings(rel_tol=1e-10, abs_tol=1e-10, max_subdivisions=4000)
        mz = integrate(lambda r: prof.phi(r) * sphere_area(spec, r), 0.0, diameter(spec), st)
        worst = max(worst, abs(mz))
    return worst < 1e-8, f"max mean defect {worst:.2e}"


def _check_sphere_profile_closed_form():
    spec = ManifoldSpec(Family.SPHERE, 2)
    prof = get_profile(spec)
    rr = np.linspace(0.01, math.pi, 50)
    exact = -np.log(np.sin(rr / 2)) / (2 * math.pi) - 1 / (4 * math.pi)
    got = prof.phi(rr)
    worst = float(np.max(np.abs(got - exact)))
    return worst < 1e-8, f"max pointwise defect {worst:.2e}"


def _check_bm_heads():
    worst = 0.0
    for spec in CORE_SPECS:
        if dimension(spec) <= 2:
            continue
        prof = get_profile(spec)
        r = 1e-3 * diameter(spec)
        dev = abs(
            volume(spec) * r ** (dimension(spec) - 2) * prof.phi(r) - bm_constant(spec)
        ) / bm_constant(spec)
        worst = max(worst, dev)
    return worst < 0.02, f"max head deviation {worst:.2%}"


def _check_profile_derivative():
    worst = 0.0
    h = 1e-6
    for spec in CORE_SPECS:
        D = diameter(spec)
        for frac in (0.2, 0.5, 0.8):
            s = frac * D
            num = (phi_hat(spec, s + h) - phi_hat(spec, s - h)) / (2 * h)
            exact = phi_hat_prime(spec, s)
            worst = max(worst, abs(num - exact) / abs(exact))
    return worst < 1e-6, f"max derivative defect {worst:.2e}"


def _check_kernel_cross_validation(quick: bool):
    grid = [(Family.COMPLEX_PROJ, 2), (Family.QUAT_PROJ, 1), (Family.CAYLEY_PLANE, 2)]
    if not quick:
        grid += [(Family.COMPLEX_PROJ, 5), (Family.QUAT_PROJ, 3)]
    worst = 0.0
    for fam, n in grid:
        spec = ManifoldSpec(fam, n)
        prof = get_profile(spec)
        for a in (0.3, 0.9, 1.4):
            worst = max(
                worst,
                abs(bs.k_quadrature(spec, a) - bs.k_closed(spec, a))
                / abs(bs.k_closed(spec, a)),
                abs(bs.theta_quadrature(prof, a) - bs.theta_closed(spec, a))
                / max(abs(bs.theta_closed(spec, a)), 1e-12),
            )
    return worst < 1e-6, f"max closed-vs-quadrature defect {worst:.2e}"


def _check_small_radius_asymptotics():
    worst_k = 0.0
    worst_theta = 0.0
    for spec in CORE_SPECS:
        D = diameter(spec)
        a = 1e-2 * D
        worst_k = max(worst_k, abs(bs.k_value(spec, a) / bs.k_asymptotic(spec, a) - 1))
        if dimension(spec) > 2:
            prof = get_profile(spec)
            worst_theta = max(
                worst_theta,
                abs(bs.theta_quadrature(prof, a) / bs.theta_asymptotic(spec, a) - 1),
            )
    ok = worst_k < 0.01 and worst_theta < 0.02
    return ok, f"K ratio defect {worst_k:.2%}, Theta ratio defect {worst_theta:.2%}"


def _check_ball_average_identity():
    spec = ManifoldSpec(Family.SPHERE, 2)
    prof = get_profile(spec)
    k03 = bs.k_value(spec, 0.3)
    exact_branch = bs.ball_average_green(prof, 1.0, 0.3) - (prof.phi(1.0) + k03)
    continuity = bs.ball_average_green(prof, 0.3 - 1e-12, 0.3) - bs.ball_average_green(
        prof, 0.3, 0.3
    )
    bound_ok = all(
        bs.ball_average_green(prof, t, 0.8) <= prof.phi(t) + bs.k_value(spec, 0.8) + 1e-12
        for t in (0.1, 0.4, 0.79, 1.2)
    )
    ok = exact_branch == 0.0 and abs(continuity) < 1e-9 and bound_ok
    return ok, f"branch {exact_branch:.1e}, continuity {continuity:.1e}, bound {bound_ok}"


def _check_spherical_mean_derivative():
    spec = ManifoldSpec(Family.SPHERE, 3)
    prof = get_profile(spec)
    h = 1e-5
    t, a = 1.2, 0.6
    num = (bs.spherical_mean(prof, t, a + h) - bs.spherical_mean(prof, t, a - h)) / (2 * h)
    exact = ball_volume(spec, a) / (volume(spec) * sphere_area(spec, a))
    dev = abs(num - exact) / exact
    return dev < 1e-6, f"derivative defect {dev:.2e}"


def _check_conditional_positivity():
    worst = 1.0
    for spec in (ManifoldSpec(Family.SPHERE, 3), ManifoldSpec(Family.COMPLEX_PROJ, 2)):
        prof = get_profile(spec)
        D = diameter(spec)
        for a in (0.05 * D, 0.12 * D):
            va = ball_volume(spec, a)
            self_term = bs.theta_value(spec, a) - (volume(spec) - va) / va * bs.k_value(spec, a)
            for t in (2 * a, 3 * a, 0.9 * D):
                if t > D:
                    continue
                cross = prof.phi(t) + 2 * bs.k_value(spec, a)
                worst = min(worst, self_term - cross)
    return worst >= 0.0, f"min self-minus-cross margin {worst:.3e}"


def _check_coefficient_closure():
    worst = 0.0
    for n in range(2, 11):
        spec = ManifoldSpec(Family.COMPLEX_PROJ, n)
        c = bd.optimal_radius_constant(spec)
        worst = max(worst, abs(c.c_opt - 1.0))
        target = n / (2 * (n * n - 1) * volume(spec))
        worst = max(worst, abs(c.leading - target) / target)
    for n in range(1, 6):
        spec = ManifoldSpec(Family.QUAT_PROJ, n)
        c = bd.optimal_radius_constant(spec)
        target_c = (2 * n + 1) ** (-1 / (2 * n))
        worst = max(worst, abs(c.c_opt - target_c) / target_c)
    spec = ManifoldSpec(Family.CAYLEY_PLANE, 2)
    c = bd.optimal_radius_constant(spec)
    worst = max(worst, abs(c.c_opt - 165 ** (-0.125)) / 165 ** (-0.125))
    for n in range(3, 11):
        s = bd.sphere_leading_coefficient(n)
        c = bd.optimal_radius_constant(ManifoldSpec(Family.SPHERE, n))
        worst = max(worst, abs(c.leading - s) / s)
    return worst < 1e-12, f"max closure defect {worst:.2e}"


def _check_comparisons_sharper():
    for fam, lo, hi in (
        (Family.REAL_PROJ, 3, 60),
        (Family.COMPLEX_PROJ, 2, 60),
        (Family.QUAT_PROJ, 1, 30),
    ):
        for _, ours, prior, _ in bd.compare_table(fam, lo, hi):
            if not abs(ours) < abs(prior):
                return False, f"row not sharper in {fam.value}"
    return True, "all rows sharper"


def _check_single_point_bound():
    worst = 0.0
    for spec in CORE_SPECS:
        D = diameter(spec)
        for frac in (0.1, 0.4, 0.8, 1.0):
            worst = max(worst, bd.finite_bound(spec, 1, frac * D))
    return worst <= 1e-12, f"max N=1 bound {worst:.2e}"


def _check_certificates():
    rng = np.random.default_rng(7)
    for spec in (ManifoldSpec(Family.SPHERE, 2), ManifoldSpec(Family.COMPLEX_PROJ, 2)):
        prof = get_profile(spec)
        for _ in range(3):
            cfg = en.Configuration(spec, [sample_uniform(spec, rng) for _ in range(12)])
            en.EnergyReport.from_configuration(cfg, prof)
    return True, "no certificate violations"


def _check_energy_mean_zero():
    rng = np.random.default_rng(31)
    spec = ManifoldSpec(Family.SPHERE, 2)
    mean, stderr = en.mc_energy_moment(spec, 20, 150, rng)
    return abs(mean) < 3 * stderr, f"mean {mean:.3f} vs stderr {stderr:.3f}"


def _check_cp1_isometry():
    cp1 = ManifoldSpec(Family.COMPLEX_PROJ, 1)
    s2 = ManifoldSpec(Family.SPHERE, 2)
    p1, p2 = get_profile(cp1), get_profile(s2)
    rr = np.linspace(0.05, math.pi / 2, 20)
    worst = float(np.max(np.abs(p1.phi(rr) - p2.phi(2 * rr))))
    return worst < 1e-8, f"profile transfer defect {worst:.2e}"


def _check_optimizer_tetrahedron():
    spec = ManifoldSpec(Family.SPHERE, 2)
    prof = get_profile(spec)
    cfg = en.optimize(spec, 4, 300, np.random.default_rng(7))
    target = 12 * prof.phi(math.acos(-1.0 / 3.0))
    dev = abs(en.energy(cfg, prof) - target)
    return dev < 1e-6, f"tetrahedron defect {dev:.2e}"


def _check_sampling_statistics():
    rng = np.random.default_rng(5)
    worst = 0.0
    for spec in (ManifoldSpec(Family.SPHERE, 2), ManifoldSpec(Family.CAYLEY_PLANE, 2)):
        draws = np.sort(random_distance(spec, rng, size=100_000))
        cdf = ball_volume_fraction(spec, draws)
        emp = (np.arange(draws.size) + 0.5) / draws.size
        worst = max(worst, float(np.max(np.abs(cdf - emp))))
    return worst < 0.01, f"max KS distance {worst:.4f}"


QUICK_CHECKS = [
    ("beta symmetry", _check_beta_symmetry),
    ("quadrature panel exactness", _check_panel_exactness),
    ("quadrature additivity", _check_quadrature_additivity),
    ("table volume consistency", _check_volume_consistency),
    ("ball volume vs quadrature", _check_ball_volume_quadrature),
    ("sphere area is dV/da", _check_sphere_area_derivative),
    ("distance axioms", _check_distance_axioms),
    ("green mean zero", _check_green_mean_zero),
    ("sphere profile closed form", _check_sphere_profile_closed_form),
    ("near-diagonal heads", _check_bm_heads),
    ("profile derivative", _check_profile_derivative),
    ("kernel closed vs quadrature", lambda: _check_kernel_cross_validation(True)),
    ("small-radius laws", _check_small_radius_asymptotics),
    ("ball-average identity", _check_ball_average_identity),
    ("sphere-mean derivative", _check_spherical_mean_derivative),
    ("conditional positivity", _check_conditional_positivity),
    ("coefficient closure", _check_coefficient_closure),
    ("comparisons sharper", _check_comparisons_sharper),
    ("single-point bound nonpositive", _check_single_point_bound),
    ("energy certificates", _check_certificates),
    ("complex line isometry", _check_cp1_isometry),
]

FULL_CHECKS = QUICK_CHECKS + [
    ("kernel cross validation (wide)", lambda: _check_kernel_cross_validation(False)),
    ("energy mean zero", _check_energy_mean_zero),
    ("optimizer tetrahedron", _check_optimizer_tetrahedron),
    ("radial sampling statistics", _check_sampling_statistics),
]


def run_verification(quick: bool = False, stream=None) -> bool:
    """Run the invariant suite, print a pass/fail table, return overall success."""
    import sys

    out = stream or sys.stdout
    checks = QUICK_CHECKS if quick else FULL_CHECKS
    all_ok = True
    width = max(len(name) for name, _ in checks) + 2
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure with its own diagnostic
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        out.write(f"{'PASS' if ok else 'FAIL'}  {name:<{width}} {detail}\n")
    out.write(("all checks passed\n") if all_ok else ("FAILURES detected\n"))
    return all_ok
