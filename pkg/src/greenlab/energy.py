"""Green energies of explicit configurations and a local descent optimizer.

The energy of a configuration is the sum of the radial Green profile over
all ordered distinct pairs. Pair distances are formed from Gram matrices
of the representative vectors, so the whole evaluation is O(N^2) dense
linear algebra plus one vectorized profile sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundReport, best_finite_bound
from .errors import DomainError, SingularityError, UnsupportedManifoldError
from .green import RadialGreenProfile, get_profile
from .manifold import (
    Family,
    ManifoldSpec,
    Point,
    _as_generator,
    diameter,
    random_distance,
    sample_uniform,
)

__all__ = [
    "Configuration",
    "EnergyReport",
    "energy",
    "optimize",
    "mc_energy_moment",
    "pairwise_distances",
]

_MIN_SEPARATION_FACTOR = 1e-9


@dataclass(frozen=True, eq=False)
class Configuration:
    """A finite list of points sharing one manifold."""

    spec: ManifoldSpec
    points: list[Point]

    def __post_init__(self):
        if not self.points:
            raise DomainError("a configuration needs at least one point")
        for p in self.points:
            if p.spec != self.spec:
                raise DomainError("all points must share the configuration's manifold")

    def __len__(self):
        return len(self.points)

    def coords_array(self) -> np.ndarray:
        return np.stack([p.coords for p in self.points])


def _gram_modulus(spec: ManifoldSpec, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """|<p_i, q_j>| over the base field; plain <.,.> for the sphere."""
    fam = spec.family
    if fam is Family.SPHERE:
        return left @ right.T
    if fam is Family.REAL_PROJ:
        return np.abs(left @ right.T)
    if fam is Family.COMPLEX_PROJ:
        return np.abs(left.conj() @ right.T)
    comps = []
    signs = {
        # quaternion component index pairs of conj(p) * q and their signs
        0: [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)],
        1: [(0, 1, 1.0), (1, 0, -1.0), (2, 3, -1.0), (3, 2, 1.0)],
        2: [(0, 2, 1.0), (2, 0, -1.0), (3, 1, -1.0), (1, 3, 1.0)],
        3: [(0, 3, 1.0), (3, 0, -1.0), (1, 2, -1.0), (2, 1, 1.0)],
    }
    for comp in range(4):
        acc = np.zeros((left.shape[0], right.shape[0]))
        for a, b, sign in signs[comp]:
            acc += sign * np.einsum("im,jm->ij", left[:, :, a], right[:, :, b])
        comps.append(acc)
    return np.sqrt(sum(c * c for c in comps))


def pairwise_distances(config: Configuration) -> np.ndarray:
    """Symmetric matrix of geodesic distances (zero diagonal).

    Entries the Gram-matrix arccos cannot resolve (near-coincident pairs,
    where it floors at ~1e-8) are recomputed with the exact pointwise
    distance so the duplicate guard sees true separations.
    """
    from .manifold import distance

    coords = config.coords_array()
    gram = _gram_modulus(config.spec, coords, coords)
    np.clip(gram, -1.0, 1.0, out=gram)
    dist = np.arccos(gram)
    np.fill_diagonal(dist, 0.0)
    close_i, close_j = np.nonzero(np.triu(dist < 1e-6, k=1))
    for i, j in zip(close_i.tolist(), close_j.tolist()):
        d = distance(config.points[i], config.points[j])
        dist[i, j] = dist[j, i] = d
    return dist


_BLOCK_ROWS = 256


def energy(
    config: Configuration,
    profile: RadialGreenProfile | None = None,
    threads: int = 1,
) -> float:
    """Sum of the Green profile over ordered distinct pairs.

    The upper triangle is swept in fixed row blocks whose partial sums are
    reduced in block order, so the result is bit-identical for any thread
    count; numpy's pairwise summation compensates within blocks.
    """
    from .manifold import distance

    if profile is None:
        profile = get_profile(config.spec)
    if profile.spec != config.spec:
        raise DomainError("profile and configuration disagree on the manifold")
    n = len(config)
    if n == 1:
        return 0.0
    spec = config.spec
    coords = config.coords_array()
    floor = _MIN_SEPARATION_FACTOR * diameter(spec)

    def block_sum(lo: int, hi: int) -> float:
        gram = _gram_modulus(spec, coords[lo:hi], coords)
        np.clip(gram, -1.0, 1.0, out=gram)
        dist = np.arccos(gram)
        upper = np.arange(n)[None, :] > np.arange(lo, hi)[:, None]
        for bi, bj in zip(*np.nonzero(upper & (dist < 1e-6))):
            dist[bi, bj] = distance(config.points[lo + int(bi)], config.points[int(bj)])
        pair_d = dist[upper]
        if np.any(pair_d < floor):
            rows, cols = np.nonzero(upper & (dist < floor))
            i, j = lo + int(rows[0]), int(cols[0])
            raise SingularityError(
                f"points {i} and {j} are closer than {floor:g} "
                f"(distance {dist[rows[0], cols[0]]:g})"
            )
        return float(np.sum(profile.phi(pair_d)))

    blocks = [(lo, min(lo + _BLOCK_ROWS, n)) for lo in range(0, n, _BLOCK_ROWS)]
    if threads <= 1 or len(blocks) == 1:
        partials = [block_sum(lo, hi) for lo, hi in blocks]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda b: block_sum(*b), blocks))
    return 2.0 * float(np.sum(np.asarray(partials)))


@dataclass(frozen=True)
class EnergyReport:
    """Energy of a configuration against its certified lower bound."""

    spec: ManifoldSpec
    N: int
    energy: float
    bound: BoundReport
    slack: float
    seed: int | None = None

    def __post_init__(self):
        if self.slack < 0.0:
            raise DomainError(
                f"energy {self.energy} fell below the certified bound "
                f"{self.bound.best_bound}; a certified-bound violation means a bug"
            )
        for a, val in self.bound.radius_grid:
            if self.energy < val:
                raise DomainError(
                    f"energy {self.energy} under the bound {val} at radius {a}"
                )

    @classmethod
    def from_configuration(
        cls,
        config: Configuration,
        profile: RadialGreenProfile | None = None,
        seed: int | None = None,
        threads: int = 1,
    ) -> "EnergyReport":
        e = energy(config, profile, threads=threads)
        rep = best_finite_bound(config.spec, len(config))
        return cls(
            spec=config.spec,
            N=len(config),
            energy=e,
            bound=rep,
            slack=e - rep.best_bound,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "family": self.spec.token,
            "n": self.spec.n,
            "N": self.N,
            "seed": self.seed,
            "energy": self.energy,
            "slack": self.slack,
            "bound": self.bound.to_dict(),
        }


def _phase_aligned(spec: ManifoldSpec, base: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Representatives of `others` rotated so each inner product with base is real >= 0."""
    fam = spec.family
    if fam is Family.SPHERE:
        return others
    if fam is Family.REAL_PROJ:
        signs = np.sign(others @ base)
        signs[signs == 0.0] = 1.0
        return others * signs[:, None]
    if fam is Family.COMPLEX_PROJ:
        inner = others.conj() @ base
        mod = np.abs(inner)
        safe = np.where(mod == 0.0, 1.0, mod)
        factor = np.where(mod == 0.0, 1.0 + 0.0j, inner / safe)
        return others * factor[:, None]
    aligned = np.empty_like(others)
    from .manifold import _quat_scale, quat_hermitian_inner

    for idx in range(others.shape[0]):
        h = quat_hermitian_inner(base, others[idx])
        nrm = float(np.linalg.norm(h))
        if nrm == 0.0:
            aligned[idx] = others[idx]
            continue
        u = np.array([h[0], -h[1], -h[2], -h[3]]) / nrm
        aligned[idx] = _quat_scale(others[idx], u)
    return aligned


def _descent_direction(
    spec: ManifoldSpec,
    profile: RadialGreenProfile,
    coords: np.ndarray,
    i: int,
) -> np.ndarray:
    """Negative Riemannian gradient of point i's interaction energy (ambient)."""
    from .green import phi_hat_prime
    from .manifold import volume

    base = coords[i]
    others = np.delete(coords, i, axis=0)
    aligned = _phase_aligned(spec, base, others)
    if spec.family is Family.QUAT_PROJ:
        cos_d = np.array(
            [
                float(np.sum(base * aligned[k]))
                for k in range(aligned.shape[0])
            ]
        )
    elif spec.family is Family.COMPLEX_PROJ:
        cos_d = np.real(aligned.conj() @ base)
    else:
        cos_d = aligned @ base
    cos_d = np.clip(cos_d, -1.0, 1.0)
    d = np.arccos(cos_d)
    sin_d = np.sqrt(np.maximum(1.0 - cos_d * cos_d, 1e-30))
    v = volume(spec)
    weights = np.array(
        [phi_hat_prime(spec, float(x)) / v if 0.0 < x < diameter(spec) else 0.0 for x in d]
    )
    # descent = -grad E_i = sum_k [phi'(d_k)/sin d_k] (q_k - cos(d_k) p)
    scale = weights / sin_d
    if spec.family is Family.QUAT_PROJ:
        direction = np.einsum("k,kmc->mc", scale, aligned - cos_d[:, None, None] * base)
    else:
        direction = np.einsum("k,km->m", scale, aligned - cos_d[:, None] * base)
    return direction


def optimize(
    spec: ManifoldSpec,
    N: int,
    iterations: int,
    rng,
    profile: RadialGreenProfile | None = None,
) -> Configuration:
    """First-order descent with backtracking, from a uniform random start.

    Each sweep visits every point once, proposes a geodesic step along the
    negative gradient of its interaction energy and halves the step until
    the energy decreases; only decreases are accepted, so the energy is
    monotone over accepted moves and the run is deterministic for a fixed
    seed.
    """
    if spec.family is Family.CAYLEY_PLANE:
        raise UnsupportedManifoldError("no point model on the Cayley plane")
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    gen = _as_generator(rng)
    if profile is None:
        profile = get_profile(spec)
    points = [sample_uniform(spec, gen) for _ in range(N)]
    coords = np.stack([p.coords for p in points])
    D = diameter(spec)
    steps = np.full(N, 0.1 * D)

    def point_energy(idx: int, candidate: np.ndarray) -> float:
        ref = coords[idx].copy()
        coords[idx] = candidate
        try:
            others = np.delete(coords, idx, axis=0)
            aligned_cos = _pair_cos(spec, candidate, others)
            dd = np.arccos(np.clip(aligned_cos, -1.0, 1.0))
            if np.any(dd <= _MIN_SEPARATION_FACTOR * D):
                return math.inf
            return float(np.sum(profile.phi(dd)))
        finally:
            coords[idx] = ref

    from .manifold import _project_horizontal

    for _ in range(iterations):
        improved = False
        for i in range(N):
            direction = _descent_direction(spec, profile, coords, i)
            u = _project_horizontal(spec, coords[i], direction.astype(coords.dtype))
            nrm = float(np.linalg.norm(u))
            if nrm < 1e-15:
                continue
            u = u / nrm
            current = point_energy(i, coords[i])
            t = min(float(steps[i]) * 2.0, 0.5 * D)
            accepted = False
            for _ in range(40):
                candidate = math.cos(t) * coords[i] + math.sin(t) * u
                candidate /= np.linalg.norm(candidate)
                if point_energy(i, candidate) < current:
                    coords[i] = candidate
                    steps[i] = t
                    accepted = True
                    break
                t *= 0.5
            improved = improved or accepted
        if not improved:
            break
    pts = [Point(spec, coords[i] / np.linalg.norm(coords[i])) for i in range(N)]
    return Configuration(spec, pts)


def _pair_cos(spec: ManifoldSpec, base: np.ndarray, others: np.ndarray) -> np.ndarray:
    fam = spec.family
    if fam is Family.SPHERE:
        return others @ base
    if fam is Family.REAL_PROJ:
        return np.abs(others @ base)
    if fam is Family.COMPLEX_PROJ:
        return np.abs(others.conj() @ base)
    from .manifold import quat_hermitian_inner

    return np.array(
        [float(np.linalg.norm(quat_hermitian_inner(base, others[k]))) for k in range(others.shape[0])]
    )


def mc_energy_moment(
    spec: ManifoldSpec, N: int, samples: int, rng
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of E over i.i.d. uniform configurations.

    The Cayley plane has no point model; there, each ordered pair is
    simulated by an independent radial draw, which reproduces the mean
    exactly because the expectation is linear in the pair terms.
    """
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    gen = _as_generator(rng)
    profile = get_profile(spec)
    values = np.empty(samples)
    if spec.family is Family.CAYLEY_PLANE:
        pairs = N * (N - 1)
        draws = random_distance(spec, gen, size=samples * pairs)
        values = profile.phi(draws).reshape(samples, pairs).sum(axis=1)
    else:
        for s in range(samples):
            config = Configuration(spec, [sample_uniform(spec, gen) for _ in range(N)])
            values[s] = energy(config, profile)
    mean = float(np.mean(values))
    std_err = float(np.std(values, ddof=1) / math.sqrt(samples))
    return mean, std_err
