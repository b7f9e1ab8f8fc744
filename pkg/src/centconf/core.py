"""Objective function, derivatives and dense spectra for planar N-body problems.

A central configuration of N positive masses under the homogeneous
potential with exponent A >= 2 is a critical point of

    f(q) = M*I/2 + U/(A-2)          (A > 2)
    f(q) = M*I/2 - sum m_i m_j log r_ij   (A = 2, point-vortex case)

where I is the moment of inertia about the origin and M the total mass.
Both branches share one Cartesian gradient formula,

    g_i = M m_i q_i - sum_{j != i} m_i m_j r_ij^(-A) (q_i - q_j),

so the gradient and Hessian code below has a single code path for all
A >= 2.  Everything here is a pure function of its inputs; the domain
types are immutable and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Configurations with any pairwise distance below this are treated as on
# the collision set and rejected instead of returning infinities.
COLLISION_EPS = 1e-12

# Residual scale below which a gradient counts as zero: tol * (1 + |f|).
GRADIENT_ZERO_FACTOR = 1e-10

# Zero-eigenvalue band half-width: tol * max(1, spectral radius).
EIG_ZERO_FACTOR = 1e-7


class CollisionError(ValueError):
    """A configuration lies on (or within the guard band of) the collision set."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure failed to converge."""


@dataclass(frozen=True)
class PotentialModel:
    """Potential exponent A >= 2 plus the list of positive masses.

    ``total_mass`` is derived; the Newtonian case is ``exponent == 3``
    and the point-vortex (logarithmic) case is ``exponent == 2``.
    """

    exponent: float
    masses: tuple[float, ...]
    total_mass: float = field(init=False)

    def __post_init__(self):
        a = float(self.exponent)
        if not a >= 2.0:
            raise ValueError(f"exponent must be >= 2, got {self.exponent}")
        masses = tuple(float(m) for m in self.masses)
        if len(masses) < 2:
            raise ValueError("need at least 2 bodies")
        if any(not m > 0.0 for m in masses):
            raise ValueError("all masses must be positive")
        object.__setattr__(self, "exponent", a)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "total_mass", math.fsum(masses))

    @classmethod
    def equal_masses(cls, n: int, exponent: float) -> "PotentialModel":
        return cls(exponent, (1.0,) * n)

    @property
    def n_bodies(self) -> int:
        return len(self.masses)

    def mass_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Planar positions of N bodies, guaranteed off the collision set."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError(f"positions must be (N, 2), got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if pos.shape[0] >= 2:
            dist = _distance_matrix(pos)
            np.fill_diagonal(dist, np.inf)
            dmin = float(np.min(dist))
            if not dmin > COLLISION_EPS:
                raise CollisionError(f"two bodies coincide (min distance {dmin:.3e})")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_bodies(self) -> int:
        return self.positions.shape[0]

    def translated(self, offset) -> "Configuration":
        return Configuration(self.positions + np.asarray(offset, dtype=float))

    def rotated(self, angle: float) -> "Configuration":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return Configuration(self.positions @ rot.T)


@dataclass(frozen=True)
class SpectrumResult:
    """Sorted eigenvalue list with zero-band and negative counts."""

    eigenvalues: tuple[float, ...]
    zero_count: int
    negative_count: int


def _distance_matrix(pos: np.ndarray) -> np.ndarray:
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _check_sizes(model: PotentialModel, config: Configuration) -> None:
    if model.n_bodies != config.n_bodies:
        raise ValueError(
            f"model has {model.n_bodies} masses but configuration has "
            f"{config.n_bodies} bodies"
        )


def _guarded_distances(pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise difference and distance arrays, rejecting near-collisions."""
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    off = dist.copy()
    np.fill_diagonal(off, np.inf)
    if not np.min(off) > COLLISION_EPS:
        raise CollisionError("configuration touches the collision set")
    return diff, dist


def mutual_distance(config: Configuration, i: int, j: int) -> float:
    """Euclidean distance r_ij between bodies i and j (i != j)."""
    n = config.n_bodies
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"body index out of range for N={n}")
    if i == j:
        raise ValueError("mutual distance requires two distinct bodies")
    d = config.positions[i] - config.positions[j]
    return float(math.hypot(d[0], d[1]))


def moment_of_inertia(model: PotentialModel, config: Configuration) -> float:
    """I = sum m_i |q_i|^2, the mass-weighted spread about the origin."""
    _check_sizes(model, config)
    return float(np.sum(model.mass_array() * np.sum(config.positions**2, axis=1)))


def potential_energy(model: PotentialModel, config: Configuration) -> float:
    """Pair-interaction energy.

    For A > 2 this is sum m_i m_j r_ij^(2-A) (positive); for A = 2 it is
    the logarithmic sum m_i m_j log r_ij, which can take either sign.
    """
    _check_sizes(model, config)
    _, dist = _guarded_distances(config.positions)
    m = model.mass_array()
    iu = np.triu_indices(config.n_bodies, 1)
    mm = m[iu[0]] * m[iu[1]]
    r = dist[iu]
    a = model.exponent
    if a == 2.0:
        return float(np.sum(mm * np.log(r)))
    return float(np.sum(mm * r ** (2.0 - a)))


def objective_f(model: PotentialModel, config: Configuration) -> float:
    """The scale-fixed objective whose critical points are central configurations.

    f = M*I/2 + U/(A-2) for A > 2; at A = 2 the sign convention
    f = M*I/2 - U_log keeps the gradient formula uniform in A.
    """
    _check_sizes(model, config)
    half_mi = model.total_mass * moment_of_inertia(model, config) / 2.0
    u = potential_energy(model, config)
    a = model.exponent
    if a == 2.0:
        return half_mi - u
    return half_mi + u / (a - 2.0)


def gradient_f(model: PotentialModel, config: Configuration) -> np.ndarray:
    """Cartesian gradient of f, flattened to shape (2N,).

    One formula covers all A >= 2:
    g_i = M m_i q_i - sum_{j != i} m_i m_j r_ij^(-A) (q_i - q_j).
    The per-body sum satisfies sum_i g_i = M * (sum_i m_i q_i), so any
    critical point automatically has its center of mass at the origin.
    """
    _check_sizes(model, config)
    pos = config.positions
    diff, dist = _guarded_distances(pos)
    m = model.mass_array()
    a = model.exponent
    np.fill_diagonal(dist, 1.0)
    w = dist ** (-a) * (m[:, None] * m[None, :])
    np.fill_diagonal(w, 0.0)
    g = model.total_mass * m[:, None] * pos - np.einsum("ij,ijk->ik", w, diff)
    return g.reshape(-1)


def hessian_f(model: PotentialModel, config: Configuration) -> np.ndarray:
    """Dense symmetric Hessian of f in Cartesian coordinates, shape (2N, 2N).

    At a critical point the infinitesimal rotation vector
    v = (-y_0, x_0, ..., -y_{N-1}, x_{N-1}) lies in its kernel.
    """
    _check_sizes(model, config)
    pos = config.positions
    diff, dist = _guarded_distances(pos)
    n = config.n_bodies
    m = model.mass_array()
    a = model.exponent
    np.fill_diagonal(dist, 1.0)
    mm = m[:, None] * m[None, :]
    w = dist ** (-a) * mm
    w2 = dist ** (-a - 2.0) * mm
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w2, 0.0)
    outer = diff[..., :, None] * diff[..., None, :]
    blocks = w[..., None, None] * np.eye(2) - a * w2[..., None, None] * outer
    diag = model.total_mass * m[:, None, None] * np.eye(2) - np.sum(blocks, axis=1)
    idx = np.arange(n)
    blocks[idx, idx] = diag
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


def rotation_vector(config: Configuration) -> np.ndarray:
    """Unit tangent of the rotation orbit through the configuration, shape (2N,)."""
    pos = config.positions
    v = np.column_stack([-pos[:, 1], pos[:, 0]]).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("rotation direction undefined: all bodies at the origin")
    return v / norm


def center_of_mass(model: PotentialModel, config: Configuration) -> np.ndarray:
    _check_sizes(model, config)
    m = model.mass_array()
    return m @ config.positions / model.total_mass


def finite_difference_gradient(
    model: PotentialModel, config: Configuration, step: float = 1e-5
) -> np.ndarray:
    """Central-difference approximation of gradient_f (test oracle)."""
    if not step > 0.0:
        raise ValueError("step must be positive")
    _require_interior(config, step)
    x0 = config.positions.reshape(-1).copy()
    out = np.empty_like(x0)
    for k in range(x0.size):
        out[k] = (_f_at(model, x0, k, step) - _f_at(model, x0, k, -step)) / (2 * step)
    return out


def finite_difference_hessian(
    model: PotentialModel, config: Configuration, step: float = 2e-5
) -> np.ndarray:
    """Second-order central-difference Hessian built from f values only."""
    if not step > 0.0:
        raise ValueError("step must be positive")
    _require_interior(config, step)
    x0 = config.positions.reshape(-1).copy()
    dim = x0.size
    h = np.empty((dim, dim))
    f0 = objective_f(model, config)
    for i in range(dim):
        h[i, i] = (_f_at(model, x0, i, step) - 2 * f0 + _f_at(model, x0, i, -step)) / step**2
        for j in range(i + 1, dim):
            fpp = _f_at2(model, x0, i, step, j, step)
            fpm = _f_at2(model, x0, i, step, j, -step)
            fmp = _f_at2(model, x0, i, -step, j, step)
            fmm = _f_at2(model, x0, i, -step, j, -step)
            h[i, j] = h[j, i] = (fpp - fpm - fmp + fmm) / (4 * step**2)
    return h


def _require_interior(config: Configuration, step: float) -> None:
    pos = config.positions
    if pos.shape[0] < 2:
        return
    dist = _distance_matrix(pos)
    np.fill_diagonal(dist, np.inf)
    dmin = float(np.min(dist))
    if dmin <= 4.0 * step:
        raise CollisionError(
            f"finite-difference probes would approach a collision "
            f"(min distance {dmin:.3e}, step {step:.3e})"
        )


def _f_at(model: PotentialModel, flat: np.ndarray, k: int, dk: float) -> float:
    x = flat.copy()
    x[k] += dk
    return objective_f(model, Configuration(x.reshape(-1, 2)))


def _f_at2(model, flat, i, di, j, dj) -> float:
    x = flat.copy()
    x[i] += di
    x[j] += dj
    return objective_f(model, Configuration(x.reshape(-1, 2)))


def symmetric_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted ascending.

    Rejects inputs whose asymmetry exceeds 1e-12 relative to the largest
    entry.  Backed by a dense symmetric eigensolver (LAPACK via numpy);
    trace and Frobenius norm are preserved to machine precision.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    if float(np.max(np.abs(mat - mat.T), initial=0.0)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric to within 1e-12 relative")
    return np.linalg.eigvalsh(0.5 * (mat + mat.T))


def analyze_spectrum(eigenvalues: np.ndarray, tol: float | None = None) -> SpectrumResult:
    """Classify eigenvalues into the zero band and strict negatives."""
    eigs = np.sort(np.asarray(eigenvalues, dtype=float))
    if tol is None:
        radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
        tol = EIG_ZERO_FACTOR * max(1.0, radius)
    zero = int(np.sum(np.abs(eigs) <= tol))
    neg = int(np.sum(eigs < -tol))
    return SpectrumResult(tuple(float(v) for v in eigs), zero, neg)
