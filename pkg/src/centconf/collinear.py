"""Collinear (Moulton-type) central configurations.

For every left-to-right ordering of N positive masses on a line there
is exactly one central configuration, because f restricted to the line
is strictly convex on each ordered chamber; its planar Morse index is
N - 2 for every exponent A >= 2.  The solve runs in the N on-line
coordinates with plain (guarded) Newton; classification happens in the
full 2N-dimensional space.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import core
from .core import Configuration, ConvergenceError, PotentialModel

ENUMERATION_CAP = 10
LINE_GTOL = 1e-11
COLLINEARITY_TOL = 1e-12


def canonical_ordering(perm) -> tuple[int, ...]:
    """Representative of {perm, reversed(perm)} with first element < last."""
    p = tuple(int(v) for v in perm)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation of 0..{len(p) - 1}: {perm}")
    return p if p[0] < p[-1] else p[::-1]


def enumerate_orderings(n: int) -> list[tuple[int, ...]]:
    """All n!/2 orderings modulo reversal, lexicographically sorted."""
    if n < 2:
        raise ValueError("need n >= 2")
    if n > ENUMERATION_CAP:
        raise ValueError(f"ordering enumeration capped at n <= {ENUMERATION_CAP}")
    return sorted(p for p in itertools.permutations(range(n)) if p[0] < p[-1])


def restricted_gradient(model: PotentialModel, xs: np.ndarray) -> np.ndarray:
    """Gradient of f restricted to the x-axis (N coordinates)."""
    x = np.asarray(xs, dtype=float)
    m = model.mass_array()
    a = model.exponent
    dx = x[:, None] - x[None, :]
    r = np.abs(dx)
    np.fill_diagonal(r, 1.0)
    w = r ** (-a) * (m[:, None] * m[None, :])
    np.fill_diagonal(w, 0.0)
    return model.total_mass * m * x - np.sum(w * dx, axis=1)


def restricted_hessian(model: PotentialModel, xs: np.ndarray) -> np.ndarray:
    """On-line Hessian; strictly diagonally dominant, hence positive definite."""
    x = np.asarray(xs, dtype=float)
    m = model.mass_array()
    a = model.exponent
    r = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(r, 1.0)
    off = -(a - 1.0) * r ** (-a) * (m[:, None] * m[None, :])
    np.fill_diagonal(off, 0.0)
    h = off.copy()
    np.fill_diagonal(h, model.total_mass * m - np.sum(off, axis=1))
    return h


def _initial_line(ordering: tuple[int, ...]) -> np.ndarray:
    n = len(ordering)
    slots = np.linspace(-n / 2.0, n / 2.0, n)
    x = np.empty(n)
    for slot, body in enumerate(ordering):
        x[body] = slots[slot]
    return x


def _respects_ordering(x: np.ndarray, ordering: tuple[int, ...]) -> bool:
    vals = x[list(ordering)]
    return bool(np.all(np.diff(vals) > 1e-9))


def collinear_solve(
    model: PotentialModel,
    ordering,
    start: np.ndarray | None = None,
    max_iter: int = 200,
) -> Configuration:
    """The unique central configuration on the x-axis for one ordering.

    Newton steps are halved while they would leave the ordered chamber
    or fail to reduce the residual; convexity makes any interior start
    converge to the same point.
    """
    ordering = tuple(int(v) for v in ordering)
    n = model.n_bodies
    if sorted(ordering) != list(range(n)):
        raise ValueError(f"ordering must be a permutation of 0..{n - 1}")
    x = _initial_line(ordering) if start is None else np.asarray(start, dtype=float).copy()
    if not _respects_ordering(x, ordering):
        raise ValueError("start must lie strictly inside the ordered chamber")
    g = restricted_gradient(model, x)
    for _ in range(max_iter):
        if np.linalg.norm(g) < LINE_GTOL:
            break
        step = np.linalg.solve(restricted_hessian(model, x), -g)
        scale = 1.0
        for _ in range(60):
            xt = x + scale * step
            if _respects_ordering(xt, ordering):
                gt = restricted_gradient(model, xt)
                if np.linalg.norm(gt) < np.linalg.norm(g) or scale < 1e-12:
                    x, g = xt, gt
                    break
            scale *= 0.5
        else:
            raise ConvergenceError("line search failed inside the ordered chamber")
    else:
        raise ConvergenceError(f"collinear solve did not converge in {max_iter} iterations")
    return Configuration(np.column_stack([x, np.zeros(n)]))


def collinear_index(model: PotentialModel, config: Configuration) -> int:
    """Planar Morse index of a collinear critical configuration.

    Counts negative eigenvalues of the full 2N Hessian outside the zero
    band (the rotation zero is discarded); expected to be N - 2.
    """
    core._check_sizes(model, config)
    if np.max(np.abs(config.positions[:, 1])) >= COLLINEARITY_TOL:
        raise ValueError("configuration is not on the x-axis")
    f = core.objective_f(model, config)
    g = core.gradient_f(model, config)
    if np.linalg.norm(g) >= core.GRADIENT_ZERO_FACTOR * (1.0 + abs(f)):
        raise ValueError("configuration is not critical")
    eigs = core.symmetric_eigenvalues(core.hessian_f(model, config))
    return core.analyze_spectrum(eigs).negative_count


def random_interior_start(
    seed: int, ordering: tuple[int, ...], spread: float = 1.0
) -> np.ndarray:
    """Deterministic random point strictly inside the ordered chamber."""
    rng = np.random.default_rng(seed)
    n = len(ordering)
    gaps = rng.uniform(0.2, spread, n - 1)
    vals = np.concatenate([[0.0], np.cumsum(gaps)])
    vals -= vals.mean()
    x = np.empty(n)
    for slot, body in enumerate(ordering):
        x[body] = vals[slot]
    return x
