"""Multi-start discovery and classification of central configurations.

The pipeline is: seeded random starts in an annulus, damped-Newton
refinement of the gradient system (with the rotation direction projected
out of the Hessian), canonicalization modulo direct isometries,
signature-based deduplication, Morse classification, and labeled-class
multiplicity counting via the orbit-stabilizer relation
multiplicity * symmetry_order = N!.

Refinement runs as a vectorized batch over all starts; results are
assembled in start order, so the output is a deterministic function of
(model, n_starts, seed) regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import core
from .core import (
    CollisionError,
    Configuration,
    ConvergenceError,
    PotentialModel,
)

REFINE_GTOL_FACTOR = 1e-11     # convergence: |g| < tol * (1 + |f|)
REFINE_MIN_DISTANCE = 1e-6     # trial steps into this band count as collisions
START_MIN_SEPARATION = 1e-3
START_REJECTION_CAP = 1000
SIGNATURE_TOL = 1e-6           # dedup resolution on sorted mutual distances
MATCH_TOL = 1e-5               # isometry matching tolerance for symmetry search

_ST_ACTIVE, _ST_CONVERGED, _ST_DIVERGED, _ST_COLLIDED = 0, 1, 2, 3


class NonConvergence(ConvergenceError):
    """Damped-Newton refinement ran out of iterations."""


class StepCollision(ConvergenceError):
    """Refinement was driven into the collision set."""


@dataclass(frozen=True)
class CriticalPoint:
    """A converged, canonicalized critical point of f.

    ``signature`` is the canonical shape key (rounded sorted mutual
    distances plus a chirality mark); ``multiplicity`` counts labeled
    equivalence classes under direct isometries, so
    multiplicity * symmetry_order = N! for equal masses.
    """

    configuration: Configuration
    f_value: float
    eigenvalues: tuple[float, ...]
    morse_index: int
    degenerate: bool
    signature: tuple
    multiplicity: int
    symmetry_order: int


@dataclass(frozen=True)
class SurveyResult:
    classes: tuple[CriticalPoint, ...]
    converged: int
    diverged: int
    collided: int


def random_start(seed: int, n: int, r_min: float, r_max: float) -> Configuration:
    """Deterministic random configuration: n bodies i.i.d. uniform in an annulus.

    Resamples the whole set (up to 1000 times) until the minimum pairwise
    separation is at least 1e-3.
    """
    if not 0.0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    rng = np.random.default_rng(seed)
    for _ in range(START_REJECTION_CAP):
        rad = np.sqrt(rng.uniform(r_min**2, r_max**2, n))
        th = rng.uniform(0.0, 2.0 * np.pi, n)
        pos = np.column_stack([rad * np.cos(th), rad * np.sin(th)])
        diff = pos[:, None, :] - pos[None, :, :]
        d2 = np.sum(diff * diff, axis=-1) + np.eye(n)
        if np.min(d2) >= START_MIN_SEPARATION**2:
            return Configuration(pos)
    raise ConvergenceError(
        f"could not draw {n} bodies with separation >= {START_MIN_SEPARATION} "
        f"in {START_REJECTION_CAP} tries"
    )


def _batch_eval(a: float, m: np.ndarray, total: float, x: np.ndarray):
    """f, gradient and Hessian for a batch of configurations x: (B, n, 2)."""
    b, n, _ = x.shape
    diff = x[:, :, None, :] - x[:, None, :, :]
    r2 = np.sum(diff * diff, axis=-1)
    np.einsum("bii->bi", r2)[:] = 1.0
    r = np.sqrt(r2)
    mm = m[:, None] * m[None, :]
    inertia = np.einsum("j,bjk,bjk->b", m, x, x)
    iu = np.triu_indices(n, 1)
    pair_m = mm[iu]
    if a == 2.0:
        f = total * inertia / 2.0 - np.sum(pair_m * np.log(r[:, iu[0], iu[1]]), axis=1)
    else:
        f = total * inertia / 2.0 + np.sum(pair_m * r[:, iu[0], iu[1]] ** (2.0 - a), axis=1) / (a - 2.0)
    w = r ** (-a) * mm
    np.einsum("bii->bi", w)[:] = 0.0
    g = total * m[None, :, None] * x - np.einsum("bij,bijk->bik", w, diff)
    w2 = r ** (-a - 2.0) * mm
    np.einsum("bii->bi", w2)[:] = 0.0
    outer = diff[..., :, None] * diff[..., None, :]
    blocks = w[..., None, None] * np.eye(2) - a * w2[..., None, None] * outer
    diag = total * m[None, :, None, None] * np.eye(2) - np.sum(blocks, axis=2)
    idx = np.arange(n)
    blocks[:, idx, idx] = diag
    h = blocks.transpose(0, 1, 3, 2, 4).reshape(b, 2 * n, 2 * n)
    return f, g.reshape(b, 2 * n), h


def _min_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, :, None, :] - x[:, None, :, :]
    r2 = np.sum(diff * diff, axis=-1)
    np.einsum("bii->bi", r2)[:] = np.inf
    return np.sqrt(np.min(r2, axis=(1, 2)))


def _refine_batch(
    a: float,
    m: np.ndarray,
    total: float,
    x0: np.ndarray,
    max_iter: int,
    trace: list | None = None,
):
    """Damped-Newton refinement of the gradient system for a batch of starts.

    Each iteration solves (H + mu v v^T + lambda I) d = -g with v the
    normalized rotation direction; steps are accepted only if |g|^2
    decreases and no pair comes within the collision band, with the
    Levenberg parameter adapted accordingly.  Returns final positions,
    f values and a status code per start.
    """
    b, n, _ = x0.shape
    dim = 2 * n
    x = x0.copy()
    lam = np.full(b, 1e-3)
    status = np.full(b, _ST_ACTIVE, dtype=np.int8)
    with np.errstate(all="ignore"):
        f, g, h = _batch_eval(a, m, total, x)
        gn2 = np.sum(g * g, axis=1)
        for _ in range(max_iter):
            conv = (status == _ST_ACTIVE) & (np.sqrt(gn2) < REFINE_GTOL_FACTOR * (1.0 + np.abs(f)))
            status[conv] = _ST_CONVERGED
            ai = np.where(status == _ST_ACTIVE)[0]
            if ai.size == 0:
                break
            finite = np.all(np.isfinite(h[ai]), axis=(1, 2)) & np.all(np.isfinite(g[ai]), axis=1)
            status[ai[~finite]] = _ST_DIVERGED
            ai = ai[finite]
            if ai.size == 0:
                continue
            xa, ga, ha = x[ai], g[ai], h[ai]
            rot = np.stack([-xa[:, :, 1], xa[:, :, 0]], axis=-1).reshape(ai.size, dim)
            rot_norm = np.linalg.norm(rot, axis=1, keepdims=True)
            rot_norm[rot_norm == 0.0] = 1.0
            v = rot / rot_norm
            mu = 1.0 + np.linalg.norm(ha, axis=(1, 2)) / dim
            hreg = (
                ha
                + mu[:, None, None] * v[:, :, None] * v[:, None, :]
                + lam[ai, None, None] * np.eye(dim)
            )
            delta = _batch_solve(hreg, -ga)
            xt = xa + delta.reshape(ai.size, n, 2)
            ft, gt, ht = _batch_eval(a, m, total, xt)
            gt2 = np.sum(gt * gt, axis=1)
            ok = np.isfinite(gt2) & (gt2 < gn2[ai]) & (_min_distances(xt) > REFINE_MIN_DISTANCE)
            acc = ai[ok]
            x[acc], f[acc], g[acc], h[acc], gn2[acc] = xt[ok], ft[ok], gt[ok], ht[ok], gt2[ok]
            lam[acc] = np.maximum(lam[acc] / 3.0, 1e-12)
            if trace is not None and acc.size:
                trace.append((acc.copy(), np.sqrt(gt2[ok])))
            rej = ai[~ok]
            lam[rej] *= 10.0
            blown = rej[lam[rej] > 1e13]
            if blown.size:
                near = _min_distances(x[blown]) < 1e-4
                status[blown[near]] = _ST_COLLIDED
                status[blown[~near]] = _ST_DIVERGED
        conv = (status == _ST_ACTIVE) & (np.sqrt(gn2) < REFINE_GTOL_FACTOR * (1.0 + np.abs(f)))
        status[conv] = _ST_CONVERGED
    # trial steps that stalled against the collision band count as collisions
    stuck = status == _ST_ACTIVE
    near = np.zeros(b, dtype=bool)
    if np.any(stuck):
        near[stuck] = _min_distances(x[stuck]) < 1e-4
    status[stuck & near] = _ST_COLLIDED
    status[stuck & ~near] = _ST_DIVERGED
    return x, f, status


def _batch_solve(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(mats, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(rhs)
        for k in range(mats.shape[0]):
            try:
                out[k] = np.linalg.solve(mats[k], rhs[k])
            except np.linalg.LinAlgError:
                out[k] = np.linalg.lstsq(mats[k], rhs[k], rcond=None)[0]
        return out


def refine(model: PotentialModel, start: Configuration, max_iter: int = 160) -> Configuration:
    """Refine a start to a critical point; the input is returned unchanged
    if it already satisfies the convergence test.

    Raises NonConvergence after ``max_iter`` trial steps, or StepCollision
    when the iteration is driven into the collision set.
    """
    core._check_sizes(model, start)
    g = core.gradient_f(model, start)
    f = core.objective_f(model, start)
    if np.linalg.norm(g) < REFINE_GTOL_FACTOR * (1.0 + abs(f)):
        return start
    x, _, status = _refine_batch(
        model.exponent, model.mass_array(), model.total_mass,
        start.positions[None, :, :], max_iter,
    )
    if status[0] == _ST_COLLIDED:
        raise StepCollision("refinement stepped into the collision set")
    if status[0] != _ST_CONVERGED:
        raise NonConvergence(f"no convergence within {max_iter} iterations")
    return Configuration(x[0])


def canonical_frame(config: Configuration) -> Configuration:
    """Rotate so the body farthest from the origin lies on the positive x-axis.

    Ties break toward the smallest body index.  Purely cosmetic: shape
    signatures do not depend on this gauge.
    """
    pos = config.positions
    radii = np.linalg.norm(pos, axis=1)
    k = int(np.argmax(radii > np.max(radii) - 1e-12))
    angle = math.atan2(pos[k, 1], pos[k, 0])
    return config.rotated(-angle)


def _sorted_distances(pos: np.ndarray) -> np.ndarray:
    n = pos.shape[0]
    iu = np.triu_indices(n, 1)
    diff = pos[iu[0]] - pos[iu[1]]
    return np.sort(np.sqrt(np.sum(diff * diff, axis=1)))


def _isometry_permutations(
    pos_a: np.ndarray, pos_b: np.ndarray, tol: float, reflect: bool
) -> list[tuple[int, ...]]:
    """Permutations pi such that a direct isometry (after an optional
    reflection of A) maps a_i to b_pi(i) within tol."""
    n = pos_a.shape[0]
    a = pos_a - pos_a.mean(axis=0)
    b = pos_b - pos_b.mean(axis=0)
    if reflect:
        a = a * np.array([1.0, -1.0])
    ra = np.linalg.norm(a, axis=1)
    rb = np.linalg.norm(b, axis=1)
    anchor = int(np.argmax(ra))
    th_a = math.atan2(a[anchor, 1], a[anchor, 0])
    perms = []
    for cand in range(n):
        if abs(rb[cand] - ra[anchor]) > tol:
            continue
        th = math.atan2(b[cand, 1], b[cand, 0]) - th_a
        c, s = math.cos(th), math.sin(th)
        rotated = a @ np.array([[c, s], [-s, c]])
        perm = []
        used = set()
        for i in range(n):
            d = np.linalg.norm(b - rotated[i], axis=1)
            j = int(np.argmin(d))
            if d[j] > tol or j in used:
                perm = None
                break
            used.add(j)
            perm.append(j)
        if perm is not None:
            perms.append(tuple(perm))
    return perms


def symmetry_order(config: Configuration, tol: float = MATCH_TOL) -> int:
    """Number of body permutations realized by direct self-isometries."""
    pos = config.positions
    return len(_isometry_permutations(pos, pos, tol, reflect=False))


def is_achiral(config: Configuration, tol: float = MATCH_TOL) -> bool:
    """True when the mirror image matches the shape under a direct isometry."""
    pos = config.positions
    return bool(_isometry_permutations(pos, pos, tol, reflect=True))


def multiplicity(config: Configuration, tol: float = MATCH_TOL) -> tuple[int, int]:
    """Labeled-class multiplicity and symmetry order for equal masses.

    multiplicity = N! / symmetry_order, where the symmetry order counts
    permutations realized by direct isometries of the shape (v1 assumes
    interchangeable bodies, i.e. equal masses).
    """
    order = symmetry_order(config, tol)
    return math.factorial(config.n_bodies) // order, order


def canonical_signature(config: Configuration, tol: float = SIGNATURE_TOL) -> tuple:
    """Shape key invariant under translation, rotation and relabeling.

    The key is the sorted list of all N(N-1)/2 mutual distances rounded
    to ``tol``, plus a chirality mark: 0 for achiral shapes, else +/-1
    chosen canonically so mirror-image shapes get opposite marks.
    """
    pos = config.positions
    dists = _sorted_distances(pos)
    key = tuple(int(round(d / tol)) for d in dists)
    if is_achiral(config):
        mark = 0
    else:
        mark = 1 if _canonical_string(pos) <= _canonical_string(pos * [1.0, -1.0]) else -1
    return (key, mark)


def _canonical_string(pos: np.ndarray) -> tuple:
    """Lexicographically minimal rounded coordinate tuple over rotation gauges."""
    centered = pos - pos.mean(axis=0)
    best = None
    for k in range(pos.shape[0]):
        if np.linalg.norm(centered[k]) < 1e-9:
            continue
        angle = math.atan2(centered[k, 1], centered[k, 0])
        c, s = math.cos(angle), math.sin(angle)
        rotated = centered @ np.array([[c, -s], [s, c]])
        rows = sorted(
            tuple(int(round(v / SIGNATURE_TOL)) for v in row) for row in rotated
        )
        flat = tuple(x for row in rows for x in row)
        if best is None or flat < best:
            best = flat
    return best if best is not None else ()


def classify(model: PotentialModel, config: Configuration) -> CriticalPoint:
    """Build the full CriticalPoint record for a converged configuration.

    The Morse index counts eigenvalues below the zero band; one zero
    (the rotation mode) is expected and discarded, and two or more
    eigenvalues in the band set the degenerate flag.
    """
    core._check_sizes(model, config)
    if len(set(model.masses)) != 1:
        raise ValueError("classification assumes equal masses (v1 restriction)")
    f = core.objective_f(model, config)
    g = core.gradient_f(model, config)
    if np.linalg.norm(g) >= core.GRADIENT_ZERO_FACTOR * (1.0 + abs(f)):
        raise ValueError(
            f"configuration is not critical (|g| = {np.linalg.norm(g):.3e})"
        )
    canon = canonical_frame(config)
    eigs = core.symmetric_eigenvalues(core.hessian_f(model, canon))
    spectrum = core.analyze_spectrum(eigs)
    mult, order = multiplicity(canon)
    return CriticalPoint(
        configuration=canon,
        f_value=f,
        eigenvalues=spectrum.eigenvalues,
        morse_index=spectrum.negative_count,
        degenerate=spectrum.zero_count != 1,
        signature=canonical_signature(canon),
        multiplicity=mult,
        symmetry_order=order,
    )


def default_annulus(n: int) -> tuple[float, float]:
    """Start annulus [0.2, 1.5 / (2 sin(pi/N))] bracketing the known classes."""
    return 0.2, 1.5 / (2.0 * math.sin(math.pi / n))


def survey(
    model: PotentialModel,
    n_starts: int,
    seed: int,
    r_min: float | None = None,
    r_max: float | None = None,
    max_iter: int = 160,
    workers: int = 1,
) -> SurveyResult:
    """Multi-start census of the critical points of f.

    Start k draws from ``random_start(seed + k, ...)``; converged starts
    are deduplicated by canonical signature (with an isometry-match merge
    pass), classified once per class, and sorted by
    (morse_index, f_value, signature).  Output is deterministic in
    (model, n_starts, seed) and independent of ``workers``.
    """
    if n_starts < 1:
        raise ValueError("need n_starts >= 1")
    if len(set(model.masses)) != 1:
        raise ValueError("survey assumes equal masses (v1 restriction)")
    n = model.n_bodies
    lo, hi = default_annulus(n)
    r_min = lo if r_min is None else r_min
    r_max = hi if r_max is None else r_max
    starts = np.stack(
        [random_start(seed + k, n, r_min, r_max).positions for k in range(n_starts)]
    )
    m = model.mass_array()
    chunks = _split_chunks(n_starts, max(1, workers))
    if len(chunks) == 1:
        results = [_refine_batch(model.exponent, m, model.total_mass, starts, max_iter)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(
                pool.map(
                    lambda se: _refine_batch(
                        model.exponent, m, model.total_mass, starts[se[0] : se[1]], max_iter
                    ),
                    chunks,
                )
            )
    x = np.concatenate([r[0] for r in results])
    status = np.concatenate([r[2] for r in results])
    converged = int(np.sum(status == _ST_CONVERGED))
    collided = int(np.sum(status == _ST_COLLIDED))
    diverged = int(n_starts - converged - collided)

    reps: dict[tuple, Configuration] = {}
    for k in np.where(status == _ST_CONVERGED)[0]:
        cfg = Configuration(x[k])
        sig = canonical_signature(cfg)
        if sig not in reps:
            reps[sig] = cfg
    merged = _merge_equivalent(list(reps.values()))
    classes = sorted(
        (classify(model, cfg) for cfg in merged),
        key=lambda cp: (cp.morse_index, cp.f_value, cp.signature),
    )
    return SurveyResult(tuple(classes), converged, diverged, collided)


def _split_chunks(total: int, workers: int) -> list[tuple[int, int]]:
    size = (total + workers - 1) // workers
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def _merge_equivalent(configs: list[Configuration]) -> list[Configuration]:
    """Collapse representatives whose shapes match under a direct isometry.

    Signature rounding can split one class across a grid boundary; this
    pass re-merges such pairs (first representative wins).
    """
    kept: list[Configuration] = []
    for cfg in configs:
        d = _sorted_distances(cfg.positions)
        duplicate = False
        for other in kept:
            d2 = _sorted_distances(other.positions)
            if np.max(np.abs(d - d2)) < 3.0 * SIGNATURE_TOL and _isometry_permutations(
                cfg.positions, other.positions, MATCH_TOL, reflect=False
            ):
                duplicate = True
                break
        if not duplicate:
            kept.append(cfg)
    return kept


def merge_censuses(
    base: list[CriticalPoint] | tuple[CriticalPoint, ...],
    extra: list[CriticalPoint] | tuple[CriticalPoint, ...],
) -> tuple[CriticalPoint, ...]:
    """Union of two censuses, deduplicated by shape (base entries win)."""
    out = list(base)
    for cp in extra:
        dup = False
        for existing in out:
            da = _sorted_distances(cp.configuration.positions)
            db = _sorted_distances(existing.configuration.positions)
            if da.shape == db.shape and np.max(np.abs(da - db)) < 3.0 * SIGNATURE_TOL:
                if _isometry_permutations(
                    cp.configuration.positions,
                    existing.configuration.positions,
                    MATCH_TOL,
                    reflect=False,
                ):
                    dup = True
                    break
        if not dup:
            out.append(cp)
    return tuple(
        sorted(out, key=lambda cp: (cp.morse_index, cp.f_value, cp.signature))
    )
