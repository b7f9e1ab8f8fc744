"""Interval-arithmetic certification of solution-free and bifurcation-free regions.

Outward rounding uses epsilon-inflation: after every primitive
operation the bounds are pushed outward by a factor (1 + 4u) plus an
additive 2*tiny, with u the double-precision unit roundoff.  This is a
documented rounding model (it covers the at-most-2-ulp error of the
underlying libm operations) rather than directed-rounding mode
switches; all soundness statements are relative to it.

The certified system is the Cartesian gradient of f.  Because f is
rotation invariant, solutions come in circles; callers isolate them by
working on the gauge slice y_0 = 0, x_0 >= 0 (pass a degenerate
interval for the y_0 coordinate).  ``exclude_box`` certifies that a box
contains no critical point; ``shary_full_rank`` certifies that every
member of an interval matrix has full rank, which rules out
bifurcations when applied to the interval Jacobian of the gradient
system with the exponent as an extra box coordinate.
"""

from __future__ import annotations

import math
import sys
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import CollisionError, PotentialModel

_U = sys.float_info.epsilon / 2.0   # unit roundoff 2^-53
_TINY = sys.float_info.min
_INFLATE = 1.0 + 4.0 * _U

SIGMA_MARGIN_FACTOR = 1e-8   # singular-value margin: factor * ||mid||_F


def _down(v: float) -> float:
    return v * _INFLATE - 2.0 * _TINY if v < 0.0 else v / _INFLATE - 2.0 * _TINY


def _up(v: float) -> float:
    return v / _INFLATE + 2.0 * _TINY if v < 0.0 else v * _INFLATE + 2.0 * _TINY


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0.0 or self.hi < 0.0

    def _inflated(self) -> "Interval":
        return Interval(_down(self.lo), _up(self.hi))

    def __add__(self, other) -> "Interval":
        o = _as_interval(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        return self + (-_as_interval(other))

    def __rsub__(self, other) -> "Interval":
        return _as_interval(other) + (-self)

    def __mul__(self, other) -> "Interval":
        o = _as_interval(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(_down(min(products)), _up(max(products)))

    __rmul__ = __mul__


def _as_interval(v) -> Interval:
    return v if isinstance(v, Interval) else Interval.point(float(v))


def square(x: Interval) -> Interval:
    """x^2 with the dependency handled (never negative)."""
    lo, hi = abs(x.lo), abs(x.hi)
    if lo > hi:
        lo, hi = hi, lo
    low = 0.0 if x.lo <= 0.0 <= x.hi else lo * lo
    return Interval(_down(low) if low > 0.0 else 0.0, _up(hi * hi))


def sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise ValueError(f"sqrt of interval containing negatives: [{x.lo}, {x.hi}]")
    lo = math.sqrt(x.lo)
    return Interval(_down(lo) if lo > 0.0 else 0.0, _up(math.sqrt(x.hi)))


def power(x: Interval, p) -> Interval:
    """x^p for a positive base interval; p may be a real or an Interval.

    Integer exponents additionally support bases containing zero or
    negatives (sign casework); non-integer exponents require lo > 0.
    """
    if isinstance(p, Interval):
        if x.lo <= 0.0:
            raise ValueError("interval exponent requires a strictly positive base")
        corners = [
            math.exp(q * math.log(b))
            for q in (p.lo, p.hi)
            for b in (x.lo, x.hi)
        ]
        # exp(q log b) amplifies roundoff by |q log b|; widen accordingly
        slack = 1e-14 * max(1.0, abs(min(corners)), abs(max(corners)))
        return Interval(_down(min(corners) - slack), _up(max(corners) + slack))
    p = float(p)
    if p == 0.0:
        return Interval(1.0, 1.0)
    if x.lo > 0.0:
        vals = (x.lo**p, x.hi**p)
        return Interval(_down(min(vals)), _up(max(vals)))
    if p == int(p) and p > 0:
        k = int(p)
        if k % 2 == 1:
            return Interval(_down(x.lo**k), _up(x.hi**k))
        m = max(abs(x.lo), abs(x.hi)) ** k
        low = 0.0 if x.lo <= 0.0 <= x.hi else min(abs(x.lo), abs(x.hi)) ** k
        return Interval(_down(low) if low > 0.0 else 0.0, _up(m))
    raise ValueError(
        f"power with exponent {p} requires a strictly positive base, got [{x.lo}, {x.hi}]"
    )


@dataclass(frozen=True)
class IntervalBox:
    """A product of coordinate intervals, optionally with an exponent interval.

    For N bodies the coordinates are ordered (x_0, y_0, ..., x_{N-1},
    y_{N-1}); a degenerate y_0 interval realizes the rotation gauge slice.
    """

    coords: tuple[Interval, ...]
    exponent: Interval | None = None

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise ValueError("box must have at least one coordinate")

    @classmethod
    def from_bounds(cls, bounds, exponent=None) -> "IntervalBox":
        coords = tuple(Interval(lo, hi) for lo, hi in bounds)
        exp = None if exponent is None else Interval(exponent[0], exponent[1])
        return cls(coords, exp)

    @property
    def n_bodies(self) -> int:
        if len(self.coords) % 2 != 0:
            raise ValueError("coordinate count is odd; not a planar body box")
        return len(self.coords) // 2

    def all_intervals(self) -> tuple[Interval, ...]:
        return self.coords + ((self.exponent,) if self.exponent is not None else ())

    def widest_axis(self) -> int:
        widths = [iv.width for iv in self.all_intervals()]
        return int(np.argmax(widths))

    def bisect(self, axis: int | None = None) -> tuple["IntervalBox", "IntervalBox"]:
        axis = self.widest_axis() if axis is None else axis
        ivs = list(self.all_intervals())
        target = ivs[axis]
        mid = target.mid
        left = Interval(target.lo, mid)
        right = Interval(mid, target.hi)
        def rebuild(repl):
            items = list(ivs)
            items[axis] = repl
            if self.exponent is not None:
                return IntervalBox(tuple(items[:-1]), items[-1])
            return IntervalBox(tuple(items))
        return rebuild(left), rebuild(right)

    def volume(self) -> float:
        """Product of the widths of the non-degenerate coordinates."""
        vol = 1.0
        for iv in self.all_intervals():
            if iv.width > 0.0:
                vol *= iv.width
        return vol

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([rng.uniform(iv.lo, iv.hi) if iv.width > 0 else iv.lo
                         for iv in self.coords])

    def bounds(self) -> list[list[float]]:
        return [[iv.lo, iv.hi] for iv in self.coords]


@dataclass(frozen=True)
class IntervalMatrix:
    """Matrix of intervals with midpoint and radius parts."""

    entries: tuple[tuple[Interval, ...], ...]
    mid: np.ndarray = field(init=False)
    rad: np.ndarray = field(init=False)

    def __post_init__(self):
        rows = tuple(tuple(e for e in row) for row in self.entries)
        if not rows or not rows[0]:
            raise ValueError("interval matrix must be nonempty")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("ragged interval matrix")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "mid", np.array([[e.mid for e in r] for r in rows]))
        object.__setattr__(self, "rad", np.array([[e.rad for e in r] for r in rows]))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])


@dataclass(frozen=True)
class ExclusionVerdict:
    excluded: bool
    component: int | None = None
    sign: int | None = None


@dataclass(frozen=True)
class SharyVerdict:
    full_rank: bool
    sigma_min_mid: float
    sigma_max_rad: float
    margin: float


@dataclass(frozen=True)
class PruneResult:
    excluded: tuple[IntervalBox, ...]
    unresolved: tuple[IntervalBox, ...]
    log: tuple[dict, ...]


def _box_exponent(model: PotentialModel, box: IntervalBox) -> Interval:
    return box.exponent if box.exponent is not None else Interval.point(model.exponent)


def _pair_geometry(box: IntervalBox):
    """Difference and squared-distance intervals for all body pairs.

    Raises CollisionError when any squared distance interval touches zero.
    """
    n = box.n_bodies
    qx = [box.coords[2 * i] for i in range(n)]
    qy = [box.coords[2 * i + 1] for i in range(n)]
    dx = {}
    dy = {}
    d2 = {}
    for i in range(n):
        for j in range(i + 1, n):
            ddx = qx[i] - qx[j]
            ddy = qy[i] - qy[j]
            dd2 = square(ddx) + square(ddy)
            if not dd2.lo > 0.0:
                raise CollisionError(f"box touches the collision set for pair ({i},{j})")
            dx[i, j] = ddx
            dy[i, j] = ddy
            d2[i, j] = dd2
    return qx, qy, dx, dy, d2


def _signed_pair(table, i, j, negate=False):
    v = table[(i, j)] if i < j else -table[(j, i)]
    return -v if negate else v


def interval_gradient(model: PotentialModel, box: IntervalBox) -> list[Interval]:
    """Componentwise enclosure of gradient_f over the box (length 2N)."""
    n = box.n_bodies
    if n != model.n_bodies:
        raise ValueError("box does not match the model's body count")
    a = _box_exponent(model, box)
    m = model.masses
    total = model.total_mass
    qx, qy, dx, dy, d2 = _pair_geometry(box)
    half_neg_a = a * (-0.5) if isinstance(a, Interval) else -0.5 * a
    out: list[Interval] = []
    for i in range(n):
        gx = total * m[i] * qx[i]
        gy = total * m[i] * qy[i]
        for j in range(n):
            if j == i:
                continue
            key = (i, j) if i < j else (j, i)
            rma = power(d2[key], half_neg_a)  # r^(-A)
            gx = gx - m[i] * m[j] * rma * _signed_pair(dx, i, j)
            gy = gy - m[i] * m[j] * rma * _signed_pair(dy, i, j)
        out.append(gx)
        out.append(gy)
    return out


def exclude_box(model: PotentialModel, box: IntervalBox) -> ExclusionVerdict:
    """Certify (under the rounding model) that no critical point lies in the box.

    Excluded only when some gradient component interval strictly
    excludes zero; the certifying component and its sign are reported.
    """
    grad = interval_gradient(model, box)
    for k, iv in enumerate(grad):
        if iv.excludes_zero():
            return ExclusionVerdict(True, k, 1 if iv.lo > 0.0 else -1)
    return ExclusionVerdict(False)


def interval_jacobian(
    model: PotentialModel, box: IntervalBox, drop_coords: tuple[int, ...] = ()
) -> IntervalMatrix:
    """Interval enclosure of the Jacobian of the gradient system over the box.

    ``drop_coords`` removes gauge-fixed coordinate columns (e.g. column 1
    for the y_0 = const slice), yielding a rectangular matrix whose full
    column rank excludes bifurcations inside the box.
    """
    n = box.n_bodies
    if n != model.n_bodies:
        raise ValueError("box does not match the model's body count")
    a = _box_exponent(model, box)
    m = model.masses
    total = model.total_mass
    _, _, dx, dy, d2 = _pair_geometry(box)
    dim = 2 * n
    zero = Interval.point(0.0)
    rows = [[zero] * dim for _ in range(dim)]
    neg_half_a = a * (-0.5) if isinstance(a, Interval) else -0.5 * a
    exp2 = (neg_half_a - 1.0) if isinstance(neg_half_a, Interval) else neg_half_a - 1.0
    for i in range(n):
        acc = [[zero, zero], [zero, zero]]
        for j in range(n):
            if j == i:
                continue
            key = (i, j) if i < j else (j, i)
            rma = power(d2[key], neg_half_a)        # r^(-A)
            rma2 = power(d2[key], exp2)             # r^(-A-2)
            ddx = _signed_pair(dx, i, j)
            ddy = _signed_pair(dy, i, j)
            mm = m[i] * m[j]
            bxx = mm * (rma - a * rma2 * square(ddx))
            byy = mm * (rma - a * rma2 * square(ddy))
            bxy = mm * (zero - a * rma2 * ddx * ddy)
            block = [[bxx, bxy], [bxy, byy]]
            for u in range(2):
                for v in range(2):
                    rows[2 * i + u][2 * j + v] = block[u][v]
                    acc[u][v] = acc[u][v] - block[u][v]
        for u in range(2):
            for v in range(2):
                diag = acc[u][v]
                if u == v:
                    diag = diag + total * m[i]
                rows[2 * i + u][2 * i + v] = diag
    keep = [c for c in range(dim) if c not in set(drop_coords)]
    return IntervalMatrix(tuple(tuple(row[c] for c in keep) for row in rows))


def _singular_values(mat: np.ndarray) -> np.ndarray:
    """Singular values via eigenvalues of the symmetrized product."""
    m = np.asarray(mat, dtype=float)
    gram = m.T @ m if m.shape[0] >= m.shape[1] else m @ m.T
    eigs = core.symmetric_eigenvalues(gram)
    return np.sqrt(np.clip(eigs, 0.0, None))


def shary_full_rank(m: IntervalMatrix, margin_factor: float = SIGMA_MARGIN_FACTOR) -> SharyVerdict:
    """Full-rank certificate sigma_max(rad) + margin < sigma_min(mid).

    The margin covers the eigensolver's computational error; the
    inequality itself is exact, so the strengthened form keeps the
    certificate sound under the rounding model.
    """
    smin = float(np.min(_singular_values(m.mid)))
    smax = float(np.max(_singular_values(m.rad)))
    margin = margin_factor * float(np.linalg.norm(m.mid))
    return SharyVerdict(smax + margin < smin, smin, smax, margin)


def branch_and_prune(
    model: PotentialModel,
    region: IntervalBox,
    max_depth: int,
    budget: int,
    mode: str = "gradient",
    drop_coords: tuple[int, ...] = (1,),
) -> PruneResult:
    """Deterministic bisection queue certifying solution-free sub-boxes.

    ``mode="gradient"`` excludes boxes whose gradient enclosure misses
    zero; ``mode="jacobian"`` excludes bifurcations via the Shary
    full-rank test on the interval Jacobian (gauge columns dropped).
    Boxes still unresolved at ``max_depth``, beyond the processing
    budget, or touching the collision set are returned as unresolved.
    """
    if budget < 1:
        return PruneResult((), (region,), ({"event": "budget_exhausted"},))
    if mode not in ("gradient", "jacobian"):
        raise ValueError(f"unknown mode {mode!r}")
    queue: deque[tuple[IntervalBox, int]] = deque([(region, 0)])
    excluded: list[IntervalBox] = []
    unresolved: list[IntervalBox] = []
    log: list[dict] = []
    processed = 0
    while queue:
        box, depth = queue.popleft()
        if processed >= budget:
            unresolved.append(box)
            continue
        processed += 1
        entry: dict = {"depth": depth, "bounds": box.bounds()}
        if box.exponent is not None:
            entry["exponent"] = [box.exponent.lo, box.exponent.hi]
        try:
            if mode == "gradient":
                verdict = exclude_box(model, box)
                certified = verdict.excluded
                if certified:
                    entry.update(verdict="excluded", component=verdict.component,
                                 sign=verdict.sign)
            else:
                sv = shary_full_rank(interval_jacobian(model, box, drop_coords))
                certified = sv.full_rank
                if certified:
                    entry.update(verdict="full_rank", sigma_min_mid=sv.sigma_min_mid,
                                 sigma_max_rad=sv.sigma_max_rad)
        except CollisionError:
            entry["verdict"] = "collision_domain"
            unresolved.append(box)
            log.append(entry)
            continue
        if certified:
            excluded.append(box)
        elif depth < max_depth:
            entry["verdict"] = "split"
            left, right = box.bisect()
            queue.append((left, depth + 1))
            queue.append((right, depth + 1))
        else:
            entry["verdict"] = "unknown"
            unresolved.append(box)
        if "verdict" not in entry:
            entry["verdict"] = "excluded" if certified else "unknown"
        log.append(entry)
    key = lambda b: tuple((iv.lo, iv.hi) for iv in b.all_intervals())
    return PruneResult(
        tuple(sorted(excluded, key=key)),
        tuple(sorted(unresolved, key=key)),
        tuple(log),
    )
