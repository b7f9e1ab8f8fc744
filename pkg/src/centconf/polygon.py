"""Spectral theory of the equal-mass regular N-gon central configuration.

The Hessian of f at the regular polygon is block circulant in polar
coordinates, so it diagonalizes over the discrete Fourier frequencies
i = 0..N-1 into 2x2 blocks with real diagonal entries (P_i, Q_i) and a
purely imaginary off-diagonal entry with magnitude s_i.  Two bases are
relevant and both are provided:

* ``block_diagonals`` evaluates the classical half-range closed forms
  for (P_i, Q_i, s_i) in plain polar coordinates.  At the vortex
  exponent A = 2 these reduce exactly to the rational values
  ``vortex_closed_forms`` (integer Q_i, rational P_i).

* ``eigenvalue_pair`` returns eigenvalues of the Hessian in the
  Cartesian (orthonormal local frame) basis, i.e. the same numbers a
  dense eigensolve of ``core.hessian_f`` at the polygon produces.  The
  polar theta-rows scale by the radius, so the Cartesian blocks are
  (P_i, Q_i / r^2, s_i / r) built from the full circulant sums (for even
  N the half-range closed form for Q_i drops the diameter term
  r^(2-A) 2^(-A) (1 - (-1)^i), which the full sums include).

Signs, degeneracies, Morse indices and the bifurcation exponents A_N
are identical in the two bases; only eigenvalue magnitudes differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Configuration, ConvergenceError

# Default scan grid for auto-bracketing the sign change of lambda_(N,2,-).
BRACKET_SCAN_LO = 2.0 + 1e-6
BRACKET_SCAN_HI = 40.0
BRACKET_SCAN_STEP = 0.25

# A second eigenvalue within 1e-9 * max(1, lambda_max) of zero marks the
# polygon spectrum as degenerate (one rotation zero is always expected).
DEGENERACY_FACTOR = 1e-9


@dataclass(frozen=True)
class PolygonSpectrum:
    """Per-frequency diagonals and eigenvalue pairs of the polygon Hessian.

    ``diagonals[i]`` holds the polar-coordinate closed-form triple
    (P_i, Q_i, s_i); ``pairs[i]`` holds (lambda_plus, lambda_minus) in
    the Cartesian frame.
    """

    n_bodies: int
    exponent: float
    radius: float
    diagonals: tuple[tuple[float, float, float], ...]
    pairs: tuple[tuple[float, float], ...]


def unit_polygon_distance(n: int, j: int) -> float:
    """Distance 2 sin(pi j / n) between vertices 0 and j of the unit N-gon."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 1 <= j <= n - 1:
        raise ValueError(f"offset j must be in 1..{n - 1}, got {j}")
    return 2.0 * math.sin(math.pi * j / n)


def _unit_distances(n: int) -> np.ndarray:
    return 2.0 * np.sin(np.pi * np.arange(1, n) / n)


def polygon_radius(n: int, a: float) -> float:
    """Critical radius of the equal-mass regular N-gon.

    r = (sum_{j=1}^{N-1} u_j^(2-A) / (2N))^(1/A); increases with A
    toward 1/(2 sin(pi/N)) and equals sqrt((N-1)/(2N)) at A = 2.
    """
    _validate_na(n, a)
    u = _unit_distances(n)
    return float((np.sum(u ** (2.0 - a)) / (2.0 * n)) ** (1.0 / a))


def limiting_radius(n: int) -> float:
    """Large-A limit of the polygon radius, where nearest neighbours sit at distance 1."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 1.0 / (2.0 * math.sin(math.pi / n))


def polygon_configuration(n: int, a: float) -> Configuration:
    """The critical regular N-gon, body i at angle 2 pi i / N."""
    r = polygon_radius(n, a)
    th = 2.0 * np.pi * np.arange(n) / n
    return Configuration(np.column_stack([r * np.cos(th), r * np.sin(th)]))


def _validate_na(n: int, a: float, i: int | None = None) -> None:
    if n < 2:
        raise ValueError("need n >= 2")
    if not a >= 2.0:
        raise ValueError(f"exponent must be >= 2, got {a}")
    if i is not None and not 0 <= i <= n - 1:
        raise ValueError(f"frequency index must be in 0..{n - 1}, got {i}")


def block_diagonals(n: int, a: float, i: int) -> tuple[float, float, float]:
    """Half-range closed forms for the polar block diagonals (P_i, Q_i, s_i).

    s_i is the imaginary part of the off-diagonal entry, so the block
    determinant is P_i Q_i - s_i^2.  At a = 2 these values coincide with
    ``vortex_closed_forms`` for every n and i.
    """
    _validate_na(n, a, i)
    r = polygon_radius(n, a)
    half = (n - 1) // 2
    j = np.arange(1, half + 1)
    u = 2.0 * np.sin(np.pi * j / n)
    ci = np.cos(2.0 * np.pi * i * j / n)
    si = np.sin(2.0 * np.pi * i * j / n)
    cj = np.cos(2.0 * np.pi * j / n)
    sj = np.sin(2.0 * np.pi * j / n)
    ua = u ** (-a)
    p = float(r ** (-a) * np.sum(ua * (u * u * (a / 2.0 + 1.0 + (a / 2.0 - 1.0) * ci) - 2.0 + 2.0 * ci)))
    if n % 2 == 0:
        p += (2.0 * r) ** (-a) * ((-1.0) ** i * (a - 1.0) + (a + 1.0))
    q = float(2.0 * r ** (2.0 - a) * np.sum(ua * (1.0 - ci) * ((a - 2.0) / 2.0 * (1.0 + cj) + 1.0)))
    s = float(r ** (1.0 - a) * (a - 2.0) * np.sum(si * sj * ua))
    return p, q, s


def _circulant_rows(n: int, a: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First rows of the polar Hessian blocks R (rr), T (tt), W (rt)."""
    r = polygon_radius(n, a)
    j = np.arange(1, n)
    u = _unit_distances(n)
    ua = u ** (-a)
    rrow = np.zeros(n)
    trow = np.zeros(n)
    wrow = np.zeros(n)
    rrow[1:] = r ** (-a) * ua * (u * u * (a - 2.0) / 4.0 + 1.0)
    rrow[0] = r ** (-a) * np.sum(ua * (u * u * (a / 4.0 + 0.5) - 1.0))
    trow[1:] = r ** (2.0 - a) * ua * ((1.0 - u * u / 2.0) - a * (1.0 - u * u / 4.0))
    trow[0] = -np.sum(trow[1:])
    wrow[1:] = r ** (1.0 - a) * (a / 2.0 - 1.0) * ua * np.sin(2.0 * np.pi * j / n)
    return rrow, trow, wrow


def _dft_diagonals(n: int, a: float, i: int) -> tuple[float, float, float]:
    """Exact circulant diagonals (P_i, Q_i, s_i) via full DFT sums.

    Identical to ``block_diagonals`` except that for even n the Q_i sum
    keeps the diameter term, which the half-range closed form omits.
    """
    rrow, trow, wrow = _circulant_rows(n, a)
    j = np.arange(n)
    c = np.cos(2.0 * np.pi * i * j / n)
    s = np.sin(2.0 * np.pi * i * j / n)
    return float(rrow @ c), float(trow @ c), float(wrow @ s)


def eigenvalue_pair(n: int, a: float, i: int) -> tuple[float, float]:
    """Eigenvalue pair (lambda_plus, lambda_minus) of frequency block i.

    Computed in the Cartesian frame so the 2N values over all i agree
    with a dense symmetric eigensolve of core.hessian_f at the polygon.
    lambda_(n,0,-) = 0 (rotation mode) and lambda_(n,0,+) = N*A exactly.
    """
    _validate_na(n, a, i)
    r = polygon_radius(n, a)
    p, q, s = _dft_diagonals(n, a, i)
    q /= r * r
    s /= r
    disc = math.sqrt((p - q) ** 2 + 4.0 * s * s)
    return 0.5 * (p + q + disc), 0.5 * (p + q - disc)


def vortex_closed_forms(n: int, i: int) -> tuple[Fraction, Fraction]:
    """Exact rational (P_i, Q_i) of the polygon at the vortex exponent A = 2.

    P_i = (2 - i) N + (i^2 - i) N / (N - 1) and Q_i = floor(i N / 2 - i^2 / 2);
    the off-diagonal s_i vanishes identically at A = 2.
    """
    _validate_na(n, 2.0, i)
    p = Fraction((2 - i) * n, 1) + Fraction((i * i - i) * n, n - 1)
    q = Fraction((i * n - i * i) // 2, 1)
    return p, q


def polygon_spectrum(n: int, a: float) -> PolygonSpectrum:
    _validate_na(n, a)
    diags = tuple(block_diagonals(n, a, i) for i in range(n))
    pairs = tuple(eigenvalue_pair(n, a, i) for i in range(n))
    return PolygonSpectrum(n, float(a), polygon_radius(n, a), diags, pairs)


def polygon_eigenvalues(n: int, a: float) -> np.ndarray:
    """All 2N Cartesian-frame eigenvalues of the polygon Hessian, ascending."""
    pairs = [eigenvalue_pair(n, a, i) for i in range(n)]
    return np.sort(np.array(pairs).reshape(-1))


def polygon_morse_index(n: int, a: float) -> tuple[int, bool]:
    """Morse index of the polygon on the rotation quotient, plus degeneracy flag.

    The index counts strictly negative eigenvalues across all frequency
    blocks; exactly one zero (the i = 0 rotation mode) is expected and
    excluded, and any additional eigenvalue inside the zero band flags
    the spectrum as degenerate.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    eigs = polygon_eigenvalues(n, a)
    tol = DEGENERACY_FACTOR * max(1.0, float(np.max(np.abs(eigs))))
    index = int(np.sum(eigs < -tol))
    zero_count = int(np.sum(np.abs(eigs) <= tol))
    return index, zero_count != 1


def lambda_two_minus(n: int, a: float) -> float:
    """The bifurcation-driving eigenvalue lambda_(n,2,-)."""
    if n < 5:
        raise ValueError("need n >= 5 for a frequency-2 bifurcation")
    return eigenvalue_pair(n, a, 2)[1]


def scan_sign_changes(
    n: int,
    a_min: float = BRACKET_SCAN_LO,
    a_max: float = BRACKET_SCAN_HI,
    step: float = BRACKET_SCAN_STEP,
) -> list[tuple[float, float]]:
    """Brackets [a, a+step] on which lambda_(n,2,-) changes sign."""
    out = []
    a = a_min
    prev = lambda_two_minus(n, a)
    while a < a_max:
        b = min(a + step, a_max)
        cur = lambda_two_minus(n, b)
        if prev == 0.0 or prev * cur < 0.0:
            out.append((a, b))
        a, prev = b, cur
    return out


def find_bifurcation(n: int, a_lo: float, a_hi: float, tol: float = 1e-10) -> float:
    """Bisect for the exponent A_N where lambda_(n,2,-) changes sign.

    If the supplied bracket carries no sign change, the scan grid
    [2 + 1e-6, 40] in steps of 0.25 is searched for one before failing.
    Deterministic; capped at 200 bisection iterations.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if not 2.0 <= a_lo < a_hi:
        raise ValueError("need 2 <= a_lo < a_hi")
    lo, hi = float(a_lo), float(a_hi)
    f_lo, f_hi = lambda_two_minus(n, lo), lambda_two_minus(n, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        brackets = scan_sign_changes(n)
        if not brackets:
            raise ConvergenceError(
                f"no sign change of lambda_({n},2,-) in the bracket or on the scan grid"
            )
        lo, hi = brackets[0]
        f_lo = lambda_two_minus(n, lo)
    for _ in range(200):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = lambda_two_minus(n, mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def pade_estimate(n: int) -> float:
    """Rational-fit estimate of the bifurcation exponent A_N, valid for 5 <= n <= 200."""
    if not 5 <= n <= 200:
        raise ValueError(f"estimate fitted for 5 <= n <= 200, got {n}")
    num = 2.0 * n**3 - 2.46 * n**2 + 0.713 * n - 91.5
    den = n**3 - 3.3 * n**2 - 17.17 * n + 58.5
    return num / den
