"""Analytic operator family of the frozen corner problem and its discretization.

For each angle the second-order principal part, written in polar coordinates
and restricted to fields r^{i*lam} * phi(omega), becomes an ordinary
differential operator in omega whose coefficients are trigonometric in omega
and polynomial in (i*lam).  Together with one trace row per side this yields
a square lam-analytic matrix family M_n(lam) on a Chebyshev-Lobatto grid of n
points per angle; lam is an eigenvalue of the continuous family exactly when
det M_n(lam) -> 0 stably under grid refinement.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .config import SideId, ValidatedConfig, validate
from .errors import BadGridSize, ExactSingular, NonElliptic

_CACHE_LOCK = threading.Lock()


def chebyshev_lobatto(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Ascending Chebyshev-Lobatto nodes on [-1, 1] and the differentiation matrix."""
    if n < 2:
        raise BadGridSize(f"need at least 2 nodes, got {n}")
    k = np.arange(n)
    x = -np.cos(np.pi * k / (n - 1))
    c = np.ones(n)
    c[0] = 2.0
    c[-1] = 2.0
    c = c * (-1.0) ** k
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    d -= np.diag(d.sum(axis=1))
    return x, d


def lobatto_barycentric_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def barycentric_row(nodes: np.ndarray, weights: np.ndarray, t: float) -> np.ndarray:
    """Row vector evaluating a nodal interpolant at t (second barycentric form)."""
    diff = t - nodes
    hit = np.where(np.abs(diff) < 1e-14 * max(1.0, abs(t)))[0]
    row = np.zeros(len(nodes))
    if hit.size:
        row[hit[0]] = 1.0
        return row
    r = weights / diff
    return r / r.sum()


@dataclass(frozen=True)
class MellinSymbol:
    """Coefficients of the polar-coordinate form of one frozen principal part.

    The operator is c20(w) d^2/dw^2 + (c11(w) il + c10(w)) d/dw
    + c02(w) il^2 + c01(w) il, where il stands for i*lam.  All coefficients
    derive from the direction symbol q(w) = a11 cos^2 w + 2 a12 cos w sin w
    + a22 sin^2 w:

        c02 = q(w),  c20 = q(w + pi/2),  c11 = q'(w),
        c01 = q''(w) / 2,  c10 = -q'(w).
    """

    a11: complex
    a12: complex
    a22: complex

    def q(self, omega):
        c, s = np.cos(omega), np.sin(omega)
        return self.a11 * c * c + 2.0 * self.a12 * c * s + self.a22 * s * s

    def q_prime(self, omega):
        return (self.a22 - self.a11) * np.sin(2.0 * omega) + 2.0 * self.a12 * np.cos(2.0 * omega)

    def coefficients(self, omega):
        """Arrays (c20, c11, c10, c02, c01) sampled at omega."""
        omega = np.asarray(omega, dtype=float)
        qp = self.q_prime(omega)
        qpp_half = (self.a22 - self.a11) * np.cos(2.0 * omega) - 2.0 * self.a12 * np.sin(2.0 * omega)
        return self.q(omega + 0.5 * np.pi), qp, -qp, self.q(omega), qpp_half

    def apply(self, phi, dphi, d2phi, omega, ilam: complex):
        """Apply the operator to sampled (phi, phi', phi'') at the given angles."""
        c20, c11, c10, c02, c01 = self.coefficients(omega)
        return c20 * d2phi + (c11 * ilam + c10) * dphi + (c02 * ilam * ilam + c01 * ilam) * phi


def mellin_symbol(a_matrix) -> MellinSymbol:
    """Polar-coordinate operator coefficients for a symmetric 2x2 principal part."""
    arr = np.asarray(a_matrix, dtype=complex)
    if arr.shape == (3,):
        a11, a12, a22 = arr
    else:
        a11, a12, a22 = arr[0, 0], arr[0, 1], arr[1, 1]
    from .config import _has_real_characteristic_zero

    if _has_real_characteristic_zero(a11, a12, a22):
        raise NonElliptic("coefficient matrix has a real characteristic zero")
    return MellinSymbol(complex(a11), complex(a12), complex(a22))


@dataclass(frozen=True)
class BoundaryEntry:
    """One addend of a trace row: weight * e^{i lam log_homothety} * row(target)."""

    target: int          # 1-based angle index k
    theta: float         # evaluation angle inside (-omega_k, omega_k], radians
    weight: complex      # coefficient value at the vertex
    log_homothety: float
    row: np.ndarray      # interpolation row on the target grid


class DiscretizedPencil:
    """Grid data and assembler for the matrix family of one validated config."""

    def __init__(self, config: ValidatedConfig, n: int):
        if n < 8 or n % 2 != 0:
            raise BadGridSize(f"grid size must be even and >= 8, got {n}")
        self.config = config
        self.n = n
        self.n_angles = config.n_angles
        self.dim = n * config.n_angles

        x, d = chebyshev_lobatto(n)
        self._bary_w = lobatto_barycentric_weights(n)
        self._x = x

        self.nodes: list[np.ndarray] = []
        self.d1: list[np.ndarray] = []
        self.d2: list[np.ndarray] = []
        self.symbols: list[MellinSymbol] = []
        self._coeffs: list[tuple] = []
        for j in range(1, config.n_angles + 1):
            omega_j = config.angle(j)
            self.nodes.append(omega_j * x)
            d1 = d / omega_j
            self.d1.append(d1)
            self.d2.append(d1 @ d1)
            sym = mellin_symbol(config.principal_part(j))
            self.symbols.append(sym)
            self._coeffs.append(sym.coefficients(omega_j * x))

        # One trace row per side, built once; lam enters only through scalar
        # factors e^{i lam ln chi}, so M_n(lam) is entire in lam.
        self.boundary_rows: dict[SideId, list[BoundaryEntry]] = {}
        for side in config.sides():
            entries = []
            for term in config.terms(side):
                theta = (-1.0) ** side.sigma * config.angle(side.j) + term.rotation
                row = barycentric_row(self.nodes[term.target - 1], self._bary_w, theta)
                entries.append(
                    BoundaryEntry(
                        target=term.target,
                        theta=theta,
                        weight=term.coeff0,
                        log_homothety=math.log(term.homothety),
                        row=row,
                    )
                )
            self.boundary_rows[side] = entries

    def _block_slice(self, j: int) -> slice:
        start = (j - 1) * self.n
        return slice(start, start + self.n)

    def _boundary_row_index(self, side: SideId) -> int:
        # sigma=1 is the node at -omega_j (grid start), sigma=2 at +omega_j (end)
        base = (side.j - 1) * self.n
        return base if side.sigma == 1 else base + self.n - 1

    def matrix(self, lam: complex) -> np.ndarray:
        il = 1j * lam
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(1, self.n_angles + 1):
            c20, c11, c10, c02, c01 = self._coeffs[j - 1]
            block = c20[:, None] * self.d2[j - 1] + (c11 * il + c10)[:, None] * self.d1[j - 1]
            diag = c02 * il * il + c01 * il
            block[np.arange(self.n), np.arange(self.n)] += diag
            sl = self._block_slice(j)
            m[sl, sl] = block
        for side, entries in self.boundary_rows.items():
            i = self._boundary_row_index(side)
            m[i, :] = 0.0
            for e in entries:
                factor = e.weight * cmath.exp(il * e.log_homothety)
                m[i, self._block_slice(e.target)] += factor * e.row
        return m

    def derivative(self, lam: complex) -> np.ndarray:
        il = 1j * lam
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(1, self.n_angles + 1):
            c20, c11, c10, c02, c01 = self._coeffs[j - 1]
            block = (1j * c11)[:, None] * self.d1[j - 1]
            diag = 2j * il * c02 + 1j * c01
            block[np.arange(self.n), np.arange(self.n)] += diag
            sl = self._block_slice(j)
            m[sl, sl] = block
        for side, entries in self.boundary_rows.items():
            i = self._boundary_row_index(side)
            m[i, :] = 0.0
            for e in entries:
                factor = e.weight * (1j * e.log_homothety) * cmath.exp(il * e.log_homothety)
                if factor != 0.0:
                    m[i, self._block_slice(e.target)] += factor * e.row
        return m

    def det_log(self, lam: complex) -> tuple[float, float]:
        return _det_log_of(self.matrix(lam))

    def interp_row(self, j: int, theta: float) -> np.ndarray:
        return barycentric_row(self.nodes[j - 1], self._bary_w, theta)


def _det_log_of(m: np.ndarray) -> tuple[float, float]:
    lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        raise ExactSingular("LU pivot exactly zero")
    logmag = float(np.sum(np.log(np.abs(diag))))
    if not np.isfinite(logmag):
        raise ExactSingular("determinant magnitude underflowed")
    swaps = int(np.sum(piv != np.arange(len(piv))))
    phase = float(np.sum(np.angle(diag))) + math.pi * (swaps % 2)
    phase = (phase + math.pi) % (2.0 * math.pi) - math.pi
    return logmag, phase


def discretize(config: ValidatedConfig, n: int) -> DiscretizedPencil:
    """Cached grid + assembler for (config, n)."""
    if not isinstance(config, ValidatedConfig):
        config = validate(config)
    with _CACHE_LOCK:
        pen = config._pencil_cache.get(n)
        if pen is None:
            pen = DiscretizedPencil(config, n)
            config._pencil_cache[n] = pen
        return pen


def assemble(config: ValidatedConfig, lam: complex, n: int) -> np.ndarray:
    """The n*N x n*N collocation matrix of the operator family at lam."""
    return discretize(config, n).matrix(lam)


def pencil_derivative(config: ValidatedConfig, lam: complex, n: int) -> np.ndarray:
    """Entrywise derivative in lam of :func:`assemble`."""
    return discretize(config, n).derivative(lam)


def det_log(config: ValidatedConfig, lam: complex, n: int) -> tuple[float, float]:
    """(log|det|, principal arg det) of the assembled matrix, via pivoted LU.

    The phase is only meaningful relative to nearby evaluations; callers
    tracking a path must unwrap it themselves.
    """
    return discretize(config, n).det_log(lam)
