"""Independent oracles used across the test suite.

Everything here is deliberately written against the mathematics, not against
the library: closed-form characteristic determinants built from the
cosh/sinh solution basis, dense-grid complex root finding, and plain
Cartesian finite differences.
"""

from __future__ import annotations

import cmath

import numpy as np


def dirichlet_band_roots(omega: float, c1: float = -1.0, c2: float = 0.0) -> list[complex]:
    """Roots of sinh(2 lam omega) = 0 with c1 <= Im lam < c2: lam = -i m pi / (2 omega)."""
    out = []
    m = 1
    while True:
        lam = -1j * m * np.pi / (2.0 * omega)
        if lam.imag < c1 - 1e-12:
            break
        if c1 - 1e-12 <= lam.imag < c2:
            out.append(lam)
        m += 1
    return out


def laplace_one_angle_char_det(omega: float, side_terms: dict[int, list[tuple[float, float, complex]]]):
    """Characteristic 2x2 determinant of a one-angle Laplacian problem.

    ``side_terms[sigma]`` lists (rotation, homothety, coeff) of the extra
    terms on side sigma; the identity term is implied.  The solution basis is
    {cosh(lam w), sinh(lam w)}, so the determinant vanishes exactly at the
    eigenvalues (spurious zero at lam = 0 where the basis degenerates).
    """

    def det(lam: complex) -> complex:
        rows = []
        for sigma in (1, 2):
            base = (-1.0) ** sigma * omega
            entries = [(0.0, 1.0, 1.0 + 0j)] + list(side_terms.get(sigma, []))
            c_coef = 0j
            s_coef = 0j
            for rotation, homothety, coeff in entries:
                theta = base + rotation
                w = coeff * cmath.exp(1j * lam * np.log(homothety))
                c_coef += w * cmath.cosh(lam * theta)
                s_coef += w * cmath.sinh(lam * theta)
            rows.append((c_coef, s_coef))
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]

    return det


def complex_secant(f, z0: complex, z1: complex, tol: float = 1e-13, max_iter: int = 80) -> complex | None:
    f0, f1 = f(z0), f(z1)
    for _ in range(max_iter):
        if f1 == f0:
            return None
        step = -f1 * (z1 - z0) / (f1 - f0)
        z0, f0 = z1, f1
        z1 = z1 + step
        f1 = f(z1)
        if abs(step) < tol:
            return z1
    return None


def grid_roots(f, rect, n_re: int = 200, n_im: int = 120, exclude_zero: bool = True) -> list[complex]:
    """Dense-grid minima of |f| refined by the complex secant method."""
    a, b, c, d = rect
    res = np.linspace(a, b, n_re)
    ims = np.linspace(c, d, n_im)
    vals = np.empty((n_re, n_im))
    for i, x in enumerate(res):
        for k, y in enumerate(ims):
            vals[i, k] = abs(f(complex(x, y)))
    roots: list[complex] = []
    floor = np.median(vals)
    for i in range(1, n_re - 1):
        for k in range(1, n_im - 1):
            window = vals[i - 1 : i + 2, k - 1 : k + 2]
            if vals[i, k] == window.min() and vals[i, k] < 0.2 * floor:
                z0 = complex(res[i], ims[k])
                root = complex_secant(f, z0, z0 + 1e-4 * (1 + 1j))
                if root is None or abs(f(root)) > 1e-9 * max(floor, 1.0):
                    continue
                if exclude_zero and abs(root) < 1e-8:
                    continue
                if not (a - 1e-6 <= root.real <= b + 1e-6 and c - 1e-6 <= root.imag <= d + 1e-6):
                    continue
                if all(abs(root - r) > 1e-7 for r in roots):
                    roots.append(root)
    return sorted(roots, key=lambda z: (z.real, z.imag))


def fd_second_derivatives(func, y1: float, y2: float, h: float):
    """(d11, d12, d22) of a complex field by fourth-order central differences."""
    c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    off2 = np.array([-2, -1, 0, 1, 2], dtype=float)
    c1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
    off1 = np.array([-2, -1, 1, 2], dtype=float)
    d11 = sum(c2[i] * func(y1 + off2[i] * h, y2) for i in range(5)) / h**2
    d22 = sum(c2[i] * func(y1, y2 + off2[i] * h) for i in range(5)) / h**2
    d12 = 0j
    for i in range(4):
        for k in range(4):
            d12 += c1[i] * c1[k] * func(y1 + off1[i] * h, y2 + off1[k] * h)
    d12 /= h**2
    return d11, d12, d22


def random_elliptic_matrix(rng: np.random.Generator, complex_coeffs: bool = True) -> np.ndarray:
    """Random strictly elliptic symmetric 2x2 matrix (positive-definite real
    part plus an imaginary perturbation small enough to keep ellipticity)."""
    while True:
        m = rng.normal(size=(2, 2))
        real = m @ m.T + 0.3 * np.eye(2)
        if complex_coeffs:
            imag = 0.2 * rng.normal(size=(2, 2))
            imag = 0.5 * (imag + imag.T)
            a = real + 1j * imag
        else:
            a = real.astype(complex)
        # reject if the direction symbol comes close to zero on a fine sweep
        w = np.linspace(0.0, np.pi, 720)
        q = (
            a[0, 0] * np.cos(w) ** 2
            + 2.0 * a[0, 1] * np.cos(w) * np.sin(w)
            + a[1, 1] * np.sin(w) ** 2
        )
        if np.min(np.abs(q)) > 0.05:
            return a


def random_valid_config(rng: np.random.Generator, n_angles: int | None = None, real_only: bool = False):
    """Small random nonlocal problem with mild coefficients (tame spectra)."""
    from corner_pencil.config import NonlocalTerm, orbit_config, validate

    n = n_angles or int(rng.integers(1, 3))
    angles = rng.uniform(0.3 * np.pi, 0.85 * np.pi, n)
    terms = {}
    for j in range(1, n + 1):
        for sigma in (1, 2):
            extra = []
            for _ in range(int(rng.integers(0, 2))):
                k = int(rng.integers(1, n + 1))
                target_pos = rng.uniform(-0.7, 0.7) * angles[k - 1]
                rotation = target_pos - (-1.0) ** sigma * angles[j - 1]
                coeff = complex(rng.uniform(-0.3, 0.3), 0.0 if real_only else rng.uniform(-0.2, 0.2))
                extra.append(
                    NonlocalTerm(
                        target=k,
                        rotation=float(rotation),
                        homothety=float(rng.uniform(0.5, 2.0)),
                        coeff0=coeff,
                    )
                )
            if extra:
                terms[(j, sigma)] = extra
    return validate(orbit_config(angles, None, terms, epsilon=1.0))
