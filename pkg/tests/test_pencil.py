import cmath

import numpy as np
import pytest

from corner_pencil.config import NonlocalTerm, orbit_config, validate
from corner_pencil.errors import BadGridSize, NonElliptic
from corner_pencil.pencil import (
    assemble,
    barycentric_row,
    chebyshev_lobatto,
    det_log,
    discretize,
    lobatto_barycentric_weights,
    mellin_symbol,
    pencil_derivative,
)

from helpers import fd_second_derivatives, random_elliptic_matrix


def _identity_residual(a, lam, rng, n_points=10, modes=((1, 1.0),)):
    """Defining identity: r^{2-il} P(r^il phi(w)) == symbol applied to phi.

    ``modes`` lists (frequency, coefficient) pairs of phi(w) = sum c e^{ikw}.
    """
    sym = mellin_symbol(a)
    il = 1j * lam

    def phi(w):
        return sum(c * np.exp(1j * k * w) for k, c in modes)

    def dphi(w):
        return sum(1j * k * c * np.exp(1j * k * w) for k, c in modes)

    def d2phi(w):
        return sum(-(k**2) * c * np.exp(1j * k * w) for k, c in modes)

    def field(y1, y2):
        r = np.hypot(y1, y2)
        w = np.arctan2(y2, y1)
        return np.exp(il * np.log(r)) * phi(w)

    worst = 0.0
    for _ in range(n_points):
        r = rng.uniform(0.5, 2.0)
        w = rng.uniform(-1.2, 1.2)
        h = 1e-3 * r
        d11, d12, d22 = fd_second_derivatives(field, r * np.cos(w), r * np.sin(w), h)
        lhs = np.exp((2.0 - il) * np.log(r)) * (a[0, 0] * d11 + 2.0 * a[0, 1] * d12 + a[1, 1] * d22)
        rhs = sym.apply(phi(w), dphi(w), d2phi(w), w, il)
        worst = max(worst, abs(lhs - rhs))
    return worst


def test_chebyshev_differentiation_matrix():
    x, d = chebyshev_lobatto(24)
    assert np.max(np.abs(d @ x**4 - 4.0 * x**3)) < 1e-11
    assert np.max(np.abs(d @ np.sin(x) - np.cos(x))) < 1e-12


def test_barycentric_row_exactness():
    n = 32
    x, _ = chebyshev_lobatto(n)
    w = lobatto_barycentric_weights(n)
    f = np.exp(np.sin(2.0 * x))
    for t in (-0.9713, -0.25, 0.0, 0.33337, 0.98):
        row = barycentric_row(x, w, t)
        assert abs(row @ f - np.exp(np.sin(2.0 * t))) < 1e-12
    hit = barycentric_row(x, w, x[5])
    assert hit[5] == 1.0 and np.sum(np.abs(hit)) == 1.0


def test_laplacian_symbol_closed_form():
    sym = mellin_symbol(np.eye(2, dtype=complex))
    w = np.linspace(-1.0, 1.0, 7)
    c20, c11, c10, c02, c01 = sym.coefficients(w)
    assert np.allclose(c20, 1.0) and np.allclose(c02, 1.0)
    assert np.allclose(c11, 0.0) and np.allclose(c10, 0.0) and np.allclose(c01, 0.0)


def test_symbol_identity_diagonal():
    rng = np.random.default_rng(1)
    a = np.diag([1.0, 4.0]).astype(complex)
    assert _identity_residual(a, 0.3 - 0.7j, rng) < 1e-6


def test_symbol_identity_complex():
    rng = np.random.default_rng(2)
    a = np.array([[1.0, 0.5j], [0.5j, 1.0]])
    assert _identity_residual(a, 0.3 - 0.7j, rng) < 1e-6


def test_symbol_identity_random_matrices():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = random_elliptic_matrix(rng)
        lam = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        modes = tuple(
            (int(k), complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
            for k in rng.choice([-2, -1, 1, 2, 3], size=2, replace=False)
        )
        assert _identity_residual(a, lam, rng, n_points=3, modes=modes) < 1e-6


def test_symbol_rejects_non_elliptic():
    with pytest.raises(NonElliptic):
        mellin_symbol(np.diag([1.0, -1.0]).astype(complex))


def test_assemble_grid_size_checks():
    cfg = validate(orbit_config([np.pi / 2]))
    with pytest.raises(BadGridSize):
        assemble(cfg, -0.5j, 47)
    with pytest.raises(BadGridSize):
        assemble(cfg, -0.5j, 6)


def test_dirichlet_determinant_zero_at_eigenvalue():
    cfg = validate(orbit_config([np.pi / 2]))
    at_eig, _ = det_log(cfg, -1j, 48)
    away, _ = det_log(cfg, -0.5j, 48)
    # determinant collapses by many orders at the eigenvalue
    assert at_eig < away - 10.0 * np.log(10.0)


def test_determinant_stable_away_from_spectrum():
    cfg = validate(orbit_config([np.pi / 4]))
    v48, _ = det_log(cfg, -0.5j, 48)
    v96, _ = det_log(cfg, -0.5j, 96)
    # both grids agree that the point is regular; scale grows with n, so
    # compare the gap to the eigenvalue dip instead of raw values
    e48, _ = det_log(cfg, -2j, 48)
    e96, _ = det_log(cfg, -2j, 96)
    assert v48 - e48 > 10.0 and v96 - e96 > 10.0


def test_nonzero_determinant_survives_refinement():
    cfg = validate(orbit_config([np.pi / 2]))
    for n in (48, 96):
        logmag, _ = det_log(cfg, -0.5j, n)
        assert np.isfinite(logmag)


def test_pencil_derivative_matches_finite_difference():
    cfg = validate(
        orbit_config(
            [np.pi / 2],
            terms={(1, 1): [NonlocalTerm(target=1, rotation=np.pi / 2, homothety=0.5, coeff0=-0.5)]},
        )
    )
    lam = -0.4 - 0.6j
    h = 1e-5
    mp = pencil_derivative(cfg, lam, 48)
    fd = (assemble(cfg, lam + h, 48) - assemble(cfg, lam - h, 48)) / (2.0 * h)
    # the difference quotient carries cancellation noise ~ eps * |M| / h from
    # the large interior entries; the analytic derivative must sit inside it
    noise = 50.0 * np.finfo(float).eps * np.max(np.abs(assemble(cfg, lam, 48))) / h
    assert np.max(np.abs(mp - fd)) < max(noise, 1e-9)


def test_identity_boundary_entry_has_zero_derivative():
    cfg = validate(orbit_config([np.pi / 2]))
    mp = pencil_derivative(cfg, -0.3 - 0.4j, 48)
    pen = discretize(cfg, 48)
    for side, idx in ((1, 0), (2, 47)):
        assert np.max(np.abs(mp[idx, :])) == 0.0  # ln(1) = 0 kills the trace rows


def test_laplacian_interior_derivative_diagonal():
    cfg = validate(orbit_config([np.pi / 2]))
    lam = 0.7 - 0.2j
    mp = pencil_derivative(cfg, lam, 48)
    # interior rows of the Laplacian block: derivative of (i lam)^2 is -2 lam
    assert abs(mp[5, 5] - (-2.0 * lam)) < 1e-12
    assert abs(mp[20, 21]) < 1e-12


def test_conjugate_symmetry_real_coefficients():
    cfg = validate(
        orbit_config(
            [0.6 * np.pi],
            terms={(1, 2): [NonlocalTerm(target=1, rotation=-0.4 * np.pi, homothety=1.7, coeff0=0.3)]},
        )
    )
    rng = np.random.default_rng(5)
    for _ in range(6):
        lam = complex(rng.uniform(-2, 2), rng.uniform(-1, 0))
        lm1, ph1 = det_log(cfg, lam, 48)
        lm2, ph2 = det_log(cfg, -lam.conjugate(), 48)
        assert abs(lm1 - lm2) < 1e-8 * max(1.0, abs(lm1))
        diff = (ph1 + ph2 + np.pi) % (2.0 * np.pi) - np.pi
        assert abs(diff) < 1e-6


def test_boundary_row_exactness():
    cfg = validate(
        orbit_config(
            [np.pi / 2],
            terms={(1, 1): [NonlocalTerm(target=1, rotation=np.pi / 2, homothety=0.5, coeff0=-0.5)]},
        )
    )
    n = 48
    pen = discretize(cfg, n)
    lam = -0.3 - 0.8j
    m = pen.matrix(lam)
    phi = np.exp(1j * pen.nodes[0]) * np.cos(pen.nodes[0])
    row = m[0, :]  # side (1,1) trace row
    applied = row @ phi

    def smooth(w):
        return np.exp(1j * w) * np.cos(w)

    expected = smooth(-np.pi / 2) + (-0.5) * cmath.exp(1j * lam * np.log(0.5)) * smooth(0.0)
    assert abs(applied - expected) < 1e-10


def test_located_eigenvalue_spectral_convergence():
    from corner_pencil.spectrum import BandQuery, locate_eigenvalues

    cfg = validate(
        orbit_config(
            [np.pi / 2],
            terms={(1, 1): [NonlocalTerm(target=1, rotation=np.pi / 2, homothety=0.5, coeff0=-0.5)]},
        )
    )
    res48 = locate_eigenvalues(cfg, BandQuery(n=48))
    res96 = locate_eigenvalues(cfg, BandQuery(n=96))
    assert len(res48.records) == len(res96.records) == 1
    assert abs(res48.records[0].lam0 - res96.records[0].lam0) < 1e-9
