import numpy as np
import pytest

from corner_pencil.config import NonlocalTerm, orbit_config, validate
from corner_pencil.errors import NotAnEigenvalue
from corner_pencil.pencil import discretize
from corner_pencil.spectrum import (
    BandQuery,
    EigenvalueRecord,
    classify,
    count_zeros,
    eigenbasis,
    has_associated,
    locate_eigenvalues,
    polynomial_degree_test,
)

from helpers import (
    dirichlet_band_roots,
    grid_roots,
    laplace_one_angle_char_det,
    random_valid_config,
)


def _dirichlet(omega):
    return validate(orbit_config([omega]))


def _jordan_config():
    """One-angle problem tuned so the determinant has a rank-1 double zero at -i/2."""
    chi = np.exp(-np.pi / 2.0)
    b = -np.sqrt(2.0) * np.exp(np.pi / 4.0)
    return validate(
        orbit_config(
            [np.pi / 2],
            terms={(1, 2): [NonlocalTerm(target=1, rotation=-np.pi / 2, homothety=chi, coeff0=b)]},
        )
    )


# ---------------------------------------------------------------------------
# count_zeros
# ---------------------------------------------------------------------------

def test_count_zeros_single_root():
    assert count_zeros(_dirichlet(np.pi / 2), (-1.0, 1.0, -1.2, -0.8), 48) == 1


def test_count_zeros_empty_band():
    assert count_zeros(_dirichlet(np.pi / 4), (-10.0, 10.0, -1.0, -1e-6), 48) == 0


def test_count_zeros_degenerate_rectangle():
    assert count_zeros(_dirichlet(np.pi / 4), (0.0, 0.0, -1.0, 0.0), 48) == 0


def test_count_zeros_multiplicity_two():
    cfg = _jordan_config()
    assert count_zeros(cfg, (-0.5, 0.5, -0.8, -0.2), 48) == 2


# ---------------------------------------------------------------------------
# locate_eigenvalues against the sinh oracle
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("omega", [np.pi / 4, np.pi / 2, 3 * np.pi / 4, 0.9 * np.pi])
def test_dirichlet_band_matches_sinh_roots(omega):
    expected = dirichlet_band_roots(omega)
    res = locate_eigenvalues(_dirichlet(omega), BandQuery())
    assert res.count_consistent
    got = [r.lam0 for r in res.records]
    assert len(got) == len(expected)
    for lam, ref in zip(got, expected):
        assert abs(lam - ref) < 1e-8


def test_band_edge_root_retained_and_flagged():
    res = locate_eigenvalues(_dirichlet(np.pi / 2), BandQuery())
    assert len(res.records) == 1
    rec = res.records[0]
    assert rec.edge_flag == "lower-edge"
    assert abs(rec.lam0 - (-1j)) < 1e-8


def test_nonlocal_band_matches_characteristic_determinant():
    cfg = validate(
        orbit_config(
            [np.pi / 2],
            terms={(1, 1): [NonlocalTerm(target=1, rotation=np.pi / 2, homothety=0.5, coeff0=-0.5)]},
        )
    )
    det = laplace_one_angle_char_det(np.pi / 2, {1: [(np.pi / 2, 0.5, -0.5 + 0j)]})
    oracle = grid_roots(det, (-10.0, 10.0, -1.001, -1e-4))
    res = locate_eigenvalues(cfg, BandQuery())
    got = [r.lam0 for r in res.records]
    assert len(got) == len(oracle) > 0
    for lam, ref in zip(got, sorted(oracle, key=lambda z: (z.real, z.imag))):
        assert abs(lam - ref) < 1e-8


def test_grid_stability_48_to_96():
    for omega in (np.pi / 2, 3 * np.pi / 4):
        r48 = locate_eigenvalues(_dirichlet(omega), BandQuery(n=48))
        r96 = locate_eigenvalues(_dirichlet(omega), BandQuery(n=96))
        for a, b in zip(r48.records, r96.records):
            assert abs(a.lam0 - b.lam0) < 1e-8
            assert a.stable and b.stable


# ---------------------------------------------------------------------------
# eigenbasis
# ---------------------------------------------------------------------------

def test_eigenbasis_half_plane_is_cosine():
    cfg = _dirichlet(np.pi / 2)
    basis = eigenbasis(cfg, -1j, 48)
    assert len(basis) == 1
    pen = discretize(cfg, 48)
    phi = basis[0][0]
    ref = np.cos(pen.nodes[0]).astype(complex)
    ref = ref / np.max(np.abs(ref))
    assert np.max(np.abs(phi - ref)) < 1e-8


def test_eigenbasis_three_quarter_is_shifted_sine():
    omega = 3 * np.pi / 4
    cfg = _dirichlet(omega)
    lam0 = -2j / 3
    basis = eigenbasis(cfg, lam0, 48)
    assert len(basis) == 1
    pen = discretize(cfg, 48)
    ref = np.sin(2.0 * (pen.nodes[0] + omega) / 3.0).astype(complex)
    peak = np.argmax(np.abs(ref))
    ref = ref * (np.abs(ref[peak]) / ref[peak]) / np.abs(ref[peak])
    assert np.max(np.abs(basis[0][0] - ref)) < 1e-8


def test_eigenbasis_rejects_regular_point():
    with pytest.raises(NotAnEigenvalue):
        eigenbasis(_dirichlet(3 * np.pi / 4), -0.5j, 48)


def test_eigenbasis_residual_bound():
    cfg = _dirichlet(np.pi / 2)
    basis = eigenbasis(cfg, -1j, 48)
    pen = discretize(cfg, 48)
    m = pen.matrix(-1j)
    vec = np.concatenate(basis[0])
    assert np.linalg.norm(m @ vec) / np.linalg.norm(vec) < 1e-7


# ---------------------------------------------------------------------------
# associated vectors
# ---------------------------------------------------------------------------

def test_simple_root_has_no_associated_vector():
    cfg = _dirichlet(np.pi / 2)
    basis = eigenbasis(cfg, -1j, 48)
    assert has_associated(cfg, -1j, basis, 48) is False


def test_jordan_double_root_has_associated_vector():
    cfg = _jordan_config()
    basis = eigenbasis(cfg, -0.5j, 48)
    assert len(basis) == 1
    assert has_associated(cfg, -0.5j, basis, 48) is True


def test_geometric_double_root_has_no_associated_vector():
    cfg = validate(orbit_config([3 * np.pi / 4, 3 * np.pi / 4]))
    lam0 = -2j / 3
    basis = eigenbasis(cfg, lam0, 48)
    assert len(basis) == 2
    assert has_associated(cfg, lam0, basis, 48) is False


def test_jordan_config_locate_reports_discrepancy():
    res = locate_eigenvalues(_jordan_config(), BandQuery())
    assert res.total_count == 2
    assert len(res.records) == 1
    rec = res.records[0]
    assert abs(rec.lam0 - (-0.5j)) < 1e-6
    assert rec.algebraic_multiplicity == 2
    assert rec.geometric_multiplicity == 1
    assert rec.has_associated
    assert rec.classification == "improper"
    assert any("multiplicity" in note for note in res.notes)


# ---------------------------------------------------------------------------
# polynomial test and classification
# ---------------------------------------------------------------------------

def test_polynomial_degree_linear():
    cfg = _dirichlet(np.pi / 2)
    basis = eigenbasis(cfg, -1j, 48)
    result = polynomial_degree_test(cfg, -1j, basis, 48)
    assert result is not None
    degree, residual = result
    assert degree == 1
    assert residual < 1e-10


def test_polynomial_degree_rejects_fractional_power():
    cfg = _dirichlet(3 * np.pi / 4)
    basis = eigenbasis(cfg, -2j / 3, 48)
    assert polynomial_degree_test(cfg, -2j / 3, basis, 48) is None


def test_polynomial_degree_rejects_wrong_mode():
    cfg = _dirichlet(np.pi / 2)
    pen = discretize(cfg, 48)
    fake_basis = [[np.cos(3.0 * pen.nodes[0]).astype(complex)]]
    assert polynomial_degree_test(cfg, -1j, fake_basis, 48) is None


def test_classification_rules():
    res = locate_eigenvalues(_dirichlet(np.pi / 2), BandQuery())
    assert res.records[0].classification == "proper"
    res2 = locate_eigenvalues(_dirichlet(3 * np.pi / 4), BandQuery())
    assert res2.records[0].classification == "improper"
    rec = res.records[0]
    rec.has_associated = True
    assert classify(rec) == "improper"


def test_proper_band_eigenvalues_equal_minus_i():
    # forced by the classification: i*lam0 must be a nonnegative integer and
    # only 1 fits the band
    for omega in (np.pi / 2, 3 * np.pi / 4, 0.9 * np.pi):
        res = locate_eigenvalues(_dirichlet(omega), BandQuery())
        for rec in res.records:
            if rec.classification == "proper":
                assert abs(rec.lam0 - (-1j)) < 1e-8


# ---------------------------------------------------------------------------
# randomized properties
# ---------------------------------------------------------------------------

def test_count_consistency_randomized():
    rng = np.random.default_rng(42)
    for _ in range(8):
        cfg = random_valid_config(rng)
        res = locate_eigenvalues(cfg, BandQuery())
        assert res.count_consistent
        assert all(r.stable for r in res.records)


def test_conjugation_symmetry_real_configs():
    rng = np.random.default_rng(11)
    for _ in range(4):
        cfg = random_valid_config(rng, real_only=True)
        res = locate_eigenvalues(cfg, BandQuery())
        lams = [r.lam0 for r in res.records]
        for lam in lams:
            mirrored = -lam.conjugate()
            assert any(abs(mirrored - other) < 1e-7 for other in lams)
