import copy

import numpy as np
import pytest

from corner_pencil.config import NonlocalTerm, orbit_config, validate
from corner_pencil.errors import MissingEvidence
from corner_pencil.spectrum import BandQuery, locate_eigenvalues
from corner_pencil.tangential import check_condition4prime, tangential_system
from corner_pencil.verdict import decide, explain, parse_explanation, rederive


def _verdict_for(omega, with_tangential=True):
    cfg = validate(orbit_config([omega]))
    result = locate_eigenvalues(cfg, BandQuery())
    if with_tangential:
        system = tangential_system(cfg)
        condition = check_condition4prime(cfg, system, [])
        return decide(cfg, result, system, condition, mode="homogeneous")
    return decide(cfg, result)


def test_empty_band_smooth_always():
    v = _verdict_for(np.pi / 4, with_tangential=False)
    assert v.outcome == "SmoothAlways"
    assert v.exit_code() == 0


def test_improper_band_not_smooth():
    v = _verdict_for(3 * np.pi / 4, with_tangential=False)
    assert v.outcome == "NotSmooth_Improper"
    assert v.exit_code() == 2


def test_conditional_branch_resolves_smooth_for_consistent_data():
    v = _verdict_for(np.pi / 2)
    assert v.outcome == "Conditional_Cond3"
    assert v.rhs_mode == "homogeneous"
    assert v.condition_result == "holds-on-evidence"
    assert v.conclusion == "SmoothForS"
    assert v.exit_code() == 0


def test_conditional_branch_needs_evidence():
    with pytest.raises(MissingEvidence):
        _verdict_for(np.pi / 2, with_tangential=False)


def test_condition_failure_yields_not_smooth_exists():
    cfg = validate(
        orbit_config(
            [np.pi / 2],
            terms={(1, 2): [NonlocalTerm(target=1, rotation=-np.pi / 4, homothety=1.0, coeff0=0.0, coeff_r_deriv0=1.0)]},
        )
    )
    result = locate_eigenvalues(cfg, BandQuery())
    system = tangential_system(cfg)
    from corner_pencil.tangential import check_condition4

    condition = check_condition4(cfg, system, [])
    v = decide(cfg, result, system, condition, mode="nonhomogeneous")
    assert v.outcome == "Conditional_Cond3"
    assert v.conclusion == "NotSmoothExists"
    assert v.exit_code() == 2


def test_verdict_is_pure_function_of_certificate():
    for omega in (np.pi / 4, np.pi / 2, 3 * np.pi / 4):
        v = _verdict_for(omega)
        again = rederive(v)
        assert again.outcome == v.outcome
        assert again.conclusion == v.conclusion


def test_monotonicity_adding_improper_keeps_not_smooth():
    v = _verdict_for(3 * np.pi / 4, with_tangential=False)
    cert = copy.deepcopy(v.certificate)
    cert["band"]["eigenvalues"].append(
        {
            "lambda": [0.0, -0.4],
            "stable": True,
            "refine_movement": 0.0,
            "geometric_multiplicity": 1,
            "algebraic_multiplicity": 1,
            "residual": 0.0,
            "has_associated": False,
            "polynomial_degree": None,
            "polynomial_residual": None,
            "classification": "improper",
            "edge_flag": None,
        }
    )
    from corner_pencil.verdict import _outcome_from_certificate

    assert _outcome_from_certificate(cert).outcome == "NotSmooth_Improper"
    # and adding one to a smooth certificate flips it to NotSmooth
    v2 = _verdict_for(np.pi / 4, with_tangential=False)
    cert2 = copy.deepcopy(v2.certificate)
    cert2["band"]["eigenvalues"].append(cert["band"]["eigenvalues"][-1])
    assert _outcome_from_certificate(cert2).outcome == "NotSmooth_Improper"


def test_unstable_roots_force_indeterminate():
    v = _verdict_for(np.pi / 4, with_tangential=False)
    cert = copy.deepcopy(v.certificate)
    cert["band"]["unstable_roots"].append({"lambda": [0.0, -0.5], "movement": 1e-4, "multiplicity": 1})
    from corner_pencil.verdict import _outcome_from_certificate

    out = _outcome_from_certificate(cert)
    assert out.outcome == "Indeterminate"
    assert any("unstable" in r for r in out.reasons)


def test_upper_edge_ambiguity_forces_indeterminate():
    v = _verdict_for(np.pi / 4, with_tangential=False)
    cert = copy.deepcopy(v.certificate)
    cert["band"]["ambiguous_upper_edge"].append([0.3, -1e-10])
    from corner_pencil.verdict import _outcome_from_certificate

    assert _outcome_from_certificate(cert).outcome == "Indeterminate"


def test_independent_tangential_system_is_module_inconsistency():
    v = _verdict_for(np.pi / 2)
    cert = copy.deepcopy(v.certificate)
    cert["tangential"]["dependent"] = False
    from corner_pencil.verdict import _outcome_from_certificate

    out = _outcome_from_certificate(cert)
    assert out.outcome == "Indeterminate"
    assert any("independent" in r for r in out.reasons)


def test_explain_round_trip():
    for omega in (np.pi / 4, np.pi / 2, 3 * np.pi / 4):
        v = _verdict_for(omega)
        parsed = parse_explanation(explain(v))
        assert parsed["outcome"] == v.outcome
        assert parsed["conclusion"] == v.conclusion
        assert parsed["rhs_mode"] == v.rhs_mode
        assert parsed["condition_result"] == v.condition_result
