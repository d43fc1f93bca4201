"""Decision logic: map band spectrum and tangential evidence to a verdict.

The decision tree:

* empty band spectrum                    -> SmoothAlways
* any stable improper band eigenvalue    -> NotSmooth_Improper
* evidence that could flip the branch
  (upper-edge-ambiguous or unstable or
  quasi-stable roots)                    -> Indeterminate
* exactly the proper eigenvalue -i       -> Conditional_Cond3, resolved by the
  constant-vector/trace side condition in the requested mode; a failure means
  a non-smooth solution exists (NotSmoothExists), success certifies
  smoothness for consistent data (SmoothForS) on the supplied evidence only.

Every verdict carries a certificate from which the outcome can be re-derived.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import ValidatedConfig
from .errors import MissingEvidence
from .spectrum import BandResult
from .tangential import ConditionResult, TangentialSystem

OUTCOMES = ("SmoothAlways", "NotSmooth_Improper", "Conditional_Cond3", "Indeterminate")
EXIT_CODES = {
    "SmoothAlways": 0,
    "SmoothForS": 0,
    "NotSmooth_Improper": 2,
    "NotSmoothExists": 2,
    "Indeterminate": 3,
}


@dataclass
class Verdict:
    outcome: str                       # one of OUTCOMES
    rhs_mode: str | None = None        # "homogeneous" | "nonhomogeneous" (conditional branch)
    condition_result: str | None = None  # "holds-on-evidence" | "fails"
    conclusion: str | None = None      # "SmoothForS" | "NotSmoothExists"
    reasons: list[str] = field(default_factory=list)
    certificate: dict = field(default_factory=dict)

    def exit_code(self) -> int:
        if self.outcome == "Conditional_Cond3" and self.conclusion:
            return EXIT_CODES[self.conclusion]
        return EXIT_CODES[self.outcome]

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "rhs_mode": self.rhs_mode,
            "condition_result": self.condition_result,
            "conclusion": self.conclusion,
            "reasons": list(self.reasons),
            "certificate": self.certificate,
        }


def _certificate(
    config: ValidatedConfig,
    band_result: BandResult,
    system: TangentialSystem | None,
    condition: ConditionResult | None,
    mode: str,
) -> dict:
    cert: dict = {
        "mode": mode,
        "band": band_result.to_dict(include_basis=False),
    }
    if system is not None:
        cert["tangential"] = system.to_dict()
    if condition is not None:
        cert["condition"] = condition.to_dict()
    return cert


def _outcome_from_certificate(cert: dict) -> Verdict:
    """Re-derive the verdict from certificate contents alone."""
    band = cert["band"]
    records = band["eigenvalues"]
    reasons: list[str] = []

    stable_improper = [
        r for r in records if r["classification"] == "improper" and r["stable"]
    ]
    if stable_improper:
        lam = stable_improper[0]["lambda"]
        return Verdict(
            outcome="NotSmooth_Improper",
            reasons=[f"stable improper eigenvalue at {lam[0]:.9g}{lam[1]:+.9g}i"],
            certificate=cert,
        )

    if not band["count_consistent"]:
        reasons.append("winding count and located multiplicities disagree")
    if band["ambiguous_upper_edge"]:
        reasons.append(
            f"{len(band['ambiguous_upper_edge'])} root(s) within edge tolerance of the open band top"
        )
    if band["unstable_roots"]:
        reasons.append(f"{len(band['unstable_roots'])} root(s) unstable under grid refinement")
    quasi = [r for r in records if not r["stable"]]
    if quasi:
        reasons.append(f"{len(quasi)} retained root(s) not grid-stable to tolerance")
    if reasons:
        return Verdict(outcome="Indeterminate", reasons=reasons, certificate=cert)

    if not records:
        return Verdict(outcome="SmoothAlways", reasons=["band spectrum empty"], certificate=cert)

    # All records stable and proper here; properness in the critical band pins
    # each eigenvalue to -i, so a single record certifies the conditional branch.
    for r in records:
        if r["classification"] != "proper":  # pragma: no cover - guarded above
            return Verdict(
                outcome="Indeterminate",
                reasons=["unclassified eigenvalue in band"],
                certificate=cert,
            )
        if abs(complex(r["lambda"][0], r["lambda"][1]) - (-1j)) > 1e-6:
            return Verdict(
                outcome="Indeterminate",
                reasons=[
                    "internal inconsistency: proper band eigenvalue away from -i "
                    f"at {r['lambda']}"
                ],
                certificate=cert,
            )
    if len(records) != 1:
        return Verdict(
            outcome="Indeterminate",
            reasons=["multiple distinct proper eigenvalues in band (expected a single -i)"],
            certificate=cert,
        )

    tang = cert.get("tangential")
    if tang is None:
        raise MissingEvidence(
            "band spectrum is the single proper eigenvalue -i: the verdict needs tangential evidence"
        )
    if not tang["dependent"]:
        return Verdict(
            outcome="Indeterminate",
            reasons=[
                "module inconsistency: spectrum certifies the conditional branch but the "
                "tangential system is linearly independent"
            ],
            certificate=cert,
        )
    condition = cert.get("condition")
    if condition is None:
        raise MissingEvidence("conditional branch reached without a side-condition result")
    mode = cert.get("mode", "homogeneous")
    if condition["holds_on_evidence"]:
        return Verdict(
            outcome="Conditional_Cond3",
            rhs_mode=mode,
            condition_result="holds-on-evidence",
            conclusion="SmoothForS",
            reasons=["unique proper eigenvalue -i; side condition holds on supplied evidence"],
            certificate=cert,
        )
    return Verdict(
        outcome="Conditional_Cond3",
        rhs_mode=mode,
        condition_result="fails",
        conclusion="NotSmoothExists",
        reasons=["unique proper eigenvalue -i; side condition fails"],
        certificate=cert,
    )


def decide(
    config: ValidatedConfig,
    band_result: BandResult,
    system: TangentialSystem | None = None,
    condition: ConditionResult | None = None,
    mode: str = "homogeneous",
) -> Verdict:
    """Assemble the certificate and derive the smoothness verdict from it.

    ``system`` and ``condition`` are only required when the spectrum lands in
    the conditional branch (single proper eigenvalue -i); reaching that branch
    without them raises MissingEvidence.
    """
    if mode not in ("homogeneous", "nonhomogeneous"):
        raise ValueError(f"mode must be homogeneous or nonhomogeneous, got {mode!r}")
    cert = _certificate(config, band_result, system, condition, mode)
    return _outcome_from_certificate(cert)


def rederive(verdict: Verdict) -> Verdict:
    """Recompute the outcome from the stored certificate (consistency check)."""
    return _outcome_from_certificate(verdict.certificate)


def explain(verdict: Verdict) -> str:
    """Human-readable report; :func:`parse_explanation` inverts the header."""
    lines = [f"OUTCOME: {verdict.outcome}"]
    if verdict.rhs_mode:
        lines.append(f"MODE: {verdict.rhs_mode}")
    if verdict.condition_result:
        lines.append(f"CONDITION: {verdict.condition_result}")
    if verdict.conclusion:
        lines.append(f"CONCLUSION: {verdict.conclusion}")
    for reason in verdict.reasons:
        lines.append(f"because: {reason}")
    band = verdict.certificate.get("band", {})
    recs = band.get("eigenvalues", [])
    lines.append(f"band eigenvalues: {len(recs)}")
    for r in recs:
        lam = r["lambda"]
        lines.append(
            f"  lambda = {lam[0]:+.9f}{lam[1]:+.9f}i  {r['classification']}"
            f"  gmult={r['geometric_multiplicity']} amult={r['algebraic_multiplicity']}"
            f"  stable={r['stable']}"
            + (f"  [{r['edge_flag']}]" if r.get("edge_flag") else "")
        )
    for u in band.get("unstable_roots", []):
        lines.append(f"  unstable root near {u['lambda']} (movement {u['movement']:.2e})")
    tang = verdict.certificate.get("tangential")
    if tang:
        lines.append(
            f"tangential system: {len(tang['pivots'])} pivot(s) of {len(tang['matrices'])} sides"
            f" ({'dependent' if tang['dependent'] else 'independent'})"
        )
    cond = verdict.certificate.get("condition")
    if cond and cond.get("witness"):
        lines.append(f"witness: {cond['witness']}")
    return "\n".join(lines) + "\n"


def parse_explanation(text: str) -> dict:
    """Extract the verdict header fields back out of :func:`explain` output."""
    out: dict = {"outcome": None, "rhs_mode": None, "condition_result": None, "conclusion": None}
    keys = {"OUTCOME": "outcome", "MODE": "rhs_mode", "CONDITION": "condition_result", "CONCLUSION": "conclusion"}
    for line in text.splitlines():
        head, _, tail = line.partition(":")
        if head in keys:
            out[keys[head]] = tail.strip()
    return out
