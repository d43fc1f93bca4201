"""Tangential derivative system of the trace operators and consistency checks.

Differentiating each side's trace operator along its ray and replacing the
composed point maps by the identity yields, per side, a first-order operator
with constant coefficients on the component vector: an N x 2 matrix of
coefficients on (d/dy1, d/dy2).  When the 2N operators are linearly
dependent, every non-pivot combination of side data must have a derivative
vanishing at the vertex for the weighted energy
``int_0^eps r^{-1} |d/dr (Z_side - sum beta Z_pivot)|^2 dr`` to stay finite;
this module builds the system, the dependence coefficients, and evaluates
those checks on smooth or sampled boundary data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import SideId, ValidatedConfig, rotation_matrix
from .errors import ConfigError, InsufficientSamples, MismatchedDomains

PIVOT_RTOL = 1e-10        # residual ratio below which a row counts as dependent
PIVOT_WARN_RTOL = 1e-12   # dependent rows above this get a warning
TOL_CONSISTENCY = 1e-9    # |g'(0)| threshold for smooth data
DIVERGENCE_SLOPE = 0.5    # log-slope of F(delta) above this flags divergence
MIN_SAMPLES = 16
GRADED_RATIO = 2.0 ** -0.25   # mesh r_i = eps * GRADED_RATIO**i
DYADIC_LEVELS = 20            # partial integrals reported at eps * 2^-k


def graded_mesh(epsilon: float, count: int = 48) -> np.ndarray:
    """Geometric mesh eps * 2^(-i/4), i = 0..count-1, accumulating at zero."""
    return epsilon * GRADED_RATIO ** np.arange(count)


@dataclass(frozen=True)
class SmoothTrace:
    """Boundary data known in closed form: value and radial derivative callables."""

    value: Callable[[float], complex]
    derivative: Callable[[float], complex]

    def __add__(self, other):
        if isinstance(other, SmoothTrace):
            return SmoothTrace(
                value=lambda r, a=self.value, b=other.value: a(r) + b(r),
                derivative=lambda r, a=self.derivative, b=other.derivative: a(r) + b(r),
            )
        return NotImplemented


@dataclass(frozen=True)
class SampledTrace:
    """Boundary data known only at graded mesh radii (descending)."""

    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if radii.shape != values.shape or radii.ndim != 1:
            raise ConfigError("sampled trace needs matching 1-d radii and values")
        if len(radii) >= 2 and radii[0] < radii[-1]:
            radii = radii[::-1].copy()
            values = values[::-1].copy()
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    def __add__(self, other):
        if isinstance(other, SmoothTrace):
            extra = np.array([other.value(r) for r in self.radii])
            return SampledTrace(self.radii, self.values + extra)
        if isinstance(other, SampledTrace):
            if self.radii.shape != other.radii.shape or not np.allclose(
                self.radii, other.radii, rtol=1e-12, atol=0.0
            ):
                raise MismatchedDomains("sampled traces live on different meshes")
            return SampledTrace(self.radii, self.values + other.values)
        return NotImplemented

    __radd__ = __add__


Trace = SmoothTrace | SampledTrace


def zero_trace() -> SmoothTrace:
    return SmoothTrace(value=lambda r: 0j, derivative=lambda r: 0j)


def poly_trace(*coeffs: complex) -> SmoothTrace:
    """Trace c0 + c1 r + c2 r^2 + ... with its exact derivative."""
    cs = [complex(c) for c in coeffs]

    def value(r: float) -> complex:
        return sum(c * r**k for k, c in enumerate(cs))

    def derivative(r: float) -> complex:
        return sum(k * c * r ** (k - 1) for k, c in enumerate(cs) if k >= 1)

    return SmoothTrace(value=value, derivative=derivative)


def parse_trace(spec: str, base_dir: str | Path | None = None) -> Trace:
    """Parse ``poly:c0,c1,...`` or ``csv:path`` trace descriptors."""
    if spec.startswith("poly:"):
        parts = [p.strip() for p in spec[len("poly:"):].split(",") if p.strip()]
        try:
            coeffs = [complex(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"bad poly trace {spec!r}: {exc}") from exc
        return poly_trace(*coeffs) if coeffs else zero_trace()
    if spec.startswith("csv:"):
        path = Path(spec[len("csv:"):])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_trace_csv(path)
    raise ConfigError(f"unknown trace descriptor {spec!r} (expected poly: or csv:)")


def load_trace_csv(path: str | Path) -> SampledTrace:
    """Read a ``r,re,im`` CSV (header row optional)."""
    radii, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                r = float(row[0])
            except ValueError:
                continue  # header
            re_part = float(row[1]) if len(row) > 1 else 0.0
            im_part = float(row[2]) if len(row) > 2 else 0.0
            radii.append(r)
            values.append(complex(re_part, im_part))
    if not radii:
        raise ConfigError(f"no samples found in {path}")
    return SampledTrace(np.asarray(radii), np.asarray(values))


def save_trace_csv(path: str | Path, trace: SampledTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "re", "im"])
        for r, v in zip(trace.radii, trace.values):
            writer.writerow([repr(float(r)), repr(v.real), repr(v.imag)])


# ---------------------------------------------------------------------------
# The tangential system
# ---------------------------------------------------------------------------

@dataclass
class TangentialSystem:
    matrices: dict[SideId, np.ndarray]              # side -> N x 2 coefficients
    pivots: list[SideId]
    beta: dict[SideId, dict[SideId, complex]]        # non-pivot -> pivot -> coefficient
    beta_residuals: dict[SideId, float]
    warnings: list[str] = field(default_factory=list)

    @property
    def n_components(self) -> int:
        first = next(iter(self.matrices.values()))
        return first.shape[0]

    def non_pivots(self) -> list[SideId]:
        return [s for s in self.matrices if s not in self.pivots]

    def is_dependent(self) -> bool:
        return len(self.pivots) < len(self.matrices)

    def to_dict(self) -> dict:
        return {
            "pivots": [s.key() for s in self.pivots],
            "matrices": {
                s.key(): [[[z.real, z.imag] for z in row] for row in mat]
                for s, mat in self.matrices.items()
            },
            "beta": {
                s.key(): {p.key(): [c.real, c.imag] for p, c in coeffs.items()}
                for s, coeffs in self.beta.items()
            },
            "beta_residuals": {s.key(): res for s, res in self.beta_residuals.items()},
            "dependent": self.is_dependent(),
            "warnings": list(self.warnings),
        }


def tangential_system(config: ValidatedConfig) -> TangentialSystem:
    """Build all 2N side operators, the pivot subsystem, and expansion coefficients.

    Pivots are chosen greedily in lexicographic (j, sigma) order: a side row
    joins the pivot set when its component orthogonal to the earlier pivots
    exceeds PIVOT_RTOL of its own norm.  Non-pivot rows are expanded over the
    pivot rows by least squares (exact up to roundoff, by construction).
    """
    n = config.n_angles
    matrices: dict[SideId, np.ndarray] = {}
    for side in config.sides():
        mat = np.zeros((n, 2), dtype=complex)
        tau = config.side_tangent(side)
        for term in config.terms(side):
            mat[term.target - 1] += (
                term.coeff0 * term.homothety * (rotation_matrix(term.rotation) @ tau)
            )
        matrices[side] = mat

    pivots: list[SideId] = []
    ortho: list[np.ndarray] = []
    warnings: list[str] = []
    for side, mat in matrices.items():
        row = mat.ravel()
        norm = np.linalg.norm(row)
        if norm == 0.0:
            continue
        residual = row.copy()
        for q in ortho:
            residual -= np.vdot(q, residual) * q
        ratio = np.linalg.norm(residual) / norm
        if ratio >= PIVOT_RTOL:
            pivots.append(side)
            ortho.append(residual / np.linalg.norm(residual))
        elif ratio > PIVOT_WARN_RTOL:
            warnings.append(
                f"side {side.key()}: dependence residual ratio {ratio:.3e} is near the threshold"
            )

    beta: dict[SideId, dict[SideId, complex]] = {}
    beta_residuals: dict[SideId, float] = {}
    if pivots:
        pivot_mat = np.column_stack([matrices[p].ravel() for p in pivots])
        for side, mat in matrices.items():
            if side in pivots:
                continue
            row = mat.ravel()
            coeffs, _, _, _ = np.linalg.lstsq(pivot_mat, row, rcond=None)
            res = float(np.linalg.norm(pivot_mat @ coeffs - row))
            beta[side] = {p: complex(c) for p, c in zip(pivots, coeffs)}
            beta_residuals[side] = res
    else:
        for side in matrices:
            beta[side] = {}
            beta_residuals[side] = 0.0

    return TangentialSystem(
        matrices=matrices,
        pivots=pivots,
        beta=beta,
        beta_residuals=beta_residuals,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Consistency checks
# ---------------------------------------------------------------------------

@dataclass
class SideConsistency:
    side: SideId
    pathway: str                      # "smooth" | "sampled"
    derivative_at_zero: complex
    partial_integrals: list[tuple[float, float]]   # (delta, F(delta))
    log_slope: float
    consistent: bool

    def to_dict(self) -> dict:
        d0 = complex(self.derivative_at_zero)
        return {
            "side": self.side.key(),
            "pathway": self.pathway,
            "derivative_at_zero": [d0.real, d0.imag],
            "partial_integrals": [[float(d), float(v)] for d, v in self.partial_integrals],
            "log_slope": float(self.log_slope),
            "consistent": bool(self.consistent),
        }


@dataclass
class ConsistencyReport:
    entries: list[SideConsistency]
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "consistent": self.consistent,
            "entries": [e.to_dict() for e in self.entries],
        }


def _gauss_panel(f, a: float, b: float, order: int = 16) -> float:
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid + half * x
    return float(half * np.sum(w * np.array([f(t) for t in pts])))


def _smooth_partial_integrals(gprime, epsilon: float) -> list[tuple[float, float]]:
    """F(delta) = int_delta^eps |g'(r)|^2 / r dr at delta = eps * 2^-k."""
    deltas = [epsilon * 2.0 ** (-k) for k in range(DYADIC_LEVELS + 1)]
    out = [(deltas[0], 0.0)]
    acc = 0.0
    integrand = lambda r: abs(gprime(r)) ** 2 / r
    for k in range(DYADIC_LEVELS):
        acc += _gauss_panel(integrand, deltas[k + 1], deltas[k])
        out.append((deltas[k + 1], acc))
    return out


def _sampled_partial_integrals(radii: np.ndarray, values: np.ndarray) -> list[tuple[float, float]]:
    """Piecewise-constant-derivative approximation of F on the graded mesh."""
    out = [(float(radii[0]), 0.0)]
    acc = 0.0
    for i in range(len(radii) - 1):
        dr = radii[i] - radii[i + 1]
        if dr <= 0:
            raise MismatchedDomains("sampled radii must be strictly decreasing")
        d = (values[i] - values[i + 1]) / dr
        acc += abs(d) ** 2 * math.log(radii[i] / radii[i + 1])
        out.append((float(radii[i + 1]), acc))
    return out


def _fit_log_slope(partials: Sequence[tuple[float, float]], decades: float = 4.0) -> float:
    """Slope of F against ln(1/delta) over the last `decades` decades of delta."""
    if len(partials) < 3:
        return 0.0
    deltas = np.array([d for d, _ in partials])
    values = np.array([v for _, v in partials])
    d_min = deltas.min()
    mask = deltas <= d_min * 10.0**decades
    if mask.sum() < 3:
        mask = np.ones_like(deltas, dtype=bool)
    x = np.log(1.0 / deltas[mask])
    y = values[mask]
    a = np.column_stack([x, np.ones_like(x)])
    slope, _ = np.linalg.lstsq(a, y, rcond=None)[0]
    return float(slope)


def _extrapolated_derivative(radii: np.ndarray, values: np.ndarray) -> complex:
    """Finite-difference derivative estimates pushed to r -> 0 by a linear fit."""
    mids = 0.5 * (radii[:-1] + radii[1:])
    derivs = (values[:-1] - values[1:]) / (radii[:-1] - radii[1:])
    take = min(12, len(mids))
    x = mids[-take:]
    y = derivs[-take:]
    a = np.column_stack([x, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    return complex(coef[1])


def _combine_smooth(traces: Mapping[SideId, SmoothTrace], side: SideId, coeffs: Mapping[SideId, complex]):
    def gval(r: float) -> complex:
        out = traces[side].value(r)
        for p, beta in coeffs.items():
            out -= beta * traces[p].value(r)
        return out

    def gder(r: float) -> complex:
        out = traces[side].derivative(r)
        for p, beta in coeffs.items():
            out -= beta * traces[p].derivative(r)
        return out

    return gval, gder


def consistency_check(
    system: TangentialSystem,
    traces: Mapping[SideId, Trace],
    epsilon: float,
) -> ConsistencyReport:
    """Evaluate the vertex-consistency condition for every non-pivot combination.

    Smooth data is decided exactly by the derivative of the combination at
    r = 0 (for smooth g the weighted energy is finite iff g'(0) = 0); sampled
    data by derivative extrapolation plus the divergence slope of the partial
    integrals.  Partial integrals are always reported as evidence.
    """
    for side in system.matrices:
        if side not in traces:
            raise MismatchedDomains(f"no trace supplied for side {side.key()}")

    sampled = [t for t in traces.values() if isinstance(t, SampledTrace)]
    mesh = None
    if sampled:
        mesh = sampled[0].radii
        if len(mesh) < MIN_SAMPLES:
            raise InsufficientSamples(
                f"need >= {MIN_SAMPLES} graded mesh points, got {len(mesh)}"
            )
        for t in sampled[1:]:
            if t.radii.shape != mesh.shape or not np.allclose(t.radii, mesh, rtol=1e-12, atol=0.0):
                raise MismatchedDomains("sampled traces live on different meshes")
        if not math.isclose(float(mesh.max()), epsilon, rel_tol=1e-9, abs_tol=0.0):
            raise MismatchedDomains(
                f"sampled mesh spans up to {mesh.max():g}, expected epsilon={epsilon:g}"
            )

    entries: list[SideConsistency] = []
    for side in system.non_pivots():
        coeffs = system.beta.get(side, {})
        if mesh is None:
            gval, gder = _combine_smooth(traces, side, coeffs)
            d0 = gder(0.0)
            partials = _smooth_partial_integrals(gder, epsilon)
            slope = _fit_log_slope(partials)
            consistent = abs(d0) <= TOL_CONSISTENCY and slope <= DIVERGENCE_SLOPE
            entries.append(
                SideConsistency(
                    side=side,
                    pathway="smooth",
                    derivative_at_zero=d0,
                    partial_integrals=partials,
                    log_slope=slope,
                    consistent=consistent,
                )
            )
        else:
            def on_mesh(t: Trace) -> np.ndarray:
                if isinstance(t, SampledTrace):
                    return t.values
                return np.array([t.value(r) for r in mesh])

            g = on_mesh(traces[side])
            for p, beta in coeffs.items():
                g = g - beta * on_mesh(traces[p])
            d0 = _extrapolated_derivative(mesh, g)
            partials = _sampled_partial_integrals(mesh, g)
            slope = _fit_log_slope(partials)
            scale = float(np.max(np.abs(g))) / epsilon if np.max(np.abs(g)) > 0 else 0.0
            tol = max(TOL_CONSISTENCY, 1e-6 * max(scale, 1.0))
            consistent = abs(d0) <= tol and slope <= DIVERGENCE_SLOPE
            entries.append(
                SideConsistency(
                    side=side,
                    pathway="sampled",
                    derivative_at_zero=d0,
                    partial_integrals=partials,
                    log_slope=slope,
                    consistent=consistent,
                )
            )

    return ConsistencyReport(entries=entries, consistent=all(e.consistent for e in entries))


def rhs_membership(
    system: TangentialSystem,
    traces: Mapping[SideId, Trace],
    epsilon: float,
) -> tuple[bool, ConsistencyReport]:
    """Whether boundary right-hand sides admit any smooth solution at all.

    Thin wrapper over :func:`consistency_check`; an independent system imposes
    no constraint, so every trace family is admitted.
    """
    report = consistency_check(system, traces, epsilon)
    return report.consistent, report


# ---------------------------------------------------------------------------
# Constant vectors and admissibility
# ---------------------------------------------------------------------------

def _side_coefficient_sums(config: ValidatedConfig, side: SideId, derivative: bool) -> np.ndarray:
    out = np.zeros(config.n_angles, dtype=complex)
    for term in config.terms(side):
        out[term.target - 1] += term.coeff_r_deriv0 if derivative else term.coeff0
    return out


def constant_vector_consistency(
    config: ValidatedConfig, system: TangentialSystem
) -> tuple[bool, int | None, dict[str, list]]:
    """Exact consistency of the vertex traces of all constant component vectors.

    For a constant vector C the side trace is r -> sum_k b_k(r) C_k, so the
    derivative at zero of any non-pivot combination is w . C with
    w_k = sum_s db_k/dr(0) - sum_pivots beta * (same on the pivot side).  The
    condition holds for every C iff w = 0 on every non-pivot side; linearity
    makes checking the N basis vectors exhaustive.  Returns
    (holds, witness basis index or None, per-side weight vectors).
    """
    weights: dict[str, list] = {}
    witness: int | None = None
    holds = True
    for side in system.non_pivots():
        w = _side_coefficient_sums(config, side, derivative=True)
        for p, beta in system.beta.get(side, {}).items():
            w = w - beta * _side_coefficient_sums(config, p, derivative=True)
        weights[side.key()] = [[float(z.real), float(z.imag)] for z in w]
        bad = np.where(np.abs(w) > 1e-12)[0]
        if bad.size and holds:
            holds = False
            witness = int(bad[0]) + 1
    return holds, witness, weights


@dataclass
class AdmissibleSet:
    """Affine solution set of the vertex-matching system for constant vectors."""

    empty: bool
    particular: np.ndarray | None      # minimum-norm solution, length N
    null_basis: np.ndarray | None      # N x d orthonormal basis, d may be 0
    residual: float

    def candidates(self) -> list[np.ndarray]:
        """Particular solution plus one representative per null direction."""
        if self.empty:
            return []
        assert self.particular is not None
        out = [self.particular]
        if self.null_basis is not None:
            for q in self.null_basis.T:
                out.append(self.particular + q)
        return out

    def to_dict(self) -> dict:
        return {
            "empty": self.empty,
            "residual": self.residual,
            "particular": None
            if self.particular is None
            else [[float(z.real), float(z.imag)] for z in self.particular],
            "null_dimension": 0 if self.null_basis is None else self.null_basis.shape[1],
        }


def admissible_vectors(
    config: ValidatedConfig, bv0: Mapping[SideId, complex]
) -> AdmissibleSet:
    """Solve sum_k b_k(0) C_k = -bv0(side) over all sides, by least squares.

    Residual above 1e-8 means no constant vector matches the supplied vertex
    values (the function is not admissible) and the set is empty.
    """
    sides = list(config.sides())
    q = np.zeros((len(sides), config.n_angles), dtype=complex)
    rhs = np.zeros(len(sides), dtype=complex)
    for i, side in enumerate(sides):
        q[i] = _side_coefficient_sums(config, side, derivative=False)
        rhs[i] = -complex(bv0.get(side, 0.0))
    sol, _, _, svals = np.linalg.lstsq(q, rhs, rcond=None)
    residual = float(np.linalg.norm(q @ sol - rhs))
    if residual > 1e-8:
        return AdmissibleSet(empty=True, particular=None, null_basis=None, residual=residual)
    _, s, vh = np.linalg.svd(q)
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > 1e-10 * smax))
    null = vh[rank:].conj().T
    return AdmissibleSet(
        empty=False,
        particular=sol,
        null_basis=null if null.shape[1] else None,
        residual=residual,
    )


def constant_trace(config: ValidatedConfig, side: SideId, c: np.ndarray) -> SmoothTrace:
    """Side trace of the constant component vector C, linearized at the vertex."""
    b0 = _side_coefficient_sums(config, side, derivative=False) @ c
    b1 = _side_coefficient_sums(config, side, derivative=True) @ c
    return SmoothTrace(value=lambda r: b0 + b1 * r, derivative=lambda r: complex(b1))


# ---------------------------------------------------------------------------
# The two smoothness side conditions
# ---------------------------------------------------------------------------

@dataclass
class ConditionResult:
    holds_on_evidence: bool
    witness: dict | None
    evidence: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "holds_on_evidence": self.holds_on_evidence,
            "witness": self.witness,
            "evidence": list(self.evidence),
        }


def check_condition4(
    config: ValidatedConfig,
    system: TangentialSystem,
    v_trace_sets: Sequence[Mapping[SideId, Trace]] = (),
    epsilon: float | None = None,
) -> ConditionResult:
    """Constant-vector part (exact, by linearity) plus per-sample trace checks.

    The universal quantifier over exterior data cannot be decided from finitely
    many samples; a True result therefore only certifies the supplied evidence.
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    holds, witness_idx, weights = constant_vector_consistency(config, system)
    evidence = [{"check": "constant-vectors", "weights": weights, "holds": holds}]
    if not holds:
        return ConditionResult(
            holds_on_evidence=False,
            witness={"kind": "constant-vector", "basis_index": witness_idx},
            evidence=evidence,
        )
    for idx, traces in enumerate(v_trace_sets):
        report = consistency_check(system, traces, epsilon)
        evidence.append({"check": f"v-sample-{idx}", "report": report.to_dict()})
        if not report.consistent:
            return ConditionResult(
                holds_on_evidence=False,
                witness={"kind": "v-sample", "index": idx},
                evidence=evidence,
            )
    return ConditionResult(holds_on_evidence=True, witness=None, evidence=evidence)


def check_condition4prime(
    config: ValidatedConfig,
    system: TangentialSystem,
    samples: Sequence[tuple[Mapping[SideId, Trace], Mapping[SideId, complex] | None]] = (),
    epsilon: float | None = None,
) -> ConditionResult:
    """Consistency of combined traces over the admissible constant vectors.

    Each sample is (side traces of the exterior data, optional vertex values);
    missing vertex values default to the trace values at r -> 0.  Samples with
    an empty admissible set are skipped; for the rest the particular solution
    and one representative per null direction are checked (the combination map
    is affine in C, so this covers the whole admissible set for smooth data).
    """
    epsilon = config.epsilon if epsilon is None else epsilon
    if not samples:
        samples = [({side: zero_trace() for side in config.sides()}, None)]
    evidence: list[dict] = []
    for idx, (traces, bv0) in enumerate(samples):
        if bv0 is None:
            bv0 = {}
            for side in config.sides():
                t = traces[side]
                if isinstance(t, SmoothTrace):
                    bv0[side] = t.value(0.0)
                else:
                    bv0[side] = complex(t.values[-1])
        adm = admissible_vectors(config, bv0)
        if adm.empty:
            evidence.append({"sample": idx, "admissible": adm.to_dict(), "skipped": True})
            continue
        for c_idx, c in enumerate(adm.candidates()):
            combined = {
                side: traces[side] + constant_trace(config, side, c)
                for side in config.sides()
            }
            report = consistency_check(system, combined, epsilon)
            evidence.append(
                {
                    "sample": idx,
                    "candidate": c_idx,
                    "admissible": adm.to_dict(),
                    "report": report.to_dict(),
                }
            )
            if not report.consistent:
                return ConditionResult(
                    holds_on_evidence=False,
                    witness={
                        "kind": "admissible-vector",
                        "sample": idx,
                        "vector": [[float(z.real), float(z.imag)] for z in c],
                    },
                    evidence=evidence,
                )
    return ConditionResult(holds_on_evidence=True, witness=None, evidence=evidence)
