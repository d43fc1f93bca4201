"""Eigenvalue search and classification for the discretized operator family.

Zeros of det M_n(lam) inside a horizontal band are counted with the argument
principle along rectangle contours, isolated by recursive subdivision,
refined by multiplicity-aware Newton iteration on log det, and validated by
grid refinement n -> 2n.  Each eigenvalue is then classified as proper
(polynomial eigenfields, no associated vector) or improper.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import ValidatedConfig
from .errors import ContourTooCloseToZero, ExactSingular, NotAnEigenvalue
from .pencil import DiscretizedPencil, discretize

NULLITY_RTOL = 1e-8          # sigma_k / sigma_max below this counts toward the null space
ASSOCIATED_RTOL = 1e-8       # rank threshold for the coupling matrix W* M' V
STABLE_TOL = 1e-8            # n -> 2n movement below this marks a root stable
UNSTABLE_TOL = 1e-6          # movement above this rejects the root entirely
DEDUP_TOL = 1e-8
BAND_PAD = 1e-3              # search-rectangle padding beyond the requested band

Rect = tuple[float, float, float, float]  # (re_min, re_max, im_min, im_max)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CORNER_PENCIL_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    nthreads = _threads()
    if nthreads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(nthreads, len(items))) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class BandQuery:
    """Search request: band c1 <= Im lam < c2, |Re lam| <= re_range."""

    c1: float = -1.0
    c2: float = 0.0
    re_range: float = 10.0
    n: int = 48
    tol_root: float = 1e-10
    delta_edge: float = 1e-9

    def __post_init__(self):
        if not self.c1 < self.c2:
            raise ValueError(f"need c1 < c2, got ({self.c1}, {self.c2})")
        if not self.re_range > 0:
            raise ValueError("re_range must be positive")


@dataclass
class EigenvalueRecord:
    lam0: complex
    stable: bool
    refine_movement: float
    geometric_multiplicity: int
    algebraic_multiplicity: int
    eigenbasis: list[list[np.ndarray]]      # per member, per angle sample arrays
    residual: float                          # max ||M v|| / ||v|| over members
    has_associated: bool
    polynomial_degree: int | None
    polynomial_residual: float | None
    classification: str                      # "proper" | "improper"
    edge_flag: str | None = None             # "lower-edge" when |Im - c1| < delta_edge

    def to_dict(self, include_basis: bool = False) -> dict:
        doc = {
            "lambda": [self.lam0.real, self.lam0.imag],
            "stable": self.stable,
            "refine_movement": self.refine_movement,
            "geometric_multiplicity": self.geometric_multiplicity,
            "algebraic_multiplicity": self.algebraic_multiplicity,
            "residual": self.residual,
            "has_associated": self.has_associated,
            "polynomial_degree": self.polynomial_degree,
            "polynomial_residual": self.polynomial_residual,
            "classification": self.classification,
            "edge_flag": self.edge_flag,
        }
        if include_basis:
            doc["eigenbasis"] = [
                [[[z.real, z.imag] for z in phi] for phi in member] for member in self.eigenbasis
            ]
        return doc


@dataclass
class UnstableRoot:
    lam: complex
    movement: float
    multiplicity: int

    def to_dict(self) -> dict:
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "movement": self.movement,
            "multiplicity": self.multiplicity,
        }


@dataclass
class BandResult:
    records: list[EigenvalueRecord]
    unstable: list[UnstableRoot]
    ambiguous_upper: list[complex]          # excluded: within delta_edge of Im = c2
    outside_band: list[complex]             # located in the padded rectangle but off-band
    total_count: int                        # winding count of the padded search rectangle
    count_consistent: bool
    search_rect: Rect
    band: tuple[float, float]
    n: int
    growth_at_re_edge: bool                 # |det| grows past |Re| = re_range (heuristic)
    notes: list[str] = field(default_factory=list)

    def to_dict(self, include_basis: bool = False) -> dict:
        return {
            "band": [self.band[0], self.band[1]],
            "n": self.n,
            "search_rect": list(self.search_rect),
            "total_count": self.total_count,
            "count_consistent": self.count_consistent,
            "growth_at_re_edge": self.growth_at_re_edge,
            "eigenvalues": [r.to_dict(include_basis) for r in self.records],
            "unstable_roots": [u.to_dict() for u in self.unstable],
            "ambiguous_upper_edge": [[z.real, z.imag] for z in self.ambiguous_upper],
            "outside_band": [[z.real, z.imag] for z in self.outside_band],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Argument-principle counting
# ---------------------------------------------------------------------------

def _rect_corners(rect: Rect) -> list[complex]:
    a, b, c, d = rect
    return [complex(a, c), complex(b, c), complex(b, d), complex(a, d)]


def _winding_count(pen: DiscretizedPencil, rect: Rect, min_step_frac: float = 1e-7) -> int:
    """Winding number of det M_n along the rectangle boundary (counterclockwise).

    Phase increments between consecutive samples are kept below pi/2 by
    adaptive bisection; failure to settle means a zero (numerically) on the
    contour and raises ContourTooCloseToZero.
    """
    corners = _rect_corners(rect)
    perimeter = 2.0 * ((rect[1] - rect[0]) + (rect[3] - rect[2]))
    if perimeter <= 0.0:
        return 0
    min_step = max(min_step_frac * perimeter, 1e-13)

    total = 0.0
    for idx in range(4):
        z0, z1 = corners[idx], corners[(idx + 1) % 4]
        edge_len = abs(z1 - z0)
        n_init = max(8, int(math.ceil(edge_len / 0.25)))
        ts = np.linspace(0.0, 1.0, n_init + 1)
        pts = [z0 + t * (z1 - z0) for t in ts]
        try:
            vals = _pmap(pen.det_log, pts)
        except ExactSingular as exc:
            raise ContourTooCloseToZero(str(exc)) from exc
        stack = [(pts[i], vals[i], pts[i + 1], vals[i + 1]) for i in range(n_init)]
        stack.reverse()
        while stack:
            pa, va, pb, vb = stack.pop()
            dphi = (vb[1] - va[1] + math.pi) % (2.0 * math.pi) - math.pi
            if abs(dphi) < 0.5 * math.pi:
                total += dphi
                continue
            if abs(pb - pa) < min_step:
                raise ContourTooCloseToZero(
                    f"phase increment {dphi:.3f} will not settle near {0.5 * (pa + pb)}"
                )
            pm = 0.5 * (pa + pb)
            try:
                vm = pen.det_log(pm)
            except ExactSingular as exc:
                raise ContourTooCloseToZero(str(exc)) from exc
            stack.append((pm, vm, pb, vb))
            stack.append((pa, va, pm, vm))

    winding = total / (2.0 * math.pi)
    count = int(round(winding))
    if abs(winding - count) > 0.25:
        raise ContourTooCloseToZero(f"non-integer winding {winding:.4f} on {rect}")
    return count


def _count_with_retries(pen: DiscretizedPencil, rect: Rect, attempts: int = 3) -> tuple[int, Rect]:
    """Count zeros, nudging the rectangle outward when a zero sits on the contour."""
    a, b, c, d = rect
    if a >= b or c >= d:
        return 0, rect
    diag = math.hypot(b - a, d - c)
    for attempt in range(attempts + 1):
        shift = attempt * 1e-6 * diag
        grown = (a - shift, b + shift, c - shift, d + shift)
        try:
            return _winding_count(pen, grown), grown
        except ContourTooCloseToZero:
            if attempt == attempts:
                raise
    raise ContourTooCloseToZero(f"could not separate contour of {rect}")  # pragma: no cover


def count_zeros(config: ValidatedConfig, rect: Rect, n: int) -> int:
    """Number of determinant zeros (with multiplicity) inside the rectangle."""
    pen = discretize(config, n)
    count, _ = _count_with_retries(pen, rect)
    return count


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------

def _newton_refine(
    pen: DiscretizedPencil,
    lam: complex,
    tol: float,
    multiplicity: int = 1,
    max_iter: int = 30,
) -> tuple[complex, bool]:
    """Multiplicity-aware Newton on log det; secant on the determinant as fallback."""
    z = complex(lam)
    for _ in range(max_iter):
        m = pen.matrix(z)
        try:
            lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
        except Exception:
            z += tol
            continue
        diag = np.diag(lu)
        if np.any(diag == 0.0):
            z += 10.0 * tol
            continue
        x = scipy.linalg.lu_solve((lu, piv), pen.derivative(z), check_finite=False)
        tr = np.trace(x)
        if tr == 0.0:
            break
        step = complex(-multiplicity / tr)
        z += step
        if abs(step) < tol:
            return z, True

    # Secant on the (scale-free) determinant ratio.
    z0, z1 = z, z + max(10.0 * tol, 1e-9)
    try:
        l0 = pen.det_log(z0)
        l1 = pen.det_log(z1)
    except ExactSingular:
        return z, True
    for _ in range(60):
        ratio = cmath.exp(complex(l0[0] - l1[0], l0[1] - l1[1]))  # f0 / f1
        denom = 1.0 - ratio
        if denom == 0.0:
            break
        step = -(z1 - z0) / denom
        z0, l0 = z1, l1
        z1 = complex(z1 + step)
        try:
            l1 = pen.det_log(z1)
        except ExactSingular:
            return z1, True
        if abs(step) < tol:
            return z1, True
    return z1, False


# ---------------------------------------------------------------------------
# Null spaces, associated vectors, polynomial test
# ---------------------------------------------------------------------------

def _split_members(vec: np.ndarray, n: int, n_angles: int) -> list[np.ndarray]:
    return [vec[j * n : (j + 1) * n].copy() for j in range(n_angles)]


def _normalize_member(vec: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(vec)))
    peak = vec[idx]
    if peak == 0.0:
        return vec
    return vec * (abs(peak) / peak) / abs(peak)


def eigenbasis(config: ValidatedConfig, lam0: complex, n: int) -> list[list[np.ndarray]]:
    """Right null basis of M_n(lam0), one list of per-angle sample arrays per member.

    Members are normalized to max-abs 1 with the peak entry rotated to the
    positive real axis; raises NotAnEigenvalue when no singular value falls
    below the relative nullity threshold.
    """
    pen = discretize(config, n)
    m = pen.matrix(lam0)
    _, svals, vh = np.linalg.svd(m)
    smax = svals[0] if svals[0] > 0 else 1.0
    null_idx = np.where(svals / smax < NULLITY_RTOL)[0]
    if null_idx.size == 0:
        raise NotAnEigenvalue(
            f"smallest singular ratio {svals[-1] / smax:.3e} at lam={lam0} is above {NULLITY_RTOL}"
        )
    members = []
    for i in sorted(null_idx):
        vec = _normalize_member(vh[i].conj())
        members.append(_split_members(vec, pen.n, pen.n_angles))
    return members


def _stack_member(member: list[np.ndarray]) -> np.ndarray:
    return np.concatenate(member)


def has_associated(
    config: ValidatedConfig,
    lam0: complex,
    basis: list[list[np.ndarray]],
    n: int,
    algebraic_multiplicity: int | None = None,
) -> bool:
    """True when some eigenvector at lam0 admits a length-2 Jordan chain.

    Primary test: the coupling matrix W* M'(lam0) V (W, V the left/right null
    bases) is rank-deficient.  When the caller supplies the contour
    (algebraic) multiplicity, an excess over the geometric multiplicity
    corroborates a Jordan block and forces True.
    """
    pen = discretize(config, n)
    m = pen.matrix(lam0)
    g = len(basis)
    if g == 0:
        raise NotAnEigenvalue(f"empty basis at lam={lam0}")
    u, svals, _ = np.linalg.svd(m)
    smax = svals[0] if svals[0] > 0 else 1.0
    if svals[-1] / smax >= NULLITY_RTOL:
        raise NotAnEigenvalue(f"lam={lam0} is not within the nullity threshold")

    w = u[:, -g:]
    v = np.column_stack([_stack_member(member) for member in basis])
    v, _ = np.linalg.qr(v)
    mp = pen.derivative(lam0)
    coupling = w.conj().T @ mp @ v
    s = np.linalg.svd(coupling, compute_uv=False)
    scale = max(float(s[0]) if s.size else 0.0, float(np.linalg.norm(mp, 2)))
    rank = int(np.sum(s > ASSOCIATED_RTOL * scale))
    deficient = rank < g
    if algebraic_multiplicity is not None and algebraic_multiplicity > g:
        return True
    return deficient


def polynomial_degree_test(
    config: ValidatedConfig,
    lam0: complex,
    basis: list[list[np.ndarray]],
    n: int,
    tol: float = 1e-7,
) -> tuple[int, float] | None:
    """Degree m when every eigenfield r^{i lam0} phi_j is a polynomial of degree m.

    Requires i*lam0 within tol of a nonnegative integer m, and every phi_j to
    sit (relative residual < tol) in the span of exp(i (m - 2l) omega),
    l = 0..m — the unit-circle restrictions of homogeneous degree-m
    polynomials.  Returns (m, worst residual) or None.
    """
    il = 1j * lam0
    m_guess = int(round(il.real))
    if m_guess < 0 or abs(il - m_guess) >= tol:
        return None
    pen = discretize(config, n)
    worst = 0.0
    freqs = np.array([m_guess - 2 * l for l in range(m_guess + 1)])
    for member in basis:
        for j, phi in enumerate(member, start=1):
            norm = np.linalg.norm(phi)
            if norm == 0.0:
                continue
            design = np.exp(1j * np.outer(pen.nodes[j - 1], freqs))
            _, res, _, _ = np.linalg.lstsq(design, phi, rcond=None)
            fit = design @ np.linalg.lstsq(design, phi, rcond=None)[0]
            rel = float(np.linalg.norm(phi - fit) / norm)
            worst = max(worst, rel)
            if rel >= tol:
                return None
    return m_guess, worst


def classify(record: EigenvalueRecord) -> str:
    """Definition-level classification: proper iff polynomial and chain-free."""
    if record.has_associated:
        return "improper"
    if record.polynomial_degree is None:
        return "improper"
    return "proper"


# ---------------------------------------------------------------------------
# Band search
# ---------------------------------------------------------------------------

def _subdivide(pen: DiscretizedPencil, rect: Rect, total: int, min_diag: float) -> list[tuple[complex, int]]:
    """Isolate zeros: return (cell center, cell count) with count 1 per cell
    unless the cell shrank to min_diag without separating (clustered zeros)."""
    leaves: list[tuple[complex, int]] = []
    stack: list[tuple[Rect, int]] = [(rect, total)]
    while stack:
        cell, m = stack.pop()
        if m == 0:
            continue
        a, b, c, d = cell
        diag = math.hypot(b - a, d - c)
        if m == 1 or diag < min_diag:
            leaves.append((complex(0.5 * (a + b), 0.5 * (c + d)), m))
            continue
        split_re = (b - a) >= (d - c)
        counted = None
        for jitter in (0.5, 0.53, 0.47, 0.56):
            if split_re:
                mid = a + jitter * (b - a)
                first: Rect = (a, mid, c, d)
                second: Rect = (mid, b, c, d)
            else:
                mid = c + jitter * (d - c)
                first = (a, b, c, mid)
                second = (a, b, mid, d)
            try:
                m1 = _winding_count(pen, first)
                m2 = _winding_count(pen, second)
            except ContourTooCloseToZero:
                continue
            if m1 + m2 == m:
                counted = (first, m1, second, m2)
                break
        if counted is None:
            # Could not split cleanly; treat the cell as one cluster.
            leaves.append((complex(0.5 * (a + b), 0.5 * (c + d)), m))
            continue
        stack.append((counted[0], counted[1]))
        stack.append((counted[2], counted[3]))
    return leaves


def _growth_heuristic(pen: DiscretizedPencil, band: BandQuery) -> bool:
    ims = (band.c1, 0.5 * (band.c1 + band.c2), band.c2)
    try:
        for im in ims:
            for sign in (-1.0, 1.0):
                near = pen.det_log(complex(sign * band.re_range, im))[0]
                far = pen.det_log(complex(sign * 1.5 * band.re_range, im))[0]
                if far <= near:
                    return False
    except ExactSingular:
        return False
    return True


def locate_eigenvalues(config: ValidatedConfig, band: BandQuery | None = None) -> BandResult:
    """Find, refine, and classify every determinant zero in the queried band.

    The search rectangle is padded by BAND_PAD so that zeros sitting exactly
    on the band edges are still captured; band membership is decided
    afterwards (closed at c1, open at c2, ambiguity within delta_edge
    reported).  Every root is re-refined on the doubled grid; movement above
    UNSTABLE_TOL rejects it, movement above STABLE_TOL clears its stable flag.
    """
    band = band or BandQuery()
    n = band.n
    pen = discretize(config, n)
    pen2 = discretize(config, 2 * n)
    rect: Rect = (
        -band.re_range,
        band.re_range,
        band.c1 - BAND_PAD,
        band.c2 + BAND_PAD,
    )
    total, rect_used = _count_with_retries(pen, rect)
    notes: list[str] = []
    growth = _growth_heuristic(pen, band)

    records: list[EigenvalueRecord] = []
    unstable: list[UnstableRoot] = []
    ambiguous_upper: list[complex] = []
    outside: list[complex] = []

    if total > 0:
        leaves = _subdivide(pen, rect_used, total, min_diag=1e-5)

        def refine_leaf(leaf):
            center, mult = leaf
            lam_n, ok_n = _newton_refine(pen, center, band.tol_root, multiplicity=mult)
            lam_2n, ok_2n = _newton_refine(pen2, lam_n, band.tol_root, multiplicity=mult)
            return (lam_n, lam_2n, ok_n and ok_2n, mult)

        refined = _pmap(refine_leaf, leaves)

        # Merge candidates that converged to the same point, and cluster roots
        # whose separation is inside their own grid-refinement uncertainty: a
        # multiple zero of the exact family splits under collocation into
        # nearby simple zeros whose individually drifting positions average to
        # a grid-stable centroid.
        merged: list[dict] = []
        for lam_n, lam_2n, ok, mult in sorted(refined, key=lambda t: (t[1].real, t[1].imag)):
            movement = float(abs(lam_2n - lam_n))
            placed = False
            for entry in merged:
                rep = entry["lam_2n"] / entry["mult"]
                radius = max(
                    DEDUP_TOL,
                    100.0 * band.tol_root,
                    20.0 * max(movement, entry["max_movement"]),
                )
                if abs(rep - lam_2n) < radius:
                    entry["lam_n"] += mult * lam_n
                    entry["lam_2n"] += mult * lam_2n
                    entry["ok"] = entry["ok"] or ok
                    entry["mult"] += mult
                    entry["max_movement"] = max(entry["max_movement"], movement)
                    placed = True
                    break
            if not placed:
                merged.append(
                    {
                        "lam_n": mult * lam_n,
                        "lam_2n": mult * lam_2n,
                        "ok": ok,
                        "mult": mult,
                        "max_movement": movement,
                    }
                )
        clusters = [
            (e["lam_n"] / e["mult"], e["lam_2n"] / e["mult"], e["ok"], e["mult"])
            for e in merged
        ]

        count_located = sum(entry[3] for entry in clusters)
        count_consistent = count_located == total
        if not count_consistent:
            notes.append(
                f"located multiplicity {count_located} != winding count {total}"
            )

        for lam_n, lam_2n, ok, mult in clusters:
            movement = float(abs(lam_2n - lam_n))
            if (not ok) or movement > UNSTABLE_TOL:
                unstable.append(UnstableRoot(lam=lam_2n, movement=movement, multiplicity=mult))
                continue
            lam0 = lam_2n
            if lam0.imag >= band.c2 - band.delta_edge:
                if abs(lam0.imag - band.c2) < band.delta_edge:
                    ambiguous_upper.append(lam0)
                else:
                    outside.append(lam0)
                continue
            if lam0.imag < band.c1 - band.delta_edge:
                outside.append(lam0)
                continue
            edge_flag = "lower-edge" if abs(lam0.imag - band.c1) < band.delta_edge else None

            basis = eigenbasis(config, lam0, n)
            mat = pen.matrix(lam0)
            residual = max(
                float(np.linalg.norm(mat @ _stack_member(member)) / np.linalg.norm(_stack_member(member)))
                for member in basis
            )
            assoc = has_associated(config, lam0, basis, n, algebraic_multiplicity=mult)
            poly = polynomial_degree_test(config, lam0, basis, n)
            record = EigenvalueRecord(
                lam0=lam0,
                stable=movement < STABLE_TOL,
                refine_movement=movement,
                geometric_multiplicity=len(basis),
                algebraic_multiplicity=mult,
                eigenbasis=basis,
                residual=residual,
                has_associated=assoc,
                polynomial_degree=None if poly is None else poly[0],
                polynomial_residual=None if poly is None else poly[1],
                classification="",
                edge_flag=edge_flag,
            )
            record.classification = classify(record)
            records.append(record)
            if len(basis) != mult:
                notes.append(
                    f"lam={lam0:.9g}: geometric multiplicity {len(basis)} != winding multiplicity {mult}"
                )
    else:
        count_consistent = True

    records.sort(key=lambda r: (r.lam0.real, r.lam0.imag))
    return BandResult(
        records=records,
        unstable=unstable,
        ambiguous_upper=sorted(ambiguous_upper, key=lambda z: (z.real, z.imag)),
        outside_band=sorted(outside, key=lambda z: (z.real, z.imag)),
        total_count=total,
        count_consistent=count_consistent,
        search_rect=rect_used,
        band=(band.c1, band.c2),
        n=n,
        growth_at_re_edge=growth,
        notes=notes,
    )
