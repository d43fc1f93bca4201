"""Geometry and coefficients of the model nonlocal problem at one corner orbit.

A problem instance consists of N plane angles K_j = {r > 0, |omega| < omega_j},
a frozen second-order principal part per angle, and, on each side of each
angle, a list of trace terms.  Term s=0 is always the identity trace; every
further term evaluates a neighbouring component after a rotation+scaling map
that must send the side strictly inside the target angle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AngleOutOfRange,
    ConfigError,
    ImageOutsideTargetAngle,
    MissingIdentityTerm,
    NonElliptic,
    NonpositiveHomothety,
)

# Reject boundary-touching images when within this distance of equality.
IMAGE_STRICTNESS = 1e-10
# Ellipticity test: reject when a characteristic root sits this close to |z| = 1.
ELLIPTIC_TOL = 1e-9

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SideId:
    """Side gamma_{j,sigma} of angle j, at polar angle (-1)^sigma * omega_j."""

    j: int          # 1-based angle index
    sigma: int      # 1 (lower side) or 2 (upper side)

    def __post_init__(self):
        if self.sigma not in (1, 2):
            raise ConfigError(f"sigma must be 1 or 2, got {self.sigma}")
        if self.j < 1:
            raise ConfigError(f"angle index must be >= 1, got {self.j}")

    def key(self) -> str:
        return f"{self.j},{self.sigma}"


@dataclass(frozen=True)
class NonlocalTerm:
    """One trace term b * U_k(G y) with G = rotation(rotation) o scaling(homothety)."""

    target: int                  # 1-based index k of the evaluated component
    rotation: float              # rotation angle of G, radians
    homothety: float             # scaling factor of G, > 0
    coeff0: complex = 1.0 + 0j   # coefficient value at the vertex
    coeff_r_deriv0: complex = 0j  # radial derivative of the coefficient at the vertex

    def __post_init__(self):
        object.__setattr__(self, "coeff0", complex(self.coeff0))
        object.__setattr__(self, "coeff_r_deriv0", complex(self.coeff_r_deriv0))

    @property
    def is_identity(self) -> bool:
        return (
            self.rotation == 0.0
            and self.homothety == 1.0
            and self.coeff0 == 1.0 + 0j
            and self.coeff_r_deriv0 == 0j
        )


def identity_term(j: int) -> NonlocalTerm:
    """The mandatory s=0 term of every side of angle j."""
    return NonlocalTerm(target=j, rotation=0.0, homothety=1.0, coeff0=1.0, coeff_r_deriv0=0.0)


@dataclass(frozen=True)
class OrbitConfig:
    """Raw, unvalidated description of the model problem.

    ``terms[j-1]`` holds the pair (terms on sigma=1, terms on sigma=2) for
    angle j; each entry is a tuple of :class:`NonlocalTerm`, identity first.
    ``principal_parts[j-1]`` is (a11, a12, a22) of the symmetric coefficient
    matrix of the frozen second-order operator.
    """

    angles: tuple[float, ...]
    principal_parts: tuple[tuple[complex, complex, complex], ...]
    terms: tuple[tuple[tuple[NonlocalTerm, ...], tuple[NonlocalTerm, ...]], ...]
    epsilon: float

    @property
    def n_angles(self) -> int:
        return len(self.angles)


def orbit_config(
    angles: Sequence[float],
    principal_parts: Sequence | None = None,
    terms=None,
    epsilon: float = 1.0,
    auto_identity: bool = True,
) -> OrbitConfig:
    """Build an :class:`OrbitConfig`, coercing flexible inputs.

    ``principal_parts`` entries may be 2x2 array-likes or (a11, a12, a22)
    triples; ``None`` means the Laplacian for every angle.  ``terms`` maps
    (j, sigma) or :class:`SideId` to a list of extra terms; identity terms are
    prepended when ``auto_identity`` is set.
    """
    angles = tuple(float(w) for w in angles)
    n = len(angles)
    if principal_parts is None:
        pparts = tuple((1.0 + 0j, 0j, 1.0 + 0j) for _ in range(n))
    else:
        pp = []
        for entry in principal_parts:
            arr = np.asarray(entry, dtype=complex)
            if arr.shape == (2, 2):
                pp.append((complex(arr[0, 0]), complex(arr[0, 1]), complex(arr[1, 1])))
            elif arr.shape == (3,):
                pp.append((complex(arr[0]), complex(arr[1]), complex(arr[2])))
            else:
                raise ConfigError(f"principal part must be 2x2 or (a11,a12,a22), got shape {arr.shape}")
        pparts = tuple(pp)

    extra: dict[tuple[int, int], list[NonlocalTerm]] = {}
    if terms:
        for key, lst in terms.items():
            if isinstance(key, SideId):
                key = (key.j, key.sigma)
            extra[(int(key[0]), int(key[1]))] = list(lst)

    built = []
    for j in range(1, n + 1):
        per_side = []
        for sigma in (1, 2):
            lst = list(extra.get((j, sigma), ()))
            if auto_identity and not (lst and lst[0].is_identity and lst[0].target == j):
                lst = [identity_term(j)] + lst
            per_side.append(tuple(lst))
        built.append((per_side[0], per_side[1]))
    return OrbitConfig(angles=angles, principal_parts=pparts, terms=tuple(built), epsilon=float(epsilon))


def _has_real_characteristic_zero(a11: complex, a12: complex, a22: complex) -> bool:
    """True iff a11*x^2 + 2*a12*x*y + a22*y^2 vanishes for some real (x, y) != 0.

    Substituting (x, y) = (cos w, sin w) and z = exp(2iw) turns the question
    into whether ((a11-a22)/2 - i*a12)/2 * z^2 + (a11+a22)/2 * z
    + ((a11-a22)/2 + i*a12)/2 has a root on the unit circle.
    """
    alpha = (a11 + a22) / 2.0
    beta = (a11 - a22) / 2.0
    gamma = a12
    coeffs = np.array([(beta - 1j * gamma) / 2.0, alpha, (beta + 1j * gamma) / 2.0])
    scale = float(np.max(np.abs(coeffs)))
    if scale == 0.0:
        return True  # the zero form vanishes everywhere
    roots = np.roots(coeffs)  # np.roots drops exact leading zeros itself
    return bool(np.any(np.abs(np.abs(roots) - 1.0) < ELLIPTIC_TOL))


class ValidatedConfig:
    """Immutable, checked wrapper accepted by all downstream modules."""

    def __init__(self, raw: OrbitConfig):
        self._raw = raw
        self._pencil_cache: dict[int, object] = {}

    @property
    def raw(self) -> OrbitConfig:
        return self._raw

    @property
    def n_angles(self) -> int:
        return self._raw.n_angles

    @property
    def epsilon(self) -> float:
        return self._raw.epsilon

    def angle(self, j: int) -> float:
        return self._raw.angles[j - 1]

    def principal_part(self, j: int) -> np.ndarray:
        a11, a12, a22 = self._raw.principal_parts[j - 1]
        return np.array([[a11, a12], [a12, a22]], dtype=complex)

    def terms(self, side: SideId) -> tuple[NonlocalTerm, ...]:
        return self._raw.terms[side.j - 1][side.sigma - 1]

    def sides(self) -> Iterator[SideId]:
        for j in range(1, self.n_angles + 1):
            for sigma in (1, 2):
                yield SideId(j, sigma)

    def side_tangent(self, side: SideId) -> np.ndarray:
        return side_tangent(side, self._raw)

    def fingerprint(self) -> tuple:
        return (self._raw.angles, self._raw.principal_parts, self._raw.terms, self._raw.epsilon)

    def __eq__(self, other):
        return isinstance(other, ValidatedConfig) and self._raw == other._raw

    def __hash__(self):
        return hash(self.fingerprint())


def validate(config: OrbitConfig | ValidatedConfig) -> ValidatedConfig:
    """Check every structural invariant and return the immutable wrapper.

    Raises :class:`AngleOutOfRange`, :class:`MissingIdentityTerm`,
    :class:`ImageOutsideTargetAngle`, :class:`NonElliptic`,
    :class:`NonpositiveHomothety` or :class:`ConfigError`.
    """
    if isinstance(config, ValidatedConfig):
        config = config.raw
    n = config.n_angles
    if n < 1:
        raise ConfigError("at least one angle is required")
    if not (config.epsilon > 0.0):
        raise ConfigError(f"epsilon must be positive, got {config.epsilon}")
    if len(config.principal_parts) != n or len(config.terms) != n:
        raise ConfigError("angles, principal_parts and terms must have equal length")

    for j, omega in enumerate(config.angles, start=1):
        if not (0.0 < omega < math.pi):
            raise AngleOutOfRange(f"angle {j}: omega={omega} outside (0, pi)")

    for j, (a11, a12, a22) in enumerate(config.principal_parts, start=1):
        if _has_real_characteristic_zero(a11, a12, a22):
            raise NonElliptic(f"principal part of angle {j} has a real characteristic zero")

    for j in range(1, n + 1):
        for sigma in (1, 2):
            side_terms = config.terms[j - 1][sigma - 1]
            if not side_terms:
                raise MissingIdentityTerm(f"side (j={j}, sigma={sigma}) has no terms")
            head = side_terms[0]
            if not (head.is_identity and head.target == j):
                raise MissingIdentityTerm(
                    f"side (j={j}, sigma={sigma}): term s=0 must be the identity trace"
                )
            for s, term in enumerate(side_terms):
                if not (1 <= term.target <= n):
                    raise ConfigError(
                        f"term (j={j}, sigma={sigma}, s={s}): target {term.target} out of range"
                    )
                if not (term.homothety > 0.0):
                    raise NonpositiveHomothety(
                        f"term (j={j}, sigma={sigma}, s={s}): homothety {term.homothety} <= 0"
                    )
                if s == 0:
                    continue
                image = (-1.0) ** sigma * config.angles[j - 1] + term.rotation
                target_opening = config.angles[term.target - 1]
                if abs(image) >= target_opening - IMAGE_STRICTNESS:
                    raise ImageOutsideTargetAngle(j, sigma, term.target, s, image, target_opening)

    return ValidatedConfig(config)


def side_tangent(side: SideId, config: OrbitConfig | ValidatedConfig) -> np.ndarray:
    """Unit vector pointing outward along the ray gamma_{j,sigma}."""
    if isinstance(config, ValidatedConfig):
        config = config.raw
    theta = (-1.0) ** side.sigma * config.angles[side.j - 1]
    return np.array([math.cos(theta), math.sin(theta)])


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def transform_matrix(term: NonlocalTerm) -> np.ndarray:
    """Linear map of the term's point transformation: homothety * rotation."""
    return term.homothety * rotation_matrix(term.rotation)


# ---------------------------------------------------------------------------
# JSON config files (schema documented in docs/config_schema.md)
# ---------------------------------------------------------------------------

def _complex_from_pair(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"expected number or [re, im] pair, got {value!r}")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def parse_config(doc: dict) -> ValidatedConfig:
    """Build and validate a config from a parsed JSON document."""
    try:
        n = int(doc["n"])
        angles = [float(a) for a in doc["angles"]]
        epsilon = float(doc.get("epsilon", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    if len(angles) != n:
        raise ConfigError(f"'angles' has {len(angles)} entries, expected n={n}")

    pparts = []
    for j, entry in enumerate(doc.get("principal_parts", [])):
        pparts.append(
            (
                _complex_from_pair(entry.get("a11", 1.0)),
                _complex_from_pair(entry.get("a12", 0.0)),
                _complex_from_pair(entry.get("a22", 1.0)),
            )
        )
    if not pparts:
        pparts = [(1.0 + 0j, 0j, 1.0 + 0j)] * n
    if len(pparts) != n:
        raise ConfigError(f"'principal_parts' has {len(pparts)} entries, expected n={n}")

    terms: dict[tuple[int, int], list[NonlocalTerm]] = {}
    raw_terms = doc.get("terms", [])
    if raw_terms and len(raw_terms) != n:
        raise ConfigError(f"'terms' has {len(raw_terms)} entries, expected n={n}")
    for j, per_angle in enumerate(raw_terms, start=1):
        for sigma, key in ((1, "sigma1"), (2, "sigma2")):
            lst = []
            for t in per_angle.get(key, []):
                lst.append(
                    NonlocalTerm(
                        target=int(t["target"]),
                        rotation=float(t["rotation"]),
                        homothety=float(t["homothety"]),
                        coeff0=_complex_from_pair(t.get("coeff", 1.0)),
                        coeff_r_deriv0=_complex_from_pair(t.get("coeff_r_deriv", 0.0)),
                    )
                )
            terms[(j, sigma)] = lst

    raw = orbit_config(angles, pparts, terms, epsilon=epsilon, auto_identity=True)
    return validate(raw)


def load_config(path: str | Path) -> ValidatedConfig:
    with open(path) as fh:
        doc = json.load(fh)
    return parse_config(doc)


def config_to_dict(config: OrbitConfig | ValidatedConfig) -> dict:
    """Serialize a config back to the JSON document layout (identity terms dropped)."""
    if isinstance(config, ValidatedConfig):
        config = config.raw
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n": config.n_angles,
        "angles": list(config.angles),
        "principal_parts": [
            {"a11": _pair(a11), "a12": _pair(a12), "a22": _pair(a22)}
            for (a11, a12, a22) in config.principal_parts
        ],
        "terms": [],
        "epsilon": config.epsilon,
    }
    for j in range(1, config.n_angles + 1):
        per_angle = {}
        for sigma, key in ((1, "sigma1"), (2, "sigma2")):
            entries = []
            for term in config.terms[j - 1][sigma - 1][1:]:
                entries.append(
                    {
                        "target": term.target,
                        "rotation": term.rotation,
                        "homothety": term.homothety,
                        "coeff": _pair(term.coeff0),
                        "coeff_r_deriv": _pair(term.coeff_r_deriv0),
                    }
                )
            per_angle[key] = entries
        doc["terms"].append(per_angle)
    return doc
