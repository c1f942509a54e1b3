"""Two-qubit states, spin projectors, and Born-rule box generation.

Basis order |00>, |01>, |10>, |11> with Alice as the left tensor factor.
Outcome bit m=0 corresponds to the +1 eigenvalue of the measured spin
direction, matching the box convention (-1)^m.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .boxes import Box

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNIT_TOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


class NotUnit(ValueError):
    """A measurement direction is not a unit vector."""


class OutOfRange(ValueError):
    """A state or scenario parameter lies outside its documented range."""


def spin_operator(direction: np.ndarray) -> np.ndarray:
    d = np.asarray(direction, dtype=float).reshape(3)
    return d[0] * SIGMA_X + d[1] * SIGMA_Y + d[2] * SIGMA_Z


@dataclass(frozen=True)
class TwoQubitState:
    """Validated 4x4 density matrix: Hermitian, unit trace, positive semidefinite."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise OutOfRange(f"density matrix must be 4x4, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
            raise OutOfRange("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
            raise OutOfRange(f"trace must be 1, got {np.trace(rho):.12g}")
        lo = float(np.linalg.eigvalsh(rho)[0])
        if lo < -PSD_TOL:
            raise OutOfRange(f"density matrix is not positive semidefinite (lambda_min={lo:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def marginal_a(self) -> np.ndarray:
        return np.trace(self.rho.reshape(2, 2, 2, 2), axis1=1, axis2=3)

    def marginal_b(self) -> np.ndarray:
        return np.trace(self.rho.reshape(2, 2, 2, 2), axis1=0, axis2=2)

    def to_dict(self) -> dict:
        return {"rho": [[[z.real, z.imag] for z in row] for row in self.rho]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "TwoQubitState":
        raw = np.asarray(data["rho"], dtype=float)
        if raw.shape != (4, 4, 2):
            raise OutOfRange(f"state JSON must be a 4x4 array of [re, im] pairs, got {raw.shape}")
        return cls(raw[..., 0] + 1j * raw[..., 1])


@dataclass(frozen=True)
class MeasurementSettings:
    """Four Bloch directions: a0, a1 for Alice and b0, b1 for Bob."""

    a0: np.ndarray
    a1: np.ndarray
    b0: np.ndarray
    b1: np.ndarray

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            norm = float(np.linalg.norm(v))
            if abs(norm - 1.0) > UNIT_TOL:
                raise NotUnit(f"direction {name} has norm {norm:.12g}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def alice(self) -> tuple[np.ndarray, np.ndarray]:
        return self.a0, self.a1

    def bob(self) -> tuple[np.ndarray, np.ndarray]:
        return self.b0, self.b1

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist() for name in ("a0", "a1", "b0", "b1")}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementSettings":
        return cls(*(np.asarray(data[name], dtype=float) for name in ("a0", "a1", "b0", "b1")))


def projector(direction: np.ndarray, outcome_bit: int) -> np.ndarray:
    """Spin projector (I + (-1)^m d.sigma)/2 onto the outcome's eigenspace."""
    d = np.asarray(direction, dtype=float).reshape(3)
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > UNIT_TOL:
        raise NotUnit(f"direction has norm {norm:.12g}")
    if outcome_bit not in (0, 1):
        raise OutOfRange("outcome bit must be 0 or 1")
    return 0.5 * (IDENTITY_2 + (-1) ** outcome_bit * spin_operator(d))


def born_box(state: TwoQubitState, settings: MeasurementSettings) -> Box:
    """The box P[i,j,m,n] = Tr(rho Pi_m(a_i) (x) Pi_n(b_j)) predicted by the state."""
    pa = [[projector(d, m) for m in (0, 1)] for d in settings.alice()]
    pb = [[projector(d, n) for n in (0, 1)] for d in settings.bob()]
    probs = np.empty((2, 2, 2, 2))
    for i, j, m, n in product(range(2), repeat=4):
        probs[i, j, m, n] = np.trace(state.rho @ np.kron(pa[i][m], pb[j][n])).real
    return Box(probs)


def correlator_matrix(state: TwoQubitState, settings: MeasurementSettings) -> np.ndarray:
    """<(a_i.sigma) (x) (b_j.sigma)>: an independent path to the box correlators."""
    out = np.empty((2, 2))
    for i, a in enumerate(settings.alice()):
        for j, b in enumerate(settings.bob()):
            out[i, j] = np.trace(state.rho @ np.kron(spin_operator(a), spin_operator(b))).real
    return out


def state_bell_psi_plus() -> TwoQubitState:
    """Projector onto (|00> + |11>)/sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return TwoQubitState(np.outer(v, v.conj()))


def state_schmidt(theta: float) -> TwoQubitState:
    """Pure state cos(theta)|00> + sin(theta)|11> in Pauli form, theta in [0, pi/4]."""
    if not (-1e-12 <= theta <= np.pi / 4 + 1e-12):
        raise OutOfRange(f"theta must lie in [0, pi/4], got {theta:.12g}")
    c, s = np.cos(2.0 * theta), np.sin(2.0 * theta)
    rho = 0.25 * (np.kron(IDENTITY_2, IDENTITY_2)
                  + c * (np.kron(SIGMA_Z, IDENTITY_2) + np.kron(IDENTITY_2, SIGMA_Z))
                  + s * (np.kron(SIGMA_X, SIGMA_X) - np.kron(SIGMA_Y, SIGMA_Y))
                  + np.kron(SIGMA_Z, SIGMA_Z))
    return TwoQubitState(rho)


def state_werner(p: float) -> TwoQubitState:
    """Bell state mixed with white noise: p |psi+><psi+| + (1-p) I/4."""
    if not (-1e-12 <= p <= 1 + 1e-12):
        raise OutOfRange(f"p must lie in [0, 1], got {p:.12g}")
    return TwoQubitState(p * state_bell_psi_plus().rho + (1.0 - p) * np.eye(4, dtype=complex) / 4.0)


def state_colored(p: float) -> TwoQubitState:
    """Bell state mixed with the classically correlated state (|00><00| + |11><11|)/2."""
    if not (-1e-12 <= p <= 1 + 1e-12):
        raise OutOfRange(f"p must lie in [0, 1], got {p:.12g}")
    cc = np.zeros((4, 4), dtype=complex)
    cc[0, 0] = cc[3, 3] = 0.5
    return TwoQubitState(p * state_bell_psi_plus().rho + (1.0 - p) * cc)


def random_pure_state(rng: np.random.Generator) -> TwoQubitState:
    """Normalized standard-Gaussian 4-vector projector."""
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    return TwoQubitState(np.outer(v, v.conj()))


def random_mixed_state(rng: np.random.Generator) -> TwoQubitState:
    """Convex mixture of two random pure states."""
    lam = rng.random()
    return TwoQubitState(lam * random_pure_state(rng).rho + (1.0 - lam) * random_pure_state(rng).rho)


def random_direction(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_settings(rng: np.random.Generator) -> MeasurementSettings:
    return MeasurementSettings(*(random_direction(rng) for _ in range(4)))
