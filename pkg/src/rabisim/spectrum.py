"""Exact diagonalization and the energy-eigenbasis (dressed) picture."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    FockCutoff,
    HERMITICITY_ATOL,
    ModelParams,
    OperatorMatrix,
    build_hamiltonian,
    lift_cavity,
    lift_qubit,
    annihilation,
    parity_operator,
    qubit_operators,
)

DEGENERACY_GAP = 1e-10
ORTHONORMALITY_SCALE = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    """Spectrum of a Hermitian operator.

    energies ascending; states holds the eigenvectors as columns, so
    states[:, k] belongs to energies[k].  dims carries the tensor-factor
    split of the underlying space when known.
    """

    energies: np.ndarray
    states: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        v = np.asarray(self.states, dtype=np.complex128)
        e.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "states", v)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def ground_state(self) -> np.ndarray:
        return self.states[:, 0]

    def orthonormality_defect(self) -> float:
        g = self.states.conj().T @ self.states
        return float(np.sum(np.abs(g - np.eye(self.dim))))

    def to_dressed(self, op: OperatorMatrix) -> OperatorMatrix:
        """Rotate a bare-basis operator into the eigenbasis."""
        if op.basis_tag != "bare":
            raise ValueError("to_dressed expects a bare-basis operator")
        v = self.states
        return OperatorMatrix(v.conj().T @ op.entries @ v, "dressed")

    def from_dressed(self, m: np.ndarray) -> np.ndarray:
        """Rotate a matrix from the eigenbasis back to the bare basis."""
        v = self.states
        return v @ np.asarray(m) @ v.conj().T


@dataclass(frozen=True)
class DressedOperators:
    """Positive/negative frequency parts of the cavity and qubit dipoles.

    x_plus lowers energy (strictly upper triangular in energy order built
    from a + a+), x_minus = x_plus dagger; s_plus / s_minus are the same
    construction seeded with sigma_x.
    """

    x_plus: OperatorMatrix
    x_minus: OperatorMatrix
    s_plus: OperatorMatrix
    s_minus: OperatorMatrix


def critical_coupling(params: ModelParams) -> float:
    """Coupling where the ground state changes character: sqrt(omega_c*omega_q)/2."""
    return float(np.sqrt(params.omega_c * params.omega_q) / 2.0)


def _fix_phases(states: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real positive."""
    out = states.copy()
    for k in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, k])))
        z = out[i, k]
        if abs(z) > 0:
            out[:, k] *= np.conj(z) / abs(z)
    return out


def _degenerate_groups(energies: np.ndarray, gap: float):
    groups = []
    start = 0
    for k in range(1, len(energies) + 1):
        if k == len(energies) or energies[k] - energies[k - 1] > gap:
            groups.append((start, k))
            start = k
    return groups


def diagonalize(
    h: OperatorMatrix,
    parity: OperatorMatrix | None = None,
    reference: EigenSystem | None = None,
    dims: tuple = (),
) -> EigenSystem:
    """Full spectrum of a Hermitian operator, with deterministic degeneracies.

    Within any group of levels closer than DEGENERACY_GAP the eigenvectors
    returned by LAPACK are an arbitrary rotation; when a parity operator is
    supplied the group is rotated to parity eigenvectors (+1 sector first),
    which pins the basis independent of the path through parameter space.
    A reference spectrum, when given, is only used to align phases for
    continuity along a manual parameter scan.
    """
    defect = h.hermiticity_defect()
    if defect > HERMITICITY_ATOL:
        raise ValueError(f"matrix is not Hermitian: defect {defect:.3e}")
    energies, states = np.linalg.eigh(h.entries)

    if parity is not None:
        for a, b in _degenerate_groups(energies, DEGENERACY_GAP):
            if b - a < 2:
                continue
            block = states[:, a:b]
            p_block = block.conj().T @ parity.entries @ block
            p_block = 0.5 * (p_block + p_block.conj().T)
            vals, rot = np.linalg.eigh(p_block)
            # descending parity: +1 sector first within the group
            order = np.argsort(-vals)
            states[:, a:b] = block @ rot[:, order]

    states = _fix_phases(states)

    if reference is not None:
        if reference.dim != states.shape[0]:
            raise ValueError("reference spectrum has mismatched dimension")
        for k in range(states.shape[1]):
            ov = np.vdot(reference.states[:, k], states[:, k])
            if abs(ov) > 1e-6:
                states[:, k] *= np.conj(ov) / abs(ov)

    return EigenSystem(energies, states, dims)


def diagonalize_model(
    params: ModelParams,
    cutoff: FockCutoff,
    reference: EigenSystem | None = None,
) -> EigenSystem:
    """Diagonalize the cavity-qubit Hamiltonian with parity tie-breaking."""
    h = build_hamiltonian(params, cutoff)
    pi = parity_operator(cutoff)
    return diagonalize(h, parity=pi, reference=reference, dims=(2, cutoff.cavity_dim))


def energy_gap(es: EigenSystem) -> float:
    """First excitation energy above the ground state."""
    if es.energies.size < 2:
        raise ValueError("need at least two levels for a gap")
    return float(es.energies[1] - es.energies[0])


def dressed_frequency_operators(
    es: EigenSystem, bare_op: OperatorMatrix
) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Split a bare Hermitian dipole into energy-lowering and raising parts.

    With eigenstates ordered by energy, the lowering part keeps only matrix
    elements <j|op|k> with E_j < E_k (strict upper triangle); the raising
    part is its adjoint.  At g = 0 the cavity construction reduces to the
    bare annihilation operator written in the eigenbasis.
    """
    full = es.to_dressed(bare_op).entries
    plus = np.triu(full, k=1)
    return (
        OperatorMatrix(plus, "dressed"),
        OperatorMatrix(plus.conj().T, "dressed"),
    )


def dressed_operators(es: EigenSystem, cutoff: FockCutoff) -> DressedOperators:
    """Cavity and qubit frequency-split dipoles for one spectrum."""
    a = annihilation(cutoff)
    x_bare = lift_cavity(OperatorMatrix(a.entries + a.entries.conj().T))
    s_bare = lift_qubit(qubit_operators()["sigma_x"], cutoff)
    x_plus, x_minus = dressed_frequency_operators(es, x_bare)
    s_plus, s_minus = dressed_frequency_operators(es, s_bare)
    return DressedOperators(x_plus, x_minus, s_plus, s_minus)
