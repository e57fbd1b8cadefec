"""Hilbert-space bookkeeping and operator construction.

The joint space is qubit (x) cavity, qubit factor first.  Qubit basis is
|e> = [1, 0], |g> = [0, 1], so sigma_z = diag(1, -1) and sigma_plus |g> = |e>.
All matrices are dense complex numpy arrays wrapped in a thin container that
records which basis they live in ("bare" product basis or "dressed" energy
eigenbasis); mixing the two in one expression is a bug we want loud.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-10
POSITIVITY_FLOOR = -1e-8
CONSTRAINT_ATOL = 1e-12

BASIS_TAGS = ("bare", "dressed")


@dataclass(frozen=True)
class FockCutoff:
    """Photon-number truncation of the cavity mode.

    Keeps Fock states 0..n_max inclusive, so the cavity factor has dimension
    n_max + 1 and the joint space 2 * (n_max + 1).
    """

    n_max: int = 50

    def __post_init__(self):
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def cavity_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)


@dataclass(frozen=True)
class ModelParams:
    """Frequencies of the cavity-qubit Hamiltonian.

    omega_c, omega_q are the cavity and qubit frequencies, g the dipole
    coupling.  With ``constrained=True`` the pair must satisfy
    omega_c * omega_q = 1, the unit system used throughout the sweeps.
    """

    omega_c: float
    omega_q: float
    g: float
    constrained: bool = False

    def __post_init__(self):
        if self.omega_c <= 0 or self.omega_q <= 0:
            raise ValueError("omega_c and omega_q must be positive")
        if self.g < 0:
            raise ValueError(f"coupling g must be >= 0, got {self.g}")
        if self.constrained and abs(self.omega_c * self.omega_q - 1.0) > CONSTRAINT_ATOL:
            raise ValueError(
                "constrained=True requires omega_c*omega_q = 1, got "
                f"{self.omega_c * self.omega_q!r}"
            )

    def with_g(self, g: float) -> "ModelParams":
        return ModelParams(self.omega_c, self.omega_q, g, self.constrained)


def _as_square_complex(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator with a basis tag.

    entries is read-only; binary operations require matching tags.
    """

    entries: np.ndarray
    basis_tag: str = "bare"

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.basis_tag not in BASIS_TAGS:
            raise ValueError(f"basis_tag must be one of {BASIS_TAGS}, got {self.basis_tag!r}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.basis_tag)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        require_same_basis(self, other)
        return OperatorMatrix(self.entries @ other.entries, self.basis_tag)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def require_same_basis(*ops) -> str:
    tags = {op.basis_tag for op in ops}
    if len(tags) > 1:
        raise ValueError(f"operators live in different bases: {sorted(tags)}")
    return next(iter(tags))


@dataclass(frozen=True)
class DensityMatrix:
    """State of the joint system or of one factor.

    dims lists the tensor-factor dimensions, qubit first for joint states,
    e.g. (2, 51) for the full system and (51,) for the reduced cavity.
    """

    entries: np.ndarray
    dims: tuple
    basis_tag: str = "bare"

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.basis_tag not in BASIS_TAGS:
            raise ValueError(f"basis_tag must be one of {BASIS_TAGS}, got {self.basis_tag!r}")
        if int(np.prod(self.dims)) != m.shape[0]:
            raise ValueError(f"dims {self.dims} do not multiply to dimension {m.shape[0]}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_state(cls, state: np.ndarray, dims, basis_tag: str = "bare") -> "DensityMatrix":
        """Projector onto a normalized pure state."""
        v = np.asarray(state, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot build a state from the zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), dims, basis_tag)

    def validate(self, check_positivity: bool = True) -> "DensityMatrix":
        """Check the state invariants, returning self for chaining."""
        defect = float(np.max(np.abs(self.entries - self.entries.conj().T)))
        if defect > HERMITICITY_ATOL:
            raise ValueError(f"density matrix not Hermitian: defect {defect:.3e}")
        tr = complex(np.trace(self.entries))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {tr!r} != 1 beyond tolerance")
        if check_positivity:
            lo = float(np.linalg.eigvalsh(self.entries)[0])
            if lo < POSITIVITY_FLOOR:
                raise ValueError(f"density matrix has eigenvalue {lo:.3e} below floor")
        return self


def annihilation(cutoff: FockCutoff) -> OperatorMatrix:
    """Cavity lowering operator a on the Fock factor alone.

    <n-1| a |n> = sqrt(n); the top row of a dagger is lost to truncation, so
    [a, a+] = 1 holds exactly everywhere except the last Fock level.
    """
    n = cutoff.cavity_dim
    m = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(1, n)
    m[idx - 1, idx] = np.sqrt(idx)
    return OperatorMatrix(m, "bare")


def qubit_operators() -> dict:
    """Pauli set for the two-level factor: sigma_z, sigma_plus, sigma_minus, sigma_x."""
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    sp = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    sm = sp.conj().T
    sx = sp + sm
    return {
        "sigma_z": OperatorMatrix(sz),
        "sigma_plus": OperatorMatrix(sp),
        "sigma_minus": OperatorMatrix(sm),
        "sigma_x": OperatorMatrix(sx),
    }


def identity(dim: int, basis_tag: str = "bare") -> OperatorMatrix:
    return OperatorMatrix(np.eye(dim, dtype=np.complex128), basis_tag)


def tensor_product(left: OperatorMatrix, right: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product; both factors must carry the same basis tag."""
    tag = require_same_basis(left, right)
    return OperatorMatrix(np.kron(left.entries, right.entries), tag)


def lift_qubit(op: OperatorMatrix, cutoff: FockCutoff) -> OperatorMatrix:
    """Embed a qubit operator into the joint space as op (x) 1."""
    return tensor_product(op, identity(cutoff.cavity_dim, op.basis_tag))


def lift_cavity(op: OperatorMatrix) -> OperatorMatrix:
    """Embed a cavity operator into the joint space as 1 (x) op."""
    return tensor_product(identity(2, op.basis_tag), op)


def build_hamiltonian(params: ModelParams, cutoff: FockCutoff) -> OperatorMatrix:
    """Cavity-qubit Hamiltonian with the full (rotating plus counter-rotating) coupling.

    H = omega_c a+a  +  (omega_q/2) sigma_z  +  g (a + a+)(sigma_minus + sigma_plus)
    """
    a = annihilation(cutoff).entries
    x_c = a + a.conj().T
    n_c = a.conj().T @ a
    q = qubit_operators()
    eye_c = np.eye(cutoff.cavity_dim)
    eye_q = np.eye(2)
    h = (
        params.omega_c * np.kron(eye_q, n_c)
        + 0.5 * params.omega_q * np.kron(q["sigma_z"].entries, eye_c)
        + params.g * np.kron(q["sigma_x"].entries, x_c)
    )
    return OperatorMatrix(h, "bare")


def parity_operator(cutoff: FockCutoff) -> OperatorMatrix:
    """Excitation parity sigma_z (x) (-1)^(a+a); commutes with the Hamiltonian."""
    signs = (-1.0) ** np.arange(cutoff.cavity_dim)
    q = np.array([1.0, -1.0])
    return OperatorMatrix(np.diag(np.kron(q, signs)).astype(np.complex128), "bare")


def _split_dims(rho: DensityMatrix) -> tuple:
    if len(rho.dims) != 2:
        raise ValueError(f"need a bipartite state with two dims, got dims={rho.dims}")
    return rho.dims


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Trace out one factor of a joint state.

    keep is "qubit" or "cavity"; the result carries a single-entry dims tuple.
    """
    dq, dc = _split_dims(rho)
    r = rho.entries.reshape(dq, dc, dq, dc)
    if keep == "qubit":
        red = np.einsum("ijkj->ik", r)
        dims = (dq,)
    elif keep == "cavity":
        red = np.einsum("ijil->jl", r)
        dims = (dc,)
    else:
        raise ValueError(f'keep must be "qubit" or "cavity", got {keep!r}')
    return DensityMatrix(red, dims, rho.basis_tag)


def partial_transpose(rho: DensityMatrix, subsystem: str = "qubit") -> OperatorMatrix:
    """Transpose one factor only.  The result need not be positive, so it is
    returned as a plain operator rather than a state."""
    dq, dc = _split_dims(rho)
    r = rho.entries.reshape(dq, dc, dq, dc)
    if subsystem == "qubit":
        pt = r.transpose(2, 1, 0, 3)
    elif subsystem == "cavity":
        pt = r.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f'subsystem must be "qubit" or "cavity", got {subsystem!r}')
    return OperatorMatrix(pt.reshape(dq * dc, dq * dc), rho.basis_tag)
