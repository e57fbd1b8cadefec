"""Stationary-state quantities: metrological, entropic and phase-space.

Everything here takes validated states and returns plain floats (or a grid
for the phase-space distribution).  Spectral sums discard eigenvalues below
SPECTRAL_EPS; entropies use the natural logarithm.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .operators import (
    DensityMatrix,
    FockCutoff,
    HERMITICITY_ATOL,
    OperatorMatrix,
    annihilation,
    partial_trace,
    partial_transpose,
)
from .spectrum import DressedOperators

SPECTRAL_EPS = 1e-12
IMAG_WARN_ATOL = 1e-8


def _trace_prod(a: np.ndarray, b: np.ndarray) -> complex:
    # Tr[a b] without forming the product
    return complex(np.sum(a * b.T))


def expectation(rho: DensityMatrix, op: OperatorMatrix) -> float:
    """Tr[rho op] as a real number.

    Raises on dimension or basis mismatch; warns when a Hermitian operator
    picks up an imaginary part beyond IMAG_WARN_ATOL (a symptom of a state
    that drifted off Hermiticity).
    """
    if rho.dim != op.dim:
        raise ValueError(f"state dim {rho.dim} != operator dim {op.dim}")
    if rho.basis_tag != op.basis_tag:
        raise ValueError(
            f"state basis {rho.basis_tag!r} != operator basis {op.basis_tag!r}"
        )
    t = _trace_prod(rho.entries, op.entries)
    if op.hermiticity_defect() <= HERMITICITY_ATOL and abs(t.imag) > IMAG_WARN_ATOL:
        warnings.warn(
            f"expectation of Hermitian operator has Im part {t.imag:.3e}",
            stacklevel=2,
        )
    return t.real


@dataclass(frozen=True)
class QfiGenerator:
    """Generator of the phase rotation whose estimation precision is scored."""

    kind: str
    matrix: OperatorMatrix

    def __post_init__(self):
        defect = self.matrix.hermiticity_defect()
        if defect > HERMITICITY_ATOL:
            raise ValueError(f"generator must be Hermitian, defect {defect:.3e}")

    @classmethod
    def quadrature_x(cls, cutoff: FockCutoff) -> "QfiGenerator":
        """Cavity position quadrature (a + a+)/sqrt(2), the default choice."""
        a = annihilation(cutoff).entries
        return cls("quadrature_x", OperatorMatrix((a + a.conj().T) / np.sqrt(2.0)))

    @classmethod
    def number(cls, cutoff: FockCutoff) -> "QfiGenerator":
        a = annihilation(cutoff).entries
        return cls("number", OperatorMatrix(a.conj().T @ a))

    @classmethod
    def custom(cls, matrix: OperatorMatrix) -> "QfiGenerator":
        return cls("custom", matrix)


def quantum_fisher_information(
    rho: DensityMatrix,
    generator: QfiGenerator | None = None,
    eps: float = SPECTRAL_EPS,
) -> float:
    """Fisher information of rho for a unitary phase generated by G.

    Spectral form: with rho = sum_n p_n |n><n| (keeping p_n > eps),

        F = 4 sum_n p_n (<n|G^2|n> - <n|G|n>^2)
            - sum_{m != n} 8 p_m p_n / (p_m + p_n) |<m|G|n>|^2

    The G^2 term is evaluated over the complete eigenbasis, so states below
    the cutoff still contribute where they must.  Pure states reduce to
    4 Var(G); for eigenstates of G the result is 0.
    """
    if generator is None:
        if len(rho.dims) != 1:
            raise ValueError("default generator needs a single-factor (cavity) state")
        generator = QfiGenerator.quadrature_x(FockCutoff(rho.dim - 1))
    g_op = generator.matrix
    if g_op.dim != rho.dim:
        raise ValueError(f"generator dim {g_op.dim} != state dim {rho.dim}")
    if g_op.basis_tag != rho.basis_tag:
        raise ValueError("generator and state live in different bases")

    p, u = np.linalg.eigh(rho.entries)
    gt = u.conj().T @ g_op.entries @ u
    kept = np.flatnonzero(p > eps)
    if kept.size == 0:
        raise ValueError("state has no spectral weight above eps")

    g2_diag = np.sum(np.abs(gt[kept, :]) ** 2, axis=1)
    g_diag = np.real(np.diag(gt)[kept])
    variance_term = 4.0 * float(np.dot(p[kept], g2_diag - g_diag**2))

    pk = p[kept]
    denom = pk[:, None] + pk[None, :]
    weight = 8.0 * np.outer(pk, pk) / denom
    np.fill_diagonal(weight, 0.0)
    cross = np.abs(gt[np.ix_(kept, kept)]) ** 2
    return variance_term - float(np.sum(weight * cross))


def negativity_witness(rho: DensityMatrix, subsystem: str = "qubit") -> float:
    """Entanglement witness: total weight of negative partial-transpose eigenvalues.

    Zero for every separable state; the spectrum is the same whichever
    factor is transposed.
    """
    pt = partial_transpose(rho, subsystem)
    vals = np.linalg.eigvalsh(pt.entries)
    return float(-np.sum(vals[vals < 0.0]))


def von_neumann_entropy(rho: DensityMatrix, eps: float = SPECTRAL_EPS) -> float:
    """-sum lambda ln lambda over eigenvalues above eps (natural log)."""
    vals = np.linalg.eigvalsh(rho.entries)
    vals = vals[vals > eps]
    return float(-np.sum(vals * np.log(vals)))


def mutual_information(rho: DensityMatrix, eps: float = SPECTRAL_EPS) -> float:
    """S(qubit) + S(cavity) - S(joint); equals 2 S(qubit) on pure states."""
    if len(rho.dims) != 2:
        raise ValueError(f"mutual information needs a bipartite state, dims={rho.dims}")
    s_q = von_neumann_entropy(partial_trace(rho, "qubit"), eps)
    s_c = von_neumann_entropy(partial_trace(rho, "cavity"), eps)
    s_qc = von_neumann_entropy(rho, eps)
    return s_q + s_c - s_qc


def min_quadrature_variance(
    rho: DensityMatrix, dressed: DressedOperators
) -> tuple[float, float]:
    """Variance of the frequency-split quadrature, minimized over phase.

    X(theta) = (Xm e^{i theta} + Xp e^{-i theta}) / sqrt(2) with Xp the
    energy-lowering part.  V(theta) = A + Re[beta e^{2 i theta}] is minimal
    at A - |beta|; returns (v_min, theta_min) with theta_min in [0, pi).
    """
    xp = dressed.x_plus
    xm = dressed.x_minus
    if rho.basis_tag != xp.basis_tag:
        raise ValueError("state and dressed operators live in different bases")
    if rho.dim != xp.dim:
        raise ValueError(f"state dim {rho.dim} != operator dim {xp.dim}")
    r = rho.entries
    mu = _trace_prod(r, xp.entries)
    n1 = _trace_prod(r, (xm @ xp).entries).real
    n2 = _trace_prod(r, (xp @ xm).entries).real
    s = _trace_prod(r, (xm @ xm).entries)
    a_level = 0.5 * (n1 + n2) - abs(mu) ** 2
    beta = s - np.conj(mu) ** 2
    v_min = a_level - abs(beta)
    if abs(beta) < 1e-14:
        theta_min = 0.0
    else:
        theta_min = float(np.mod((np.pi - np.angle(beta)) / 2.0, np.pi))
    return float(v_min), theta_min


@dataclass(frozen=True)
class WignerGrid:
    """Phase-space quasi-distribution sampled on a rectangular grid.

    values[i, j] = W(x_values[i], p_values[j]).
    """

    x_values: np.ndarray
    p_values: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_values, dtype=np.float64)
        p = np.asarray(self.p_values, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (x.size, p.size):
            raise ValueError(f"values shape {v.shape} != ({x.size}, {p.size})")
        for arr in (x, p, v):
            arr.setflags(write=False)
        object.__setattr__(self, "x_values", x)
        object.__setattr__(self, "p_values", p)
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        """Riemann sum of W dx dp; close to 1 when the state fits the grid."""
        dx = float(self.x_values[1] - self.x_values[0]) if self.x_values.size > 1 else 1.0
        dp = float(self.p_values[1] - self.p_values[0]) if self.p_values.size > 1 else 1.0
        return float(np.sum(self.values) * dx * dp)

    def x_marginal(self) -> np.ndarray:
        dp = float(self.p_values[1] - self.p_values[0]) if self.p_values.size > 1 else 1.0
        return np.sum(self.values, axis=1) * dp


def wigner_function(
    rho: DensityMatrix, x_values, p_values, batch: int = 256
) -> WignerGrid:
    """Displaced-parity form of the phase-space distribution.

    W(x, p) = (1/pi) Tr[rho D(alpha) P D(alpha)+], alpha = (x + i p)/sqrt(2),
    with P the photon-number parity.  Normalized so the vacuum peaks at 1/pi
    and the grid sum approaches 1.  The displacement is built exactly on the
    truncated space from the spectral decomposition of i(a+ - a), using
    D(alpha) = R(phi) e^{r(a+ - a)} R(phi)+ with alpha = r e^{i phi}, which
    avoids a fresh matrix exponential per grid point.
    """
    if len(rho.dims) != 1:
        raise ValueError("phase-space distribution is defined for the cavity factor")
    if rho.basis_tag != "bare":
        raise ValueError("state must be in the bare Fock basis")
    x_values = np.asarray(x_values, dtype=np.float64)
    p_values = np.asarray(p_values, dtype=np.float64)
    dim = rho.dim
    a = annihilation(FockCutoff(dim - 1)).entries
    m = 1j * (a.conj().T - a)
    lam, u = np.linalg.eigh(m)
    n_arr = np.arange(dim)
    signs = (-1.0) ** n_arr

    n_mean = float(np.real(np.trace(rho.entries @ (a.conj().T @ a))))
    reach = np.sqrt(2.0 * max(n_mean, 0.0)) + 3.0
    extent = min(np.max(np.abs(x_values)), np.max(np.abs(p_values)))
    if reach > extent:
        warnings.warn(
            f"state extends to radius ~{reach:.1f} but grid reaches {extent:.1f}; "
            "normalization will suffer",
            stacklevel=2,
        )
    corner = 0.5 * (np.max(np.abs(x_values)) ** 2 + np.max(np.abs(p_values)) ** 2)
    if corner > 0.6 * (dim - 1):
        warnings.warn(
            f"grid corners displace by |alpha|^2 ~ {corner:.0f}, straining cutoff "
            f"{dim - 1}; far-field values are truncation-limited",
            stacklevel=2,
        )

    xg, pg = np.meshgrid(x_values, p_values, indexing="ij")
    alpha = (xg + 1j * pg).ravel() / np.sqrt(2.0)
    r_all = np.abs(alpha)
    phi_all = np.angle(alpha)
    out = np.empty(alpha.size, dtype=np.float64)
    rho_m = rho.entries
    for start in range(0, alpha.size, batch):
        sl = slice(start, min(start + batch, alpha.size))
        ph = np.exp(-1j * np.outer(r_all[sl], lam))
        core = np.einsum("ij,bj,kj->bik", u, ph, u.conj(), optimize=True)
        rot = np.exp(1j * np.outer(phi_all[sl], n_arr))
        disp = rot[:, :, None] * core * rot.conj()[:, None, :]
        tmp = np.einsum("mk,bkn->bmn", rho_m, disp, optimize=True)
        diag = np.einsum("bmn,bmn->bn", disp.conj(), tmp, optimize=True)
        out[sl] = (diag.real * signs[None, :]).sum(axis=1)
    values = out.reshape(x_values.size, p_values.size) / np.pi
    return WignerGrid(x_values, p_values, values)
