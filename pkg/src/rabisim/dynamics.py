"""Dissipative quench dynamics in the energy eigenbasis.

The jump operators are projectors |j><k| between energy eigenstates, so the
generator never couples populations to coherences: populations obey a
classical rate equation dP/dt = A P while every coherence relaxes and
rotates independently, d rho_mn / dt = K_mn rho_mn.  A fixed-step
fourth-order update of this linear autonomous system is therefore a
precomputable elementwise factor for the coherences plus a small matrix
polynomial for the populations; that is what the stepping kernel applies.
The generic four-stage step (`rk4_step`) is kept as a cross-check and the
two agree to rounding.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .observables import WignerGrid, min_quadrature_variance, mutual_information
from .observables import negativity_witness, quantum_fisher_information
from .observables import QfiGenerator, wigner_function
from .operators import (
    DensityMatrix,
    FockCutoff,
    ModelParams,
    OperatorMatrix,
    annihilation,
    lift_cavity,
    lift_qubit,
    partial_trace,
    qubit_operators,
)
from .spectrum import EigenSystem, diagonalize_model, dressed_operators

log = logging.getLogger(__name__)

# rates between levels closer than this are dropped: the detailed-balance
# occupation diverges as 1/gap while the transition weight vanishes as gap,
# and quasi-degenerate doublets must not dephase through roundoff gaps
RATE_GAP_FLOOR = 1e-9
RECORD_TRACE_ATOL = 1e-8
RECORD_EIG_FLOOR = -1e-6
# negatives shallower than this are eigensolver roundoff, not step error
CLIP_DEADBAND = -1e-12
# overlap (|<psi0|rho|psi0>|) values below this are reported at the floor:
# deeper values sit beneath the roundoff + step-size resolution of the
# quadratic form, so the return rate saturates at -0.5*ln(floor) ~ 6.9
DEFAULT_OVERLAP_FLOOR = 1e-6

KNOWN_OBSERVABLES = (
    "f",
    "occupation",
    "qfi",
    "negativity",
    "mutual_info",
    "min_variance",
)


@dataclass(frozen=True)
class BathSpec:
    """Markovian bath coupling: decay rates, temperature, reference frequency.

    gamma_c and gamma_q scale the cavity and qubit channels; omega_0 sets
    the frequency against which transition energies are weighted (defaults
    to the model's omega_c when left as None).
    """

    gamma_c: float
    gamma_q: float
    temperature: float = 0.0
    omega_0: float | None = None

    def __post_init__(self):
        if self.gamma_c < 0 or self.gamma_q < 0:
            raise ValueError("decay rates must be >= 0")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.omega_0 is not None and self.omega_0 <= 0:
            raise ValueError("omega_0 must be positive when given")

    @classmethod
    def default_for(cls, params: ModelParams) -> "BathSpec":
        """Both channels at 0.01 * omega_c, zero temperature."""
        g = 0.01 * params.omega_c
        return cls(gamma_c=g, gamma_q=g, temperature=0.0, omega_0=params.omega_c)


@dataclass(frozen=True)
class QuenchProtocol:
    """Sudden change of the coupling g0 -> g_prime and the recording plan.

    dt is the integration step in units of 1/omega_q (the fastest scale),
    so the raw step is dt / omega_q.  record_stride counts integration
    steps between recorded states.  overlap_floor clamps the return-rate
    overlap; see DEFAULT_OVERLAP_FLOOR.
    """

    g0: float
    g_prime: float | None = None
    t_max: float = 100.0
    dt: float = 0.01
    record_stride: int = 100
    observables: tuple = KNOWN_OBSERVABLES
    snapshot_times: tuple = ()
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        if self.g0 < 0:
            raise ValueError("g0 must be >= 0")
        if self.g_prime is not None and self.g_prime < 0:
            raise ValueError("g_prime must be >= 0")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not isinstance(self.record_stride, int) or self.record_stride < 1:
            raise ValueError("record_stride must be an integer >= 1")
        unknown = set(self.observables) - set(KNOWN_OBSERVABLES)
        if unknown:
            raise ValueError(f"unknown observables {sorted(unknown)}")
        for t in self.snapshot_times:
            if t < 0 or t > self.t_max:
                raise ValueError(f"snapshot time {t} outside [0, t_max]")
        if self.overlap_floor <= 0:
            raise ValueError("overlap_floor must be positive")

    def resolved_g_prime(self) -> float:
        return self.g_prime if self.g_prime is not None else self.g0 + 0.3


@dataclass
class QuenchResult:
    """Recorded time series plus optional phase-space snapshots."""

    times: np.ndarray
    series: dict
    wigner_snapshots: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DressedGenerator:
    """Relaxation generator in the eigenbasis of the post-quench Hamiltonian.

    gain[m, n] is the population transfer rate n -> m (zero diagonal),
    out_rates[n] the total escape rate, and k_matrix the per-element factor
    governing coherences: K_mn = -i(E_m - E_n) - (out_m + out_n)/2.
    """

    energies: np.ndarray
    gain: np.ndarray
    out_rates: np.ndarray
    k_matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.size


def thermal_occupation(delta, temperature: float):
    """Bose occupation 1/(exp(delta/T) - 1); zero at T = 0."""
    d = np.asarray(delta, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("transition energy must be positive")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        out = np.zeros_like(d)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(d / temperature)
    return float(out) if np.isscalar(delta) else out


def relaxation_coefficients(
    es: EigenSystem, lowering: OperatorMatrix, rate: float, omega_0: float
) -> np.ndarray:
    """Zero-temperature transition rates between energy eigenstates.

    For the bare channel operator x (a or sigma_minus, lifted to the joint
    space) the matrix element is C_jk = -i <j| x - x+ |k> and the rate for
    the downward transition k -> j is rate * (E_k - E_j)/omega_0 * |C_jk|^2.
    Pairs closer than RATE_GAP_FLOOR are dropped (see note at top).
    Returns a strictly upper-triangular array indexed [j, k].
    """
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if omega_0 <= 0:
        raise ValueError("omega_0 must be positive")
    if lowering.basis_tag != "bare":
        raise ValueError("channel operator must be given in the bare basis")
    v = es.states
    x = lowering.entries
    c = -1j * (v.conj().T @ (x - x.conj().T) @ v)
    delta = es.energies[None, :] - es.energies[:, None]  # delta[j, k] = E_k - E_j
    out = np.zeros_like(delta)
    mask = delta > RATE_GAP_FLOOR
    out[mask] = rate * (delta[mask] / omega_0) * np.abs(c[mask]) ** 2
    return out


def build_generator(
    es: EigenSystem, rate_matrices, temperature: float = 0.0
) -> DressedGenerator:
    """Assemble the population/coherence generator from per-channel rates.

    At T > 0 each downward rate gamma picks up (1 + nbar) and feeds the
    reverse transition with gamma * nbar, nbar evaluated at the pair's gap.
    """
    d = es.dim
    gain = np.zeros((d, d))
    delta = es.energies[None, :] - es.energies[:, None]
    for gm in rate_matrices:
        j_idx, k_idx = np.nonzero(gm)
        if j_idx.size == 0:
            continue
        g_dn = gm[j_idx, k_idx]
        if temperature > 0:
            nbar = thermal_occupation(delta[j_idx, k_idx], temperature)
            np.add.at(gain, (j_idx, k_idx), g_dn * (1.0 + nbar))
            np.add.at(gain, (k_idx, j_idx), g_dn * nbar)
        else:
            np.add.at(gain, (j_idx, k_idx), g_dn)
    out_rates = gain.sum(axis=0)
    e = es.energies
    k_matrix = (
        -1j * (e[:, None] - e[None, :])
        - 0.5 * (out_rates[:, None] + out_rates[None, :])
    )
    return DressedGenerator(e.copy(), gain, out_rates, k_matrix)


def lindblad_rhs(rho: np.ndarray, gen: DressedGenerator) -> np.ndarray:
    """d rho / dt for a state expressed in the generator's eigenbasis.

    The derivative is traceless by construction: the diagonal loses
    out_rates * P and regains exactly gain @ P.
    """
    out = gen.k_matrix * rho
    idx = np.arange(gen.dim)
    out[idx, idx] += gen.gain @ rho[idx, idx]
    return out


def rk4_step(rho: np.ndarray, gen: DressedGenerator, dt: float) -> np.ndarray:
    """Classical four-stage step on the raw right-hand side (reference path)."""
    k1 = lindblad_rhs(rho, gen)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, gen)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, gen)
    k4 = lindblad_rhs(rho + dt * k3, gen)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def build_propagator(gen: DressedGenerator, dt: float):
    """Per-step update factors equivalent to one `rk4_step`.

    For a linear autonomous system the four-stage step equals the degree-4
    Taylor polynomial of exp(dt L); on the decoupled blocks that is an
    elementwise polynomial in dt*K for the coherences and a matrix
    polynomial in dt*A for the populations.  Columns of A sum to zero, so
    the population update preserves the trace identically.
    """
    z = gen.k_matrix * dt
    coh = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)))
    np.fill_diagonal(coh, 0.0)
    amat = (gen.gain - np.diag(gen.out_rates)) * dt
    pop = np.eye(gen.dim)
    term = np.eye(gen.dim)
    for k in range(1, 5):
        term = term @ amat / k
        pop = pop + term
    return np.ascontiguousarray(coh), np.ascontiguousarray(pop)


def evolve(
    rho0: DensityMatrix,
    gen: DressedGenerator,
    dt: float,
    record_steps,
    on_record,
) -> dict:
    """March the state and hand validated snapshots to `on_record`.

    record_steps is an ascending sequence of integer step counts (0 allowed)
    at which the state is re-validated: trace within RECORD_TRACE_ATOL of 1
    (else the step size is declared too coarse and the run aborts) and
    smallest eigenvalue above RECORD_EIG_FLOOR.  Negatives below
    CLIP_DEADBAND are clipped to zero and the state renormalized; the
    number of clip events is logged and returned in the diagnostics.
    Shallower negatives are eigensolver roundoff and pass through.
    """
    if rho0.basis_tag != "dressed":
        raise ValueError("evolve expects the state in the dressed basis")
    steps = [int(s) for s in record_steps]
    if any(b <= a for a, b in zip(steps, steps[1:])) or (steps and steps[0] < 0):
        raise ValueError("record_steps must be ascending and non-negative")
    rho = np.array(rho0.entries, dtype=np.complex128, order="C", copy=True)
    coh, pop = build_propagator(gen, dt)
    clip_events = 0
    max_drift = 0.0
    min_eig = np.inf
    done = 0
    for step in steps:
        if step > done:
            _kernels.advance(rho, coh, pop, step - done)
            done = step
        tr = float(np.real(np.trace(rho)))
        drift = abs(tr - 1.0)
        if np.isfinite(drift):
            max_drift = max(max_drift, drift)
        # NaN compares false against the tolerance, so test finiteness too
        if not np.isfinite(tr) or drift > RECORD_TRACE_ATOL:
            raise RuntimeError(
                f"trace drifted to {tr!r} by step {step}: step dt={dt} too coarse"
            )
        herm = 0.5 * (rho + rho.conj().T)
        w, v = np.linalg.eigh(herm)
        min_eig = min(min_eig, float(w[0]))
        if w[0] < RECORD_EIG_FLOOR:
            raise RuntimeError(
                f"state eigenvalue {w[0]:.3e} below floor at step {step}"
            )
        if w[0] < CLIP_DEADBAND:
            w = np.clip(w, 0.0, None)
            w = w / w.sum()
            rec = (v * w) @ v.conj().T
            clip_events += 1
        else:
            rec = herm / tr
        on_record(step, DensityMatrix(rec, (rho.shape[0],), "dressed"))
    if clip_events:
        log.info("clipped negative eigenvalues at %d of %d records", clip_events, len(steps))
    return {
        "clip_events": clip_events,
        "max_trace_drift": max_drift,
        "min_eigenvalue": float(min_eig),
        "n_steps": done,
        "backend": _kernels.BACKEND,
    }


def return_rate(psi0: np.ndarray, rho, overlap_floor: float = 1e-300) -> float:
    """Rate function -ln G with G = sqrt(<psi0| rho |psi0>), floored overlap."""
    v = np.asarray(psi0, dtype=np.complex128).ravel()
    r = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    q = float(np.real(np.vdot(v, r @ v)))
    g = np.sqrt(max(q, overlap_floor))
    return float(-np.log(g))


def detect_cusps(values, threshold: float = 10.0) -> list:
    """Indices of slope breaks in a sampled series.

    A cusp shows up in the discrete second difference as a sign change
    whose magnitude towers over the series' typical curvature; smooth
    oscillations flip sign only where the curvature is small.  Flags the
    center index i+1 whenever d2[i] and d2[i+1] differ in sign and the
    larger of the two exceeds threshold times the median |d2|.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size < 4:
        return []
    d2 = v[:-2] - 2.0 * v[1:-1] + v[2:]
    med = float(np.median(np.abs(d2)))
    if med == 0.0:
        return []
    flip = d2[:-1] * d2[1:] < 0.0
    big = np.maximum(np.abs(d2[:-1]), np.abs(d2[1:])) > threshold * med
    return [int(i) + 1 for i in np.flatnonzero(flip & big)]


def _record_indices(n_steps: int, stride: int):
    idx = list(range(0, n_steps + 1, stride))
    if idx[-1] != n_steps:
        idx.append(n_steps)
    return idx


def run_quench(
    params: ModelParams,
    protocol: QuenchProtocol,
    bath: BathSpec,
    cutoff: FockCutoff = FockCutoff(),
    wigner_axes=None,
) -> QuenchResult:
    """Prepare the ground state at g0, quench to g_prime, evolve and record.

    The initial state is the pure ground state of the pre-quench
    Hamiltonian regardless of bath temperature; the bath acts only through
    the post-quench relaxation generator.  All recorded series are
    evaluated in the post-quench eigenbasis ("occupation" is the
    frequency-split excitation number <Xm Xp>, not the bare photon number).
    """
    g1 = protocol.resolved_g_prime()
    es0 = diagonalize_model(params.with_g(protocol.g0), cutoff)
    es1 = diagonalize_model(params.with_g(g1), cutoff)
    psi0 = es1.states.conj().T @ es0.ground_state()  # dressed coordinates

    omega_0 = bath.omega_0 if bath.omega_0 is not None else params.omega_c
    a_low = lift_cavity(annihilation(cutoff))
    s_low = lift_qubit(qubit_operators()["sigma_minus"], cutoff)
    rates = [
        relaxation_coefficients(es1, a_low, bath.gamma_c, omega_0),
        relaxation_coefficients(es1, s_low, bath.gamma_q, omega_0),
    ]
    gen = build_generator(es1, rates, bath.temperature)

    dt_eff = protocol.dt / params.omega_q
    n_steps = max(1, int(round(protocol.t_max / dt_eff)))
    rec_steps = _record_indices(n_steps, protocol.record_stride)
    times = dt_eff * np.asarray(rec_steps, dtype=np.float64)

    wants = protocol.observables
    dressed = dressed_operators(es1, cutoff) if (
        "occupation" in wants or "min_variance" in wants
    ) else None
    occ_matrix = None
    if dressed is not None:
        occ_matrix = (dressed.x_minus @ dressed.x_plus).entries

    qfi_gen = QfiGenerator.quadrature_x(cutoff) if "qfi" in wants else None

    snap_lookup = {}
    if protocol.snapshot_times:
        if wigner_axes is None:
            ax = np.linspace(-8.0, 8.0, 161)
            wigner_axes = (ax, ax)
        for t_want in protocol.snapshot_times:
            k = int(np.argmin(np.abs(times - t_want)))
            snap_lookup.setdefault(k, float(times[k]))

    needs_bare = bool(snap_lookup) or any(
        k in wants for k in ("qfi", "negativity", "mutual_info")
    )
    series = {name: np.empty(len(rec_steps)) for name in wants}
    snapshots: list = []
    dims = (2, cutoff.cavity_dim)
    counter = {"i": 0}

    def on_record(step: int, rho_d: DensityMatrix):
        i = counter["i"]
        rho_t = rho_d.entries
        if "f" in wants:
            series["f"][i] = return_rate(psi0, rho_t, protocol.overlap_floor)
        if "occupation" in wants:
            series["occupation"][i] = float(np.real(np.sum(rho_t * occ_matrix.T)))
        if "min_variance" in wants:
            series["min_variance"][i] = min_quadrature_variance(rho_d, dressed)[0]
        if needs_bare:
            rho_b = DensityMatrix(es1.from_dressed(rho_t), dims, "bare")
            if "qfi" in wants:
                rho_c = partial_trace(rho_b, "cavity")
                series["qfi"][i] = quantum_fisher_information(rho_c, qfi_gen)
            if "negativity" in wants:
                series["negativity"][i] = negativity_witness(rho_b)
            if "mutual_info" in wants:
                series["mutual_info"][i] = mutual_information(rho_b)
            if i in snap_lookup:
                rho_c = partial_trace(rho_b, "cavity")
                grid = wigner_function(rho_c, wigner_axes[0], wigner_axes[1])
                snapshots.append((snap_lookup[i], grid))
        counter["i"] += 1

    rho0 = DensityMatrix.from_state(psi0, (es1.dim,), "dressed")
    diagnostics = evolve(rho0, gen, dt_eff, rec_steps, on_record)
    diagnostics.update(
        dt_effective=dt_eff,
        overlap_floor=protocol.overlap_floor,
        g0=protocol.g0,
        g_prime=g1,
    )

    if "f" in wants and abs(series["f"][0]) > 1e-10:
        raise RuntimeError(f"return rate at t=0 is {series['f'][0]:.3e}, expected 0")

    return QuenchResult(times, series, snapshots, diagnostics)
