"""Fast-forwarding experiments: fidelity time series and Pauli-basis state
decomposition.

A fidelity series compares the trained ansatz at time t against the iterated
Trotter unitary and/or the exact evolution. For fractional times
t = M dt + c (0 < c < dt) the Trotter reference is U(dt)^M U(c), where U(c)
is the Trotter step rebuilt at step size c; at c = dt this coincides with
M+1 integer steps, which pins down the interpretation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .ansatz import VffAnsatz, vff_unitary
from .costs import average_fidelity
from .exceptions import ResourceCapError
from .hamiltonians import PauliSumHamiltonian, TrotterConfig, trotter_unitary
from .linalg import DENSE_QUBIT_CAP, check_dense_cap, hermitian_exp, num_qubits, pauli_matrix

__all__ = [
    "PAULI_DECOMPOSE_CAP",
    "FastForwardPlan",
    "SeriesPoint",
    "PauliWeights",
    "fidelity_series",
    "series_to_csv",
    "pauli_decompose",
    "pauli_reconstruct",
    "fidelity_from_weights",
]

PAULI_DECOMPOSE_CAP = 6
REFERENCES = ("TROTTER", "EXACT", "BOTH")


@dataclass(frozen=True)
class FastForwardPlan:
    m_max: int
    substeps: int = 1  # fractional resolution: substeps points per dt interval
    reference: str = "BOTH"

    def __post_init__(self):
        if self.m_max < 1 or self.substeps < 1:
            raise ValueError("m_max and substeps must be >= 1")
        if self.reference not in REFERENCES:
            raise ValueError(f"reference must be one of {REFERENCES}")


@dataclass(frozen=True)
class SeriesPoint:
    t: float
    steps: float  # t / dt
    fid_vs_trotter: float | None
    fid_vs_exact: float | None


def fidelity_series(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    h: PauliSumHamiltonian,
    cfg: TrotterConfig,
    plan: FastForwardPlan,
    cap: int = DENSE_QUBIT_CAP,
) -> list[SeriesPoint]:
    """Average fidelity of V_t against the chosen references on the time grid
    t = k dt / substeps, k = 1 .. m_max * substeps."""
    check_dense_cap(h.n, cap)
    dt = cfg.dt
    want_trotter = plan.reference in ("TROTTER", "BOTH")
    want_exact = plan.reference in ("EXACT", "BOTH")
    u_step = trotter_unitary(h, cfg, cap=cap) if want_trotter else None
    h_dense = h.dense(cap) if want_exact else None
    frac_cache: dict[int, np.ndarray] = {}
    points = []
    u_pow = np.eye(2**h.n, dtype=complex) if want_trotter else None
    whole = 0
    for k in range(1, plan.m_max * plan.substeps + 1):
        m, rem = divmod(k, plan.substeps)
        t = k * dt / plan.substeps
        v_t = vff_unitary(ansatz, theta, gamma, t, cap=cap)
        fid_t = fid_e = None
        if want_trotter:
            while whole < m:
                u_pow = u_pow @ u_step
                whole += 1
            if rem == 0:
                u_ref = u_pow
            else:
                if rem not in frac_cache:
                    frac_cache[rem] = trotter_unitary(h, cfg, dt=rem * dt / plan.substeps, cap=cap)
                u_ref = u_pow @ frac_cache[rem]
            fid_t = average_fidelity(u_ref, v_t)
        if want_exact:
            fid_e = average_fidelity(hermitian_exp(h_dense, t), v_t)
        points.append(SeriesPoint(t=t, steps=k / plan.substeps, fid_vs_trotter=fid_t,
                                  fid_vs_exact=fid_e))
    return points


def series_to_csv(points: list[SeriesPoint]) -> str:
    lines = ["t,steps,fid_vs_trotter,fid_vs_exact"]
    for p in points:
        ft = "" if p.fid_vs_trotter is None else repr(p.fid_vs_trotter)
        fe = "" if p.fid_vs_exact is None else repr(p.fid_vs_exact)
        lines.append(f"{p.t!r},{p.steps!r},{ft},{fe}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PauliWeights:
    """eta_k = Tr(sigma_k rho) / 2^n over the 4^n Pauli strings, ordered
    base-4 lexicographically with digits I,X,Y,Z and qubit 0 most significant."""

    n: int
    eta: np.ndarray

    def __post_init__(self):
        if self.eta.shape != (4**self.n,):
            raise ValueError(f"expected {4**self.n} weights for n={self.n}")


# contraction tensors: S[p, a, b] = sigma_p[b, a] so that contracting a
# density matrix's (row, col) pair against S computes Tr(sigma_p rho_1q)
_SIGMA = np.stack([pauli_matrix(c) for c in "IXYZ"])
_S_DECOMP = np.transpose(_SIGMA, (0, 2, 1))


def pauli_decompose(rho: np.ndarray, cap: int = PAULI_DECOMPOSE_CAP) -> PauliWeights:
    """Exact Pauli-product decomposition of a density operator."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    if n > cap:
        raise ResourceCapError(f"Pauli decomposition capped at {cap} qubits, got {n}")
    t = rho.reshape([2] * (2 * n))
    order = []
    for q in range(n):
        order += [q, n + q]
    t = t.transpose(order)
    for _ in range(n):
        t = np.tensordot(t, _S_DECOMP, axes=([0, 1], [1, 2]))
    eta = t.reshape(-1) / 2**n
    if np.max(np.abs(eta.imag)) > 1e-10:
        raise ValueError("non-Hermitian input: Pauli weights are not real")
    return PauliWeights(n, eta.real.copy())


def pauli_reconstruct(weights: PauliWeights) -> np.ndarray:
    """Sum eta_k sigma_k; inverse of pauli_decompose."""
    n = weights.n
    rho = np.zeros((2**n, 2**n), dtype=complex)
    for k, letters in enumerate(product("IXYZ", repeat=n)):
        if weights.eta[k] != 0.0:
            rho += weights.eta[k] * pauli_matrix("".join(letters))
    return rho


def fidelity_from_weights(weights: PauliWeights, psi: np.ndarray) -> float:
    """<psi| rho |psi> for the state reconstructed from Pauli weights."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2**weights.n,):
        raise ValueError("state dimension does not match weights")
    rho = pauli_reconstruct(weights)
    return float(np.real(np.vdot(psi, rho @ psi)))
