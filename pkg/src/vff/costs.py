"""Training costs and their exact expected values.

Empirical costs run on the statevector path and never materialize the dense
ansatz unitary. Exact expected costs (Hilbert-Schmidt, entangled-Haar, and
the subset-sum formula for product-Haar inputs) need dense operators and are
therefore capped in qubit count.

The subset-sum formula evaluates the product-Haar expectation of the global
cost for W = u^dag v:

    1 - (1/6^n) * sum_{A subset of qubits} Tr[Tr_{A^c}(W) Tr_{A^c}(W)^dag]

one subset at a time (full recompute per subset, O(2^n * 4^n)); simplicity
wins over speed at the supported sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .ansatz import VffAnsatz, apply_vff
from .data import Dataset
from .exceptions import ResourceCapError
from .linalg import num_qubits, partial_trace

__all__ = [
    "SUBSET_SUM_CAP",
    "CostValue",
    "cost_hst",
    "average_fidelity",
    "expected_entangled_global",
    "expected_product_global",
    "expected_product_local_mc",
    "cost_global_empirical",
    "cost_local_empirical",
    "global_terms",
    "local_terms",
    "tensor_power_cost_relation",
]

SUBSET_SUM_CAP = 8
ANOMALY_TOL = 1e-9

COST_KINDS = (
    "EMP_GLOBAL",
    "EMP_LOCAL",
    "HST",
    "EXP_ENTANGLED_G",
    "EXP_PRODUCT_G",
    "EXP_PRODUCT_L_MC",
)


@dataclass(frozen=True)
class CostValue:
    """A cost in [0, 1]. `raw` keeps the unclamped accumulation; values outside
    [0, 1] by more than 1e-9 are flagged anomalous rather than silently fixed."""

    value: float
    kind: str
    stderr: float | None = None
    raw: float | None = None

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}")

    @property
    def anomalous(self) -> bool:
        r = self.value if self.raw is None else self.raw
        return r < -ANOMALY_TOL or r > 1 + ANOMALY_TOL

    def __float__(self) -> float:
        return self.value


def _clamped(raw: float, kind: str, stderr: float | None = None) -> CostValue:
    return CostValue(min(max(raw, 0.0), 1.0), kind, stderr, raw=float(raw))


def _check_pair(u: np.ndarray, v: np.ndarray) -> int:
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"operator shapes {u.shape} and {v.shape} do not match")
    return u.shape[0]


def cost_hst(u: np.ndarray, v: np.ndarray) -> CostValue:
    """Hilbert-Schmidt test cost 1 - |Tr(u^dag v)|^2 / d^2 (global-phase invariant)."""
    d = _check_pair(u, v)
    raw = 1.0 - abs(np.trace(u.conj().T @ v)) ** 2 / d**2
    return _clamped(raw, "HST")


def average_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Haar-average of |<psi| u^dag v |psi>|^2, via the Hilbert-Schmidt relation
    F = 1 - d/(d+1) * C_HST."""
    d = _check_pair(u, v)
    return 1.0 - d / (d + 1) * cost_hst(u, v).value


def expected_entangled_global(u: np.ndarray, v: np.ndarray) -> CostValue:
    """Expected global cost over Haar-random n-qubit inputs: d/(d+1) * C_HST."""
    d = _check_pair(u, v)
    raw = d / (d + 1) * cost_hst(u, v).raw
    return _clamped(raw, "EXP_ENTANGLED_G")


def expected_product_global(u: np.ndarray, v: np.ndarray, cap: int = SUBSET_SUM_CAP) -> CostValue:
    """Expected global cost over products of Haar single-qubit inputs, by the
    subset-sum of squared partial-trace norms of W = u^dag v."""
    d = _check_pair(u, v)
    n = num_qubits(d)
    if n > cap:
        raise ResourceCapError(f"subset-sum formula capped at {cap} qubits, got {n}")
    w = np.asarray(u).conj().T @ np.asarray(v)
    total = 0.0
    for k in range(n + 1):
        for keep in combinations(range(n), k):
            pt = partial_trace(w, keep, n)
            total += float(np.sum(np.abs(pt) ** 2))
    raw = 1.0 - total / 6**n
    return _clamped(raw, "EXP_PRODUCT_G")


def expected_product_local_mc(
    u: np.ndarray,
    v: np.ndarray,
    samples: int,
    rng: np.random.Generator,
) -> CostValue:
    """Monte-Carlo estimate of the expected local cost over product-Haar inputs,
    with the standard error of the mean."""
    d = _check_pair(u, v)
    n = num_qubits(d)
    if samples < 100:
        raise ValueError("need at least 100 samples for a meaningful standard error")
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    # batched Ginibre + QR: same distribution as sample_haar_single_qubit
    z = (
        rng.standard_normal((samples, n, 2, 2)) + 1j * rng.standard_normal((samples, n, 2, 2))
    ) / np.sqrt(2)
    q_mat, r_mat = np.linalg.qr(z)
    r00 = r_mat[..., 0, 0]
    factors = q_mat[..., :, 0] * (r00 / np.abs(r00))[..., None]
    states = factors[:, 0, :]
    for q in range(1, n):
        states = np.einsum("sa,sb->sab", states, factors[:, q]).reshape(samples, -1)
    chi = (v.conj().T @ (u @ states.T)).T  # (samples, d): V^dag U |Psi>
    t = chi.reshape([samples] + [2] * n)
    vals = np.zeros(samples)
    for q in range(n):
        tq = np.moveaxis(t, 1 + q, 1).reshape(samples, 2, -1)
        y = np.einsum("sb,sbm->sm", factors[:, q].conj(), tq)
        vals += np.sum(np.abs(y) ** 2, axis=1)
    per_sample = 1.0 - vals / n
    raw = float(np.mean(per_sample))
    stderr = float(np.std(per_sample, ddof=1) / np.sqrt(samples))
    return _clamped(raw, "EXP_PRODUCT_L_MC", stderr=stderr)


def global_terms(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    data: Dataset,
    t: float | None = None,
) -> np.ndarray:
    """Per-pair global losses 1 - |<Phi_j| V |Psi_j>|^2."""
    if data.size == 0:
        raise ValueError("empty dataset")
    if data.n != ansatz.n:
        raise ValueError("dataset and ansatz qubit counts differ")
    out = apply_vff(ansatz, theta, gamma, data.inputs(), t)
    amps = np.einsum("dj,dj->j", data.outputs().conj(), out)
    return 1.0 - np.abs(amps) ** 2


def local_terms(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    data: Dataset,
    t: float | None = None,
) -> np.ndarray:
    """Per-pair local losses 1 - (1/n) sum_i <chi_j| (|psi_i><psi_i| x 1) |chi_j>
    with chi_j = V^dag |Phi_j>."""
    if data.size == 0:
        raise ValueError("empty dataset")
    if not data.has_factors:
        raise ValueError("local cost needs the per-qubit input factors")
    n, N = ansatz.n, data.size
    phis = data.outputs()
    chi = ansatz.w.apply(phis, theta, dagger=True)
    chi = ansatz.diag_phases(gamma, t).conj()[:, None] * chi
    chi = ansatz.w.apply(chi, theta)
    t_chi = chi.T.reshape([N] + [2] * n)
    vals = np.zeros(N)
    for q in range(n):
        fq = np.stack([p.factors[q] for p in data.pairs])  # (N, 2)
        tq = np.moveaxis(t_chi, 1 + q, 1).reshape(N, 2, -1)
        y = np.einsum("jb,jbm->jm", fq.conj(), tq)
        vals += np.sum(np.abs(y) ** 2, axis=1)
    return 1.0 - vals / n


def cost_global_empirical(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    data: Dataset,
    t: float | None = None,
) -> CostValue:
    raw = float(np.mean(global_terms(ansatz, theta, gamma, data, t)))
    return _clamped(raw, "EMP_GLOBAL")


def cost_local_empirical(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    data: Dataset,
    t: float | None = None,
) -> CostValue:
    raw = float(np.mean(local_terms(ansatz, theta, gamma, data, t)))
    return _clamped(raw, "EMP_LOCAL")


def tensor_power_cost_relation(c_hst: float, n: int) -> float:
    """Expected product-global cost of an n-fold tensor power of one 1-qubit
    unitary with Hilbert-Schmidt cost c_hst:
    1 - (1/6^n) (2 + 4 (1-c_hst)^{1/n})^n."""
    if not 0.0 <= c_hst <= 1.0:
        raise ValueError(f"c_hst must lie in [0, 1], got {c_hst}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1.0 - (2.0 + 4.0 * (1.0 - c_hst) ** (1.0 / n)) ** n / 6**n
