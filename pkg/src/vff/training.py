"""Shift-rule gradients and the fast-forwarding training loop.

Gradients never use finite differences: every parameter slot carries an exact
analytic shift rule (see ansatz.slot_shift_rule). For a slot in the
eigenvector circuit the derivative sums the rule over the two occurrences of
W in V = W D W^dag; a diagonal slot has a single occurrence.

Both the global and the local empirical cost are reduced to sums of squared
amplitudes <bra_c| W D W^dag |ket_c> over a fixed set of columns:

* global: one column per training pair (bra = output, ket = input);
* local: the per-qubit projector terms expand into columns
  ket = |psi_i^(j)> (x) |m> over the computational basis |m> of the other
  qubits, all sharing bra = output_j.

That shared form lets one pair of forward/backward sweeps provide every
shifted-cost evaluation at O(1) gate applications per (slot, shift).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .ansatz import VffAnsatz, gate_matrix, slot_shift_rule, vff_unitary
from .costs import average_fidelity, cost_global_empirical, cost_local_empirical
from .data import Dataset
from .exceptions import NumericError
from .linalg import apply_gate_cols, kron_all
from .rng import make_rng

__all__ = [
    "TrainConfig",
    "GrowthConfig",
    "TrainResult",
    "TrainTrace",
    "AmplitudeEngine",
    "gradient_theta",
    "gradient_gamma",
    "full_gradient",
    "reff_train",
    "reff_train_grown",
    "termination_threshold",
    "trace_to_csv",
]


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "ADAM"
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    max_iters: int = 10000
    cost_kind: str = "EMP_GLOBAL"
    target_cost: float = 1e-8
    seed: int = 0
    init_scale: float = 0.1
    restarts: int = 1
    # learning-rate annealing: halve when the best cost improves by less than
    # 1% over `plateau_patience` iterations; give up (restart) below min_rate
    plateau_patience: int = 250
    plateau_decay: float = 0.5
    min_rate: float = 1e-9

    def __post_init__(self):
        if self.optimizer not in ("ADAM", "GD"):
            raise ValueError(f"optimizer must be ADAM or GD, got {self.optimizer!r}")
        if self.cost_kind not in ("EMP_GLOBAL", "EMP_LOCAL"):
            raise ValueError(f"cost_kind must be EMP_GLOBAL or EMP_LOCAL, got {self.cost_kind!r}")
        if self.target_cost < 0 or self.max_iters < 1 or self.restarts < 1:
            raise ValueError("target_cost >= 0, max_iters >= 1, restarts >= 1 required")


@dataclass(frozen=True)
class GrowthConfig:
    """Dataset-growth variant: start small, add pairs when the training cost
    keeps falling but a held-out validation cost stops improving."""

    initial_N: int = 1
    step: int = 1
    validation_N: int = 20
    plateau_window: int = 300
    max_N: int = 32
    gen_ratio: float = 100.0  # generalized when validation <= ratio * max(target, best)

    def __post_init__(self):
        if min(self.initial_N, self.step, self.validation_N, self.plateau_window) < 1:
            raise ValueError("growth parameters must be positive")


@dataclass
class TraceRecord:
    iter: int
    cost: float
    grad_norm: float
    validation_cost: float | None = None
    infidelity: float | None = None
    wall_ms: float = 0.0


TrainTrace = list


@dataclass
class TrainResult:
    theta: np.ndarray
    gamma: np.ndarray
    best_cost: float
    converged: bool
    iterations: int
    restarts_used: int
    trace: list[TraceRecord] = field(default_factory=list)
    grown_to: int | None = None
    generalized: bool | None = None


def _local_columns(ansatz: VffAnsatz, data: Dataset):
    """Column expansion of the local cost (see module docstring)."""
    n = ansatz.n
    kets, bra_index = [], []
    eye = np.eye(2, dtype=complex)
    for j, pair in enumerate(data.pairs):
        for i in range(n):
            blocks = [pair.factors[q].reshape(2, 1) if q == i else eye for q in range(n)]
            m = kron_all(blocks)  # (2**n, 2**(n-1))
            kets.append(m)
            bra_index.extend([j] * m.shape[1])
    return np.concatenate(kets, axis=1), np.array(bra_index)


class AmplitudeEngine:
    """Cost and exact shift-rule gradient of V = W(theta) D(gamma) W(theta)^dag
    over a fixed column set, at the ansatz reference time step."""

    def __init__(self, ansatz: VffAnsatz, bras: np.ndarray, bra_index: np.ndarray,
                 kets: np.ndarray, weights: np.ndarray):
        self.ansatz = ansatz
        self.bras = bras  # (d, n_bras) distinct bra states
        self.bra_index = bra_index  # column -> bra map
        self.kets = kets  # (d, cols)
        self.weights = weights  # (cols,) cost weights
        self.gates = ansatz.w.gates
        # slot -> (gate position, slot position within gate)
        self.slot_of = {}
        for g_pos, g in enumerate(self.gates):
            for s_pos, s in enumerate(g.param_slots):
                self.slot_of[s] = (g_pos, s_pos)

    @classmethod
    def for_cost(cls, ansatz: VffAnsatz, data: Dataset, cost_kind: str) -> "AmplitudeEngine":
        if data.size == 0:
            raise ValueError("empty dataset")
        if data.n != ansatz.n:
            raise ValueError("dataset and ansatz qubit counts differ")
        bras = data.outputs()
        if cost_kind == "EMP_GLOBAL":
            kets = data.inputs()
            idx = np.arange(data.size)
            weights = np.full(data.size, 1.0 / data.size)
        elif cost_kind == "EMP_LOCAL":
            if not data.has_factors:
                raise ValueError("local cost needs the per-qubit input factors")
            kets, idx = _local_columns(ansatz, data)
            weights = np.full(kets.shape[1], 1.0 / (ansatz.n * data.size))
        else:
            raise ValueError(f"unknown empirical cost kind {cost_kind!r}")
        return cls(ansatz, bras, idx, kets, weights)

    # -- generic (slow) amplitude path, used by the per-slot gradient API ----

    def _amps(self, theta_left: np.ndarray, gamma: np.ndarray,
              theta_right: np.ndarray, gamma_shift: tuple[int, float] | None = None) -> np.ndarray:
        w = self.ansatz.w
        y = w.apply(self.kets, theta_right, dagger=True)
        phases = self.ansatz.diag_phases(gamma)
        if gamma_shift is not None:
            slot, shift = gamma_shift
            phases = phases * np.exp(-1j * self.ansatz._table[slot] * shift)
        y = phases[:, None] * y
        y = w.apply(y, theta_left)
        return np.einsum("dc,dc->c", self.bras[:, self.bra_index].conj(), y)

    def cost_from_amps(self, amps: np.ndarray) -> float:
        return 1.0 - float(np.sum(self.weights * np.abs(amps) ** 2))

    def cost(self, theta: np.ndarray, gamma: np.ndarray) -> float:
        return self.cost_from_amps(self._amps(theta, gamma, theta))

    def grad_theta_slot(self, theta: np.ndarray, gamma: np.ndarray, slot: int) -> float:
        """Derivative for one eigenvector-circuit slot: the slot's shift rule
        applied to each of the two occurrences of W, costs summed."""
        theta = np.asarray(theta, dtype=float)
        if not 0 <= slot < self.ansatz.w.param_count:
            raise IndexError(f"theta slot {slot} out of range")
        g_pos, s_pos = self.slot_of[slot]
        rule = slot_shift_rule(self.gates[g_pos].kind, s_pos)
        total = 0.0
        for shift, weight in rule:
            shifted = theta.copy()
            shifted[slot] += shift
            c1 = self.cost_from_amps(self._amps(shifted, gamma, theta))
            c2 = self.cost_from_amps(self._amps(theta, gamma, shifted))
            total += weight * (c1 + c2)
        return total

    def grad_gamma_slot(self, theta: np.ndarray, gamma: np.ndarray, slot: int) -> float:
        """Derivative for one diagonal slot: two-point rule, single occurrence."""
        if not 0 <= slot < self.ansatz.d.param_count:
            raise IndexError(f"gamma slot {slot} out of range")
        total = 0.0
        for shift, weight in ((np.pi / 2, 0.5), (-np.pi / 2, -0.5)):
            c = self.cost_from_amps(self._amps(theta, gamma, theta, gamma_shift=(slot, shift)))
            total += weight * c
        return total

    # -- fast path: swept evaluation of all slots --------------------------

    def cost_and_grad(self, theta: np.ndarray, gamma: np.ndarray) -> tuple[float, np.ndarray]:
        a = self.ansatz
        w = a.w
        theta = np.asarray(theta, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        mats = w.matrices(theta)
        phases = a.diag_phases(gamma)
        K = len(self.gates)
        bras_full_idx = self.bra_index

        # occurrence 1 (left W): amp = <bra| G_K..G_{g+1} G_g' G_{g-1}..G_1 |D W^dag ket>
        wk = w.apply(self.kets, theta, dagger=True)  # W^dag kets, reused for gamma
        rights1 = [phases[:, None] * wk]
        for g, m in zip(self.gates, mats):
            rights1.append(apply_gate_cols(rights1[-1], m, g.targets))
        lefts1 = [None] * (K + 1)
        lefts1[K] = self.bras
        for gi in range(K - 1, -1, -1):
            lefts1[gi] = apply_gate_cols(lefts1[gi + 1], mats[gi].conj().T, self.gates[gi].targets)

        base_amps = np.einsum("dc,dc->c", lefts1[K][:, bras_full_idx].conj(), rights1[K])
        cost = self.cost_from_amps(base_amps)

        # occurrence 2 (right W^dag): |amp| = |<ket| G_K..G_g'..G_1 |D^dag W^dag bra>|
        wb = w.apply(self.bras, theta, dagger=True)  # W^dag bras, reused for gamma
        rights2 = [phases.conj()[:, None] * wb]
        for g, m in zip(self.gates, mats):
            rights2.append(apply_gate_cols(rights2[-1], m, g.targets))
        lefts2 = [None] * (K + 1)
        lefts2[K] = self.kets
        for gi in range(K - 1, -1, -1):
            lefts2[gi] = apply_gate_cols(lefts2[gi + 1], mats[gi].conj().T, self.gates[gi].targets)

        grad = np.zeros(a.param_count)
        for g_pos, g in enumerate(self.gates):
            for s_pos, slot in enumerate(g.param_slots):
                total = 0.0
                for shift, weight in slot_shift_rule(g.kind, s_pos):
                    shifted = theta.copy()
                    shifted[slot] += shift
                    gm = gate_matrix(g, shifted)
                    a1 = np.einsum(
                        "dc,dc->c",
                        lefts1[g_pos + 1][:, bras_full_idx].conj(),
                        apply_gate_cols(rights1[g_pos], gm, g.targets),
                    )
                    a2 = np.einsum(
                        "dc,dc->c",
                        lefts2[g_pos + 1].conj(),
                        apply_gate_cols(rights2[g_pos], gm, g.targets)[:, bras_full_idx],
                    )
                    total += weight * (self.cost_from_amps(a1) + self.cost_from_amps(a2))
                grad[slot] = total

        # gamma slots: amp = (W^dag bra)^dag . diag . (W^dag ket)
        prod = wb[:, bras_full_idx].conj() * wk  # (d, cols)
        table = a._table
        for slot in range(a.d.param_count):
            total = 0.0
            for shift, weight in ((np.pi / 2, 0.5), (-np.pi / 2, -0.5)):
                dshift = phases * np.exp(-1j * table[slot] * shift)
                amps = np.einsum("dc,d->c", prod, dshift)
                total += weight * self.cost_from_amps(amps)
            grad[w.param_count + slot] = total
        return cost, grad


def _engine(ansatz, data, cost_kind):
    return AmplitudeEngine.for_cost(ansatz, data, cost_kind)


def gradient_theta(ansatz: VffAnsatz, theta, gamma, data: Dataset, slot: int,
                   cost_kind: str = "EMP_GLOBAL") -> float:
    """Shift-rule partial derivative of the empirical cost w.r.t. theta[slot]."""
    return _engine(ansatz, data, cost_kind).grad_theta_slot(theta, gamma, slot)


def gradient_gamma(ansatz: VffAnsatz, theta, gamma, data: Dataset, slot: int,
                   cost_kind: str = "EMP_GLOBAL") -> float:
    """Shift-rule partial derivative of the empirical cost w.r.t. gamma[slot]."""
    return _engine(ansatz, data, cost_kind).grad_gamma_slot(theta, gamma, slot)


def full_gradient(ansatz: VffAnsatz, theta, gamma, data: Dataset,
                  cost_kind: str = "EMP_GLOBAL") -> np.ndarray:
    """All theta partials followed by all gamma partials."""
    _, grad = _engine(ansatz, data, cost_kind).cost_and_grad(theta, gamma)
    return grad


def empirical_cost(ansatz: VffAnsatz, theta, gamma, data: Dataset, cost_kind: str):
    fn = cost_global_empirical if cost_kind == "EMP_GLOBAL" else cost_local_empirical
    return fn(ansatz, theta, gamma, data)


def termination_threshold(eps_target: float, m0: int, trotter_eps: float, n: int) -> float:
    """Training-cost threshold below which M0-step fast-forwarding at target
    infidelity eps_target is certified: eps/(16 M0^2) - eps_trot^2/(4 (2^n + 1)).
    A negative value means the Trotter error alone forbids certification."""
    if m0 < 1:
        raise ValueError("M0 must be >= 1")
    return eps_target / (16.0 * m0**2) - trotter_eps**2 / (4.0 * (2.0**n + 1.0))


class _Optimizer:
    def __init__(self, cfg: TrainConfig, x0: np.ndarray):
        self.cfg = cfg
        self.x = x0.copy()
        self.m = np.zeros_like(x0)
        self.v = np.zeros_like(x0)
        self.t = 0
        self.rate = cfg.learning_rate

    def step(self, grad: np.ndarray) -> None:
        self.t += 1
        if self.cfg.optimizer == "GD":
            self.x -= self.rate * grad
            return
        c = self.cfg
        self.m = c.beta1 * self.m + (1 - c.beta1) * grad
        self.v = c.beta2 * self.v + (1 - c.beta2) * grad * grad
        m_hat = self.m / (1 - c.beta1**self.t)
        v_hat = self.v / (1 - c.beta2**self.t)
        self.x -= self.rate * m_hat / (np.sqrt(v_hat) + c.adam_eps)


def _run_single(engine: AmplitudeEngine, cfg: TrainConfig, x0: np.ndarray,
                iter_offset: int, trace: list, validation=None, infidelity_fn=None,
                max_iters: int | None = None):
    """One optimizer run from x0. Returns (best_cost, best_x, iters_done)."""
    nw = engine.ansatz.w.param_count
    opt = _Optimizer(cfg, x0)
    best, best_x = np.inf, x0.copy()
    stall = 0
    t0 = time.perf_counter()
    limit = cfg.max_iters if max_iters is None else max_iters
    for it in range(1, limit + 1):
        cost, grad = engine.cost_and_grad(opt.x[:nw], opt.x[nw:])
        if not np.isfinite(cost) or not np.all(np.isfinite(grad)):
            raise NumericError(
                f"non-finite cost/gradient at iteration {iter_offset + it}: cost={cost}"
            )
        if cost < best * 0.99:
            stall = 0
        else:
            stall += 1
        if cost < best:
            best, best_x = cost, opt.x.copy()
        rec = TraceRecord(
            iter=iter_offset + it,
            cost=cost,
            grad_norm=float(np.linalg.norm(grad)),
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )
        if validation is not None:
            rec.validation_cost = validation(opt.x[:nw], opt.x[nw:])
        if infidelity_fn is not None:
            rec.infidelity = infidelity_fn(opt.x[:nw], opt.x[nw:])
        trace.append(rec)
        if best <= cfg.target_cost:
            return best, best_x, it
        if stall >= cfg.plateau_patience:
            opt.rate *= cfg.plateau_decay
            stall = 0
            if opt.rate < cfg.min_rate:
                return best, best_x, it
        opt.step(grad)
    return best, best_x, limit


def reff_train(
    ansatz: VffAnsatz,
    data: Dataset,
    cfg: TrainConfig,
    validation_data: Dataset | None = None,
    reference_unitary: np.ndarray | None = None,
) -> TrainResult:
    """Train V until the empirical cost reaches cfg.target_cost or budgets run
    out. Parameters are initialized uniformly in +-init_scale; if a run stalls
    (learning rate annealed below min_rate or iteration budget spent), up to
    cfg.restarts fresh initializations are tried. The best parameters ever
    seen are returned, never the last iterate.
    """
    engine = AmplitudeEngine.for_cost(ansatz, data, cfg.cost_kind)
    validation = None
    if validation_data is not None:
        val_engine = AmplitudeEngine.for_cost(ansatz, validation_data, cfg.cost_kind)
        validation = lambda th, ga: val_engine.cost(th, ga)
    infidelity_fn = None
    if reference_unitary is not None:
        infidelity_fn = lambda th, ga: 1.0 - average_fidelity(
            reference_unitary, vff_unitary(ansatz, th, ga)
        )

    trace: list[TraceRecord] = []
    best, best_x = np.inf, None
    iters_total = 0
    restarts_used = 0
    for restart in range(cfg.restarts):
        restarts_used = restart + 1
        rng = make_rng(cfg.seed, restart)
        x0 = rng.uniform(-cfg.init_scale, cfg.init_scale, ansatz.param_count)
        run_best, run_x, iters = _run_single(
            engine, cfg, x0, iters_total, trace, validation, infidelity_fn
        )
        iters_total += iters
        if run_best < best:
            best, best_x = run_best, run_x
        if best <= cfg.target_cost:
            break
    nw = ansatz.w.param_count
    return TrainResult(
        theta=best_x[:nw],
        gamma=best_x[nw:],
        best_cost=best,
        converged=best <= cfg.target_cost,
        iterations=iters_total,
        restarts_used=restarts_used,
        trace=trace,
    )


def reff_train_grown(
    ansatz: VffAnsatz,
    hamiltonian,
    trotter_cfg,
    cfg: TrainConfig,
    growth: GrowthConfig,
    source: str = "HAAR1",
) -> TrainResult:
    """Training with dataset growth. Pairs are drawn from per-index streams, so
    growing from N to N+step appends pairs without disturbing existing ones.
    Validation pairs come from a disjoint stream and never enter gradients.

    Growth triggers when the training cost is still improving over the last
    plateau_window iterations but the validation cost is not (relative
    improvement < 1%). Exhausting max_N without generalization is reported in
    the result, not raised.
    """
    from .data import generate_dataset

    n_now = growth.initial_N
    val_data = generate_dataset(
        hamiltonian, trotter_cfg, growth.validation_N, source, cfg.seed, stream=1
    )
    trace: list[TraceRecord] = []
    iters_total = 0
    rng = make_rng(cfg.seed, 0)
    x = rng.uniform(-cfg.init_scale, cfg.init_scale, ansatz.param_count)
    nw = ansatz.w.param_count
    best, best_x = np.inf, x.copy()

    while True:
        data = generate_dataset(hamiltonian, trotter_cfg, n_now, source, cfg.seed, stream=0)
        engine = AmplitudeEngine.for_cost(ansatz, data, cfg.cost_kind)
        val_engine = AmplitudeEngine.for_cost(ansatz, val_data, cfg.cost_kind)
        opt = _Optimizer(cfg, x)
        stall = 0
        local_best = np.inf
        window: list[tuple[float, float]] = []  # (train cost, validation cost)
        grew = False
        t0 = time.perf_counter()
        while iters_total < cfg.max_iters:
            iters_total += 1
            cost, grad = engine.cost_and_grad(opt.x[:nw], opt.x[nw:])
            if not np.isfinite(cost) or not np.all(np.isfinite(grad)):
                raise NumericError(f"non-finite cost/gradient at iteration {iters_total}")
            val_cost = val_engine.cost(opt.x[:nw], opt.x[nw:])
            trace.append(
                TraceRecord(
                    iter=iters_total,
                    cost=cost,
                    grad_norm=float(np.linalg.norm(grad)),
                    validation_cost=val_cost,
                    wall_ms=(time.perf_counter() - t0) * 1e3,
                )
            )
            if cost < local_best:
                local_best = cost
            if cost < best:
                best, best_x = cost, opt.x.copy()
            if best <= cfg.target_cost:
                break
            window.append((cost, val_cost))
            if len(window) > growth.plateau_window:
                window.pop(0)
                t_old, v_old = window[0]
                train_improving = cost < 0.99 * t_old
                val_plateaued = val_cost > 0.99 * v_old
                if train_improving and val_plateaued and n_now < growth.max_N:
                    n_now = min(n_now + growth.step, growth.max_N)
                    x = opt.x.copy()  # warm start on the grown dataset
                    grew = True
                    break
            if cost < local_best * 0.99:
                stall = 0
            else:
                stall += 1
            if stall >= cfg.plateau_patience:
                opt.rate *= cfg.plateau_decay
                stall = 0
                if opt.rate < cfg.min_rate:
                    break
            opt.step(grad)
        if grew:
            continue
        break

    final_val = AmplitudeEngine.for_cost(ansatz, val_data, cfg.cost_kind).cost(
        best_x[:nw], best_x[nw:]
    )
    generalized = final_val <= growth.gen_ratio * max(cfg.target_cost, best)
    return TrainResult(
        theta=best_x[:nw],
        gamma=best_x[nw:],
        best_cost=best,
        converged=best <= cfg.target_cost,
        iterations=iters_total,
        restarts_used=1,
        trace=trace,
        grown_to=n_now,
        generalized=generalized,
    )


def trace_to_csv(trace: list[TraceRecord]) -> str:
    lines = ["iter,cost,grad_norm,validation_cost,infidelity,wall_ms"]
    for r in trace:
        val = "" if r.validation_cost is None else repr(r.validation_cost)
        inf = "" if r.infidelity is None else repr(r.infidelity)
        lines.append(f"{r.iter},{r.cost!r},{r.grad_norm!r},{val},{inf},{r.wall_ms:.3f}")
    return "\n".join(lines) + "\n"
