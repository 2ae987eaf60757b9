"""Parameterized circuits of the diagonal-form ansatz V_t = W(theta) D(t*gamma) W(theta)^dag.

Gate conventions (these fix the sign/phase freedom the problem leaves open):

* RZ(t)    = exp(-i t Z/2)
* RZZ(t)   = exp(-i t Z(x)Z / 2)
* GIVENS(t): identity on span{|00>,|11>}; the real rotation
  [[cos t, -sin t], [sin t, cos t]] on span{|01>,|10>}
* SYM(t1,t2,t3,t4): the most general particle-number-conserving 2-qubit gate,
  e^{i t1} on |00>, 1 on |11>, and the block
  [[cos t2, -e^{i t3} sin t2], [e^{i t4} sin t2, e^{i(t3+t4)} cos t2]]
  on span{|01>,|10>}.

Every slot carries an exact analytic shift rule for gradients. RZ/RZZ and the
three phase slots of SYM generate single-frequency cost dependence, so the
two-point +-pi/2 rule is exact. GIVENS and the SYM rotation slot have
generators with spectrum {0, +-1}; their cost dependence carries a second
harmonic and needs the exact four-point rule (shifts +-pi/4 and +-pi/2).

The diagonal circuit's time scaling is representational: stored gamma are the
angles at the reference step dt_ref, and evaluation at time t uses angles
(t/dt_ref)*gamma, which makes D_{dt}^M = D_{M dt} an identity of the
representation rather than an approximation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import DENSE_QUBIT_CAP, apply_gate_cols, check_dense_cap

__all__ = [
    "GateSpec",
    "ParamCircuit",
    "VffAnsatz",
    "rz_matrix",
    "rzz_matrix",
    "givens_matrix",
    "sym_matrix",
    "gate_matrix",
    "slot_shift_rule",
    "build_brickwork",
    "build_diagonal",
    "build_ansatz",
    "vff_unitary",
    "apply_vff",
    "circuit_stats",
    "circuit_to_json",
    "circuit_from_json",
    "params_to_json",
    "params_from_json",
]

_SLOT_ARITY = {"RZ": 1, "RZZ": 1, "GIVENS": 1, "SYM": 4, "FIXED": 0}
_TARGET_ARITY = {"RZ": 1, "RZZ": 2, "GIVENS": 2, "SYM": 2}
DIAGONAL_KINDS = ("RZ", "RZZ")


def rz_matrix(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def rzz_matrix(t: float) -> np.ndarray:
    return np.diag(np.exp(-0.5j * t * np.array([1.0, -1.0, -1.0, 1.0])))


def givens_matrix(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array(
        [[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]], dtype=complex
    )


def sym_matrix(t1: float, t2: float, t3: float, t4: float) -> np.ndarray:
    c, s = np.cos(t2), np.sin(t2)
    return np.array(
        [
            [np.exp(1j * t1), 0, 0, 0],
            [0, c, -np.exp(1j * t3) * s, 0],
            [0, np.exp(1j * t4) * s, np.exp(1j * (t3 + t4)) * c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class GateSpec:
    kind: str
    targets: tuple[int, ...]
    param_slots: tuple[int, ...] = ()
    matrix: np.ndarray | None = None  # FIXED gates only

    def __post_init__(self):
        if self.kind not in _SLOT_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.param_slots) != _SLOT_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {_SLOT_ARITY[self.kind]} slots, got {len(self.param_slots)}"
            )
        if self.kind == "FIXED":
            if self.matrix is None:
                raise ValueError("FIXED gate needs a matrix")
            if self.matrix.shape != (2 ** len(self.targets),) * 2:
                raise ValueError("FIXED matrix shape does not match targets")
        elif len(self.targets) != _TARGET_ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {_TARGET_ARITY[self.kind]} qubits")

    @property
    def parameterized(self) -> bool:
        return bool(self.param_slots)


def gate_matrix(spec: GateSpec, params: np.ndarray) -> np.ndarray:
    """Dense matrix of a gate at the slot values it reads from `params`."""
    vals = [params[s] for s in spec.param_slots]
    if spec.kind == "RZ":
        return rz_matrix(vals[0])
    if spec.kind == "RZZ":
        return rzz_matrix(vals[0])
    if spec.kind == "GIVENS":
        return givens_matrix(vals[0])
    if spec.kind == "SYM":
        return sym_matrix(*vals)
    return spec.matrix


_RULE_1F = ((np.pi / 2, 0.5), (-np.pi / 2, -0.5))
_A2 = (1.0 - np.sqrt(2.0)) / 2.0
_RULE_2F = ((np.pi / 4, 1.0), (-np.pi / 4, -1.0), (np.pi / 2, _A2), (-np.pi / 2, -_A2))


def slot_shift_rule(kind: str, slot_pos: int) -> tuple[tuple[float, float], ...]:
    """(shift, weight) pairs whose weighted cost sum is the exact derivative
    with respect to one occurrence of the gate."""
    if kind in ("RZ", "RZZ"):
        return _RULE_1F
    if kind == "GIVENS":
        return _RULE_2F
    if kind == "SYM":
        return _RULE_2F if slot_pos == 1 else _RULE_1F
    raise ValueError(f"gate kind {kind!r} has no parameter slots")


@dataclass(frozen=True)
class ParamCircuit:
    n: int
    gates: tuple[GateSpec, ...]
    param_count: int

    def __post_init__(self):
        seen = []
        for g in self.gates:
            for s in g.param_slots:
                seen.append(s)
            if any(t < 0 or t >= self.n for t in g.targets):
                raise ValueError(f"gate targets {g.targets} out of range for n={self.n}")
        if sorted(seen) != list(range(self.param_count)):
            raise ValueError("parameter slots must cover 0..param_count-1 exactly once")

    def matrices(self, params: np.ndarray) -> list[np.ndarray]:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} parameters, got {params.shape}")
        return [gate_matrix(g, params) for g in self.gates]

    def apply(self, states: np.ndarray, params: np.ndarray, dagger: bool = False) -> np.ndarray:
        """Apply the circuit (or its adjoint) to a statevector or column batch."""
        states = np.asarray(states, dtype=complex)
        single = states.ndim == 1
        if single:
            states = states[:, None]
        mats = self.matrices(params)
        if dagger:
            for g, m in zip(reversed(self.gates), reversed(mats)):
                states = apply_gate_cols(states, m.conj().T, g.targets)
        else:
            for g, m in zip(self.gates, mats):
                states = apply_gate_cols(states, m, g.targets)
        return states[:, 0] if single else states

    def dense(self, params: np.ndarray, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
        check_dense_cap(self.n, cap)
        return self.apply(np.eye(2**self.n, dtype=complex), params)


def build_brickwork(n: int, layers: int, gate_kind: str = "GIVENS") -> ParamCircuit:
    """Brickwork of nearest-neighbour 2-qubit gates: each layer places a gate on
    odd pairs (0,1), (2,3), ... then on even pairs (1,2), (3,4), ...; n-1 gates
    per layer."""
    if n < 2:
        raise ValueError("brickwork needs at least 2 qubits")
    if layers < 1:
        raise ValueError("need at least one layer")
    if gate_kind not in ("GIVENS", "SYM"):
        raise ValueError(f"brickwork gate kind must be GIVENS or SYM, got {gate_kind!r}")
    arity = _SLOT_ARITY[gate_kind]
    gates, p = [], 0
    for _ in range(layers):
        for start in (0, 1):
            for q in range(start, n - 1, 2):
                gates.append(GateSpec(gate_kind, (q, q + 1), tuple(range(p, p + arity))))
                p += arity
    return ParamCircuit(n, tuple(gates), p)


def build_diagonal(n: int, model: str) -> ParamCircuit:
    """Diagonal layer: one RZ per qubit; for HEISENBERG additionally one RZZ
    per qubit pair."""
    if n < 1:
        raise ValueError("need at least one qubit")
    gates, p = [], 0
    for q in range(n):
        gates.append(GateSpec("RZ", (q,), (p,)))
        p += 1
    if model == "HEISENBERG":
        for a in range(n):
            for b in range(a + 1, n):
                gates.append(GateSpec("RZZ", (a, b), (p,)))
                p += 1
    elif model != "XY":
        raise ValueError(f"unknown diagonal model {model!r}")
    return ParamCircuit(n, tuple(gates), p)


def diagonal_generator_table(circuit: ParamCircuit) -> np.ndarray:
    """Matrix h of shape (param_count, 2**n) with diag D(gamma) = exp(-i h.T @ gamma).

    Valid for circuits of RZ/RZZ gates only; h rows are the half-integer
    Z-eigenvalue patterns of each gate's generator.
    """
    n, d = circuit.n, 2**circuit.n
    bits = (np.arange(d)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    z = 1.0 - 2.0 * bits  # (d, n): Z eigenvalue of each qubit per basis state
    h = np.zeros((circuit.param_count, d))
    for g in circuit.gates:
        if g.kind == "RZ":
            h[g.param_slots[0]] = 0.5 * z[:, g.targets[0]]
        elif g.kind == "RZZ":
            h[g.param_slots[0]] = 0.5 * z[:, g.targets[0]] * z[:, g.targets[1]]
        else:
            raise ValueError(f"{g.kind} is not a diagonal gate kind")
    return h


@dataclass(frozen=True)
class VffAnsatz:
    """Eigenvector circuit w (parameters theta) and diagonal circuit d
    (parameters gamma), trained at reference time step dt_ref."""

    w: ParamCircuit
    d: ParamCircuit
    dt_ref: float = 1.0
    _table: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.w.n != self.d.n:
            raise ValueError("w and d must act on the same qubit count")
        for g in self.d.gates:
            if g.kind not in DIAGONAL_KINDS:
                raise ValueError(f"diagonal circuit may only contain {DIAGONAL_KINDS}")
        if self.dt_ref <= 0:
            raise ValueError("dt_ref must be positive")
        object.__setattr__(self, "_table", diagonal_generator_table(self.d))

    @property
    def n(self) -> int:
        return self.w.n

    @property
    def param_count(self) -> int:
        return self.w.param_count + self.d.param_count

    def diag_phases(self, gamma: np.ndarray, t: float | None = None) -> np.ndarray:
        """Diagonal of D at time t (default: the reference step)."""
        gamma = np.asarray(gamma, dtype=float)
        if gamma.shape != (self.d.param_count,):
            raise ValueError(f"expected {self.d.param_count} gamma values, got {gamma.shape}")
        scale = 1.0 if t is None else t / self.dt_ref
        return np.exp(-1j * (self._table.T @ (scale * gamma)))


def vff_unitary(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    t: float | None = None,
    cap: int = DENSE_QUBIT_CAP,
) -> np.ndarray:
    """Dense W(theta) D(t gamma) W(theta)^dag."""
    check_dense_cap(ansatz.n, cap)
    return apply_vff(ansatz, theta, gamma, np.eye(2**ansatz.n, dtype=complex), t)


def apply_vff(
    ansatz: VffAnsatz,
    theta: np.ndarray,
    gamma: np.ndarray,
    states: np.ndarray,
    t: float | None = None,
) -> np.ndarray:
    """Statevector application of V_t; accepts a single state or a column batch."""
    states = np.asarray(states, dtype=complex)
    single = states.ndim == 1
    if single:
        states = states[:, None]
    out = ansatz.w.apply(states, theta, dagger=True)
    out = ansatz.diag_phases(gamma, t)[:, None] * out
    out = ansatz.w.apply(out, theta)
    return out[:, 0] if single else out


def circuit_stats(circuit: ParamCircuit) -> dict:
    """Gate counts and greedy (ASAP) circuit depth."""
    level = [0] * circuit.n
    depth = 0
    k = 0
    two_qubit = 0
    for g in circuit.gates:
        if g.parameterized:
            k += 1
        if len(g.targets) == 2:
            two_qubit += 1
        layer = max(level[t] for t in g.targets) + 1
        for t in g.targets:
            level[t] = layer
        depth = max(depth, layer)
    return {
        "K": k,
        "two_qubit_gate_count": two_qubit,
        "depth": depth,
        "param_count": circuit.param_count,
    }


def build_ansatz(model: str, n: int, layers: int | None = None, dt_ref: float = 0.1) -> VffAnsatz:
    """Standard ansatz for a model: GIVENS brickwork + RZ layer for XY,
    SYM brickwork + RZ/RZZ layer for HEISENBERG. Default ceil(1.5 n) layers."""
    if layers is None:
        layers = int(np.ceil(1.5 * n))
    kind = "GIVENS" if model == "XY" else "SYM"
    return VffAnsatz(
        w=build_brickwork(n, layers, kind),
        d=build_diagonal(n, model),
        dt_ref=dt_ref,
    )


def circuit_to_json(circuit: ParamCircuit) -> str:
    gates = []
    for g in circuit.gates:
        entry = {"kind": g.kind, "targets": list(g.targets), "slots": list(g.param_slots)}
        if g.kind == "FIXED":
            entry["matrix"] = [[[z.real, z.imag] for z in row] for row in g.matrix]
        gates.append(entry)
    return json.dumps({"n": circuit.n, "param_count": circuit.param_count, "gates": gates}, indent=1)


def circuit_from_json(text: str) -> ParamCircuit:
    payload = json.loads(text)
    gates = []
    for entry in payload["gates"]:
        matrix = None
        if entry["kind"] == "FIXED":
            matrix = np.array(
                [[complex(re, im) for re, im in row] for row in entry["matrix"]]
            )
        gates.append(
            GateSpec(entry["kind"], tuple(entry["targets"]), tuple(entry["slots"]), matrix)
        )
    return ParamCircuit(payload["n"], tuple(gates), payload["param_count"])


def params_to_json(theta: np.ndarray, gamma: np.ndarray, dt_ref: float) -> str:
    return json.dumps(
        {"dt_ref": dt_ref, "theta": list(map(float, theta)), "gamma": list(map(float, gamma))},
        indent=1,
    )


def params_from_json(text: str) -> tuple[np.ndarray, np.ndarray, float]:
    payload = json.loads(text)
    return (
        np.array(payload["theta"], dtype=float),
        np.array(payload["gamma"], dtype=float),
        float(payload["dt_ref"]),
    )
