"""Dense complex linear-algebra kernels for qubit systems.

Conventions used throughout the library:

* Basis ordering is big-endian: qubit 0 is the *most significant* bit of a
  computational-basis index. A statevector on n qubits is a length-2**n
  complex array; reshaping it to shape (2,)*n puts qubit q on axis q.
* Operators are dense 2**n x 2**n arrays with row/column indexing consistent
  with the statevector ordering.
* Everything here is a pure function over immutable inputs.

Tolerances: statevector norms are validated to 1e-12, unitarity to 1e-10
(double precision with headroom for long gate products).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ResourceCapError

__all__ = [
    "NORM_ATOL",
    "UNITARY_ATOL",
    "DENSE_QUBIT_CAP",
    "STATEVECTOR_QUBIT_CAP",
    "PauliString",
    "num_qubits",
    "check_state",
    "check_unitary",
    "check_dense_cap",
    "basis_state",
    "kron_all",
    "apply_gate",
    "apply_gate_cols",
    "embed_gate",
    "partial_trace",
    "schatten_norm",
    "state_fidelity",
    "haar_random_unitary",
    "haar_random_state",
    "hermitian_exp",
    "pauli_matrix",
    "apply_pauli_string",
]

NORM_ATOL = 1e-12
UNITARY_ATOL = 1e-10
DENSE_QUBIT_CAP = 10
STATEVECTOR_QUBIT_CAP = 14

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. letters="XZI" on 3 qubits."""

    n: int
    letters: str

    def __post_init__(self):
        if len(self.letters) != self.n:
            raise ValueError(f"expected {self.n} letters, got {self.letters!r}")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {bad} in {self.letters!r}")

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def dense(self) -> np.ndarray:
        return pauli_matrix(self.letters)


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def check_state(state: np.ndarray, atol: float = NORM_ATOL) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    num_qubits(state.shape[0])
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state norm {norm} deviates from 1 by more than {atol}")
    return state


def check_unitary(op: np.ndarray, atol: float = UNITARY_ATOL) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    dev = np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0])))
    if dev > atol:
        raise ValueError(f"operator deviates from unitarity by {dev} (> {atol})")
    return op


def check_dense_cap(n: int, cap: int = DENSE_QUBIT_CAP) -> None:
    if n > cap:
        raise ResourceCapError(f"dense operation on {n} qubits exceeds cap of {cap}")


def basis_state(n: int, index: int = 0) -> np.ndarray:
    state = np.zeros(2**n, dtype=complex)
    state[index] = 1.0
    return state


def kron_all(factors) -> np.ndarray:
    """Kronecker product of a sequence of arrays, qubit 0 leftmost."""
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def apply_gate(state: np.ndarray, gate: np.ndarray, targets) -> np.ndarray:
    """Apply a k-qubit gate to the given target qubits of a statevector."""
    state = np.asarray(state, dtype=complex)
    return apply_gate_cols(state[:, None], gate, targets)[:, 0]


def apply_gate_cols(states: np.ndarray, gate: np.ndarray, targets) -> np.ndarray:
    """Apply a k-qubit gate to each column of a (2**n, cols) array of states.

    This is the batched workhorse behind both gate application and the
    training sweeps; overlap-heavy callers batch many states as columns.
    """
    states = np.asarray(states, dtype=complex)
    gate = np.asarray(gate, dtype=complex)
    d, cols = states.shape
    n = num_qubits(d)
    targets = tuple(int(t) for t in targets)
    k = len(targets)
    if gate.shape != (2**k, 2**k):
        raise ValueError(f"gate shape {gate.shape} does not match {k} targets")
    if len(set(targets)) != k:
        raise ValueError(f"duplicate targets in {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"targets {targets} out of range for {n} qubits")

    t = states.reshape([2] * n + [cols])
    g = gate.reshape([2] * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot leaves axes as (gate outputs, untouched qubits, column); put
    # each qubit axis back where it belongs.
    rest = [q for q in range(n) if q not in targets]
    order = np.empty(n + 1, dtype=np.intp)
    for pos, q in enumerate(targets):
        order[q] = pos
    for pos, q in enumerate(rest):
        order[q] = k + pos
    order[n] = n
    return t.transpose(order).reshape(d, cols)


def embed_gate(gate: np.ndarray, targets, n: int) -> np.ndarray:
    """Dense 2**n x 2**n embedding of a k-qubit gate on the given targets."""
    return apply_gate_cols(np.eye(2**n, dtype=complex), gate, targets)


def partial_trace(op: np.ndarray, keep, n: int | None = None) -> np.ndarray:
    """Trace out every qubit not in `keep`, returning an operator on |keep| qubits.

    The kept qubits retain their relative order. Tr of the result equals
    Tr(op); keep=() returns a 1x1 array holding the full trace.
    """
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    if n is None:
        n = num_qubits(op.shape[0])
    keep = sorted(int(q) for q in keep)
    if any(q < 0 or q >= n for q in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} qubits")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate indices in keep={keep}")

    t = op.reshape([2] * n + [2] * n)
    traced = 0
    for q in range(n):
        if q not in keep:
            ax = q - traced
            m = t.ndim // 2
            t = np.trace(t, axis1=ax, axis2=m + ax)
            traced += 1
    k = len(keep)
    return t.reshape(2**k, 2**k)


def schatten_norm(op: np.ndarray, p) -> float:
    """Schatten p-norm (p in {1, 2, inf}) of a dense operator."""
    op = np.asarray(op, dtype=complex)
    if p == 2:
        return float(np.linalg.norm(op))  # Frobenius, no SVD needed
    sv = np.linalg.svd(op, compute_uv=False)
    if p == 1:
        return float(np.sum(sv))
    if p in (np.inf, float("inf"), "inf"):
        return float(sv[0]) if sv.size else 0.0
    raise ValueError(f"unsupported Schatten order {p!r}; use 1, 2, or inf")


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for two pure states of equal dimension."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(np.vdot(a, b)) ** 2)


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: Ginibre matrix, QR, phase-normalized R diagonal."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def hermitian_exp(h: np.ndarray, t: float, atol: float = UNITARY_ATOL) -> np.ndarray:
    """exp(-i t h) for Hermitian h, via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > atol:
        raise ValueError(f"input deviates from Hermitian by {dev} (> {atol})")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def pauli_matrix(letters: str) -> np.ndarray:
    """Dense matrix of a Pauli string, qubit 0 leftmost (most significant)."""
    return kron_all([_PAULI_1Q[c] for c in letters])


def apply_pauli_string(states: np.ndarray, letters: str) -> np.ndarray:
    """Apply a Pauli string to a (2**n,) or (2**n, cols) array without kron.

    X permutes amplitudes along the qubit axis, Z flips signs, Y does both
    with a phase; each non-identity letter costs one axis operation.
    """
    states = np.asarray(states, dtype=complex)
    single = states.ndim == 1
    if single:
        states = states[:, None]
    d, cols = states.shape
    n = num_qubits(d)
    if len(letters) != n:
        raise ValueError(f"{len(letters)} letters for {n} qubits")
    t = states.reshape([2] * n + [cols])
    for q, c in enumerate(letters):
        if c == "I":
            continue
        if c in ("X", "Y"):
            t = np.flip(t, axis=q)
        if c in ("Z", "Y"):
            sign = np.array([1.0, -1.0]) if c == "Z" else np.array([-1j, 1j])
            shape = [1] * (n + 1)
            shape[q] = 2
            t = t * sign.reshape(shape)
    out = t.reshape(d, cols)
    return out[:, 0] if single else out
