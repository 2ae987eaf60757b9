"""Training-data generation and persistence.

Inputs are tensor products of Haar-random single-qubit states (or uniformly
random single-qubit stabilizer states, a 2-design with identical first two
moments), evolved by the Trotterized target to produce outputs. The
single-qubit factors are retained with every pair: the local cost's
projectors need them, so a dataset without factors cannot train locally.

An entangled variant (HAAR_N) draws full n-qubit Haar states; it exists for
cross-checking the entangled-data fidelity bound and is capped at small n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ResourceCapError
from .hamiltonians import (
    PauliSumHamiltonian,
    TrotterConfig,
    apply_trotter,
    hamiltonian_from_json,
    hamiltonian_to_json,
)
from .linalg import STATEVECTOR_QUBIT_CAP, haar_random_state, haar_random_unitary, kron_all
from .rng import make_rng

__all__ = [
    "SOURCES",
    "TrainingPair",
    "Dataset",
    "sample_haar_single_qubit",
    "sample_stabilizer_single_qubit",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]

SOURCES = ("HAAR1", "STABILIZER", "HAAR_N")
HAAR_N_CAP = 10

_STABILIZER_STATES = np.array(
    [
        [1, 0],
        [0, 1],
        [1 / np.sqrt(2), 1 / np.sqrt(2)],
        [1 / np.sqrt(2), -1 / np.sqrt(2)],
        [1 / np.sqrt(2), 1j / np.sqrt(2)],
        [1 / np.sqrt(2), -1j / np.sqrt(2)],
    ],
    dtype=complex,
)


def sample_haar_single_qubit(rng: np.random.Generator) -> np.ndarray:
    """Haar-random single-qubit state (first column of a Haar 2x2 unitary)."""
    return haar_random_unitary(2, rng)[:, 0]


def sample_stabilizer_single_qubit(rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the six single-qubit stabilizer states."""
    return _STABILIZER_STATES[rng.integers(0, 6)].copy()


@dataclass(frozen=True)
class TrainingPair:
    """One (input, evolved output) pair. `factors` holds the n single-qubit
    input factors for product sources and is None for entangled inputs."""

    input: np.ndarray
    output: np.ndarray
    factors: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True)
class Dataset:
    n: int
    pairs: tuple[TrainingPair, ...]
    source: str
    hamiltonian: PauliSumHamiltonian
    trotter: TrotterConfig
    seed: int

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        d = 2**self.n
        for p in self.pairs:
            if p.input.shape != (d,) or p.output.shape != (d,):
                raise ValueError("pair dimensions do not match qubit count")

    @property
    def size(self) -> int:
        return len(self.pairs)

    @property
    def has_factors(self) -> bool:
        return all(p.factors is not None for p in self.pairs)

    def inputs(self) -> np.ndarray:
        """(2**n, N) column matrix of inputs."""
        return np.stack([p.input for p in self.pairs], axis=1)

    def outputs(self) -> np.ndarray:
        return np.stack([p.output for p in self.pairs], axis=1)


def _sample_input(n: int, source: str, rng: np.random.Generator):
    if source == "HAAR_N":
        return haar_random_state(2**n, rng), None
    sampler = sample_haar_single_qubit if source == "HAAR1" else sample_stabilizer_single_qubit
    factors = tuple(sampler(rng) for _ in range(n))
    return kron_all(factors), factors


def generate_dataset(
    h: PauliSumHamiltonian,
    cfg: TrotterConfig,
    num_pairs: int,
    source: str = "HAAR1",
    seed: int = 0,
    stream: int = 0,
) -> Dataset:
    """Draw inputs per `source`, evolve each by the Trotter circuit.

    Outputs are produced by statevector application, so product sources work
    beyond the dense-operator cap. Pair j is drawn from the derived stream
    (seed, stream, j), making the dataset independent of generation order.
    """
    if num_pairs < 1:
        raise ValueError("need at least one training pair")
    if h.n > STATEVECTOR_QUBIT_CAP:
        raise ResourceCapError(f"{h.n} qubits exceeds statevector cap {STATEVECTOR_QUBIT_CAP}")
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}")
    if source == "HAAR_N" and h.n > HAAR_N_CAP:
        raise ResourceCapError(f"HAAR_N datasets are capped at {HAAR_N_CAP} qubits")
    pairs = []
    for j in range(num_pairs):
        rng = make_rng(seed, stream, j)
        state, factors = _sample_input(h.n, source, rng)
        out = apply_trotter(h, cfg, state)
        pairs.append(TrainingPair(state, out, factors))
    return Dataset(h.n, tuple(pairs), source, h, cfg, seed)


def _complex_list(vec: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in vec]


def _complex_array(pairs: list) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def save_dataset(ds: Dataset, path: str) -> None:
    records = []
    for p in ds.pairs:
        rec = {"output": _complex_list(p.output)}
        if p.factors is not None:
            rec["factors"] = [_complex_list(f) for f in p.factors]
        else:
            rec["input"] = _complex_list(p.input)
        records.append(rec)
    payload = {
        "format_version": 1,
        "n": ds.n,
        "N": ds.size,
        "source": ds.source,
        "seed": ds.seed,
        "hamiltonian": json.loads(hamiltonian_to_json(ds.hamiltonian)),
        "trotter": {"order": ds.trotter.order, "r": ds.trotter.r, "dt": ds.trotter.dt},
        "pairs": records,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_dataset(path: str) -> Dataset:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format_version") != 1:
        raise ValueError(f"unsupported dataset format {payload.get('format_version')!r}")
    n = payload["n"]
    h = hamiltonian_from_json(json.dumps(payload["hamiltonian"]))
    if h.n != n:
        raise ValueError("hamiltonian qubit count disagrees with dataset header")
    cfg = TrotterConfig(**payload["trotter"])
    pairs = []
    for rec in payload["pairs"]:
        output = _complex_array(rec["output"])
        if "factors" in rec:
            factors = tuple(_complex_array(f) for f in rec["factors"])
            if len(factors) != n:
                raise ValueError("factor count disagrees with qubit count")
            state = kron_all(factors)
        else:
            factors = None
            state = _complex_array(rec["input"])
        for vec, name in ((state, "input"), (output, "output")):
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"{name} norm {norm} is not 1 within 1e-9")
        pairs.append(TrainingPair(state, output, factors))
    if len(pairs) != payload["N"]:
        raise ValueError("pair count disagrees with header N")
    return Dataset(n, tuple(pairs), payload["source"], h, cfg, payload["seed"])
