import json

import numpy as np
import pytest

from vff.data import (
    Dataset,
    generate_dataset,
    load_dataset,
    sample_haar_single_qubit,
    sample_stabilizer_single_qubit,
    save_dataset,
)
from vff.exceptions import ResourceCapError
from vff.hamiltonians import TrotterConfig, build_heisenberg_chain, build_xy_chain, trotter_unitary
from vff.rng import make_rng


class TestSingleQubitSampling:
    def test_unit_norm(self):
        rng = make_rng(0)
        for _ in range(50):
            assert abs(np.linalg.norm(sample_haar_single_qubit(rng)) - 1) < 1e-12
            assert abs(np.linalg.norm(sample_stabilizer_single_qubit(rng)) - 1) < 1e-12

    def test_haar_first_moment(self):
        rng = make_rng(1)
        samples = 30000
        acc = np.zeros((2, 2), dtype=complex)
        vals = np.empty((samples, 2, 2), dtype=complex)
        for s in range(samples):
            psi = sample_haar_single_qubit(rng)
            vals[s] = np.outer(psi, psi.conj())
        mean = vals.mean(axis=0)
        stderr = np.sqrt(
            np.var(vals.real, axis=0, ddof=1) + np.var(vals.imag, axis=0, ddof=1)
        ) / np.sqrt(samples)
        assert np.all(np.abs(mean - np.eye(2) / 2) <= 3 * stderr + 1e-12)

    def _second_moment(self, sampler, samples, rng):
        vals = np.empty((samples, 4, 4), dtype=complex)
        for s in range(samples):
            psi = sampler(rng)
            two = np.kron(psi, psi)
            vals[s] = np.outer(two, two.conj())
        mean = vals.mean(axis=0)
        stderr = np.sqrt(
            np.var(vals.real, axis=0, ddof=1) + np.var(vals.imag, axis=0, ddof=1)
        ) / np.sqrt(samples)
        return mean, stderr

    def _check_twirl(self, sampler, rng, samples=30000):
        # 3 sigma entrywise; one rerun at 4x samples for marginal fluctuations
        swap = np.eye(4)[[0, 2, 1, 3]]
        target = (np.eye(4) + swap) / 6
        mean, stderr = self._second_moment(sampler, samples, rng)
        if not np.all(np.abs(mean - target) <= 3 * stderr + 1e-12):
            mean, stderr = self._second_moment(sampler, 4 * samples, rng)
        assert np.all(np.abs(mean - target) <= 3 * stderr + 1e-12)

    def test_haar_second_moment_twirl(self):
        self._check_twirl(sample_haar_single_qubit, make_rng(2))

    def test_stabilizer_is_2_design(self):
        self._check_twirl(sample_stabilizer_single_qubit, make_rng(3))

    def test_stabilizer_frequencies(self):
        rng = make_rng(4)
        draws = 60000
        states = np.stack([sample_stabilizer_single_qubit(rng) for _ in range(draws)])
        # count by overlap with each of the six states
        from vff.data import _STABILIZER_STATES

        overlaps = np.abs(states @ _STABILIZER_STATES.conj().T) ** 2
        counts = (overlaps > 1 - 1e-9).sum(axis=0)
        freq = counts / draws
        sigma = np.sqrt((1 / 6) * (5 / 6) / draws)
        assert np.all(np.abs(freq - 1 / 6) <= 3 * sigma + 1e-12)


class TestGenerateDataset:
    def setup_method(self):
        self.h = build_xy_chain(3)
        self.cfg = TrotterConfig(order=2, r=1, dt=0.1)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            generate_dataset(self.h, self.cfg, 0)

    def test_outputs_are_evolved_inputs(self):
        ds = generate_dataset(self.h, self.cfg, 4, seed=7)
        u = trotter_unitary(self.h, self.cfg)
        for pair in ds.pairs:
            assert np.max(np.abs(pair.output - u @ pair.input)) < 1e-10

    def test_factors_assemble_to_input(self):
        ds = generate_dataset(self.h, self.cfg, 3, seed=8)
        for pair in ds.pairs:
            v = pair.factors[0]
            for f in pair.factors[1:]:
                v = np.kron(v, f)
            assert np.max(np.abs(v - pair.input)) < 1e-14

    def test_deterministic_and_prefix_stable(self):
        a = generate_dataset(self.h, self.cfg, 5, seed=9)
        b = generate_dataset(self.h, self.cfg, 5, seed=9)
        assert all(np.array_equal(x.input, y.input) for x, y in zip(a.pairs, b.pairs))
        # growing a dataset preserves existing pairs: pair j depends only on (seed, j)
        big = generate_dataset(self.h, self.cfg, 8, seed=9)
        assert all(
            np.array_equal(x.input, y.input) for x, y in zip(a.pairs, big.pairs[:5])
        )

    def test_stabilizer_source(self):
        ds = generate_dataset(self.h, self.cfg, 3, source="STABILIZER", seed=1)
        assert ds.source == "STABILIZER" and ds.has_factors

    def test_haar_n_source(self):
        ds = generate_dataset(self.h, self.cfg, 2, source="HAAR_N", seed=1)
        assert not ds.has_factors
        u = trotter_unitary(self.h, self.cfg)
        for pair in ds.pairs:
            assert np.max(np.abs(pair.output - u @ pair.input)) < 1e-10

    def test_haar_n_cap(self):
        h = build_xy_chain(11)
        with pytest.raises(ResourceCapError):
            generate_dataset(h, self.cfg, 1, source="HAAR_N")


class TestPersistence:
    def _dataset(self, source="HAAR1"):
        h = build_heisenberg_chain(3, periodic=True)
        return generate_dataset(h, TrotterConfig(order=1, r=2, dt=0.2), 3, source, seed=11)

    def test_round_trip(self, tmp_path):
        ds = self._dataset()
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        ds2 = load_dataset(path)
        assert ds2.n == ds.n and ds2.source == ds.source and ds2.seed == ds.seed
        assert ds2.trotter == ds.trotter
        assert ds2.hamiltonian.model == "HEISENBERG" and ds2.hamiltonian.periodic
        for p1, p2 in zip(ds.pairs, ds2.pairs):
            assert np.array_equal(p1.output, p2.output)
            assert np.array_equal(p1.input, p2.input)
            for f1, f2 in zip(p1.factors, p2.factors):
                assert np.array_equal(f1, f2)

    def test_round_trip_entangled(self, tmp_path):
        ds = self._dataset(source="HAAR_N")
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        ds2 = load_dataset(path)
        assert not ds2.has_factors
        assert np.array_equal(ds.pairs[0].input, ds2.pairs[0].input)

    def test_save_identical_bytes(self, tmp_path):
        ds = self._dataset()
        p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        save_dataset(ds, p1)
        save_dataset(ds, p2)
        assert open(p1).read() == open(p2).read()

    def test_corrupted_norm_rejected(self, tmp_path):
        ds = self._dataset()
        path = str(tmp_path / "ds.json")
        save_dataset(ds, path)
        payload = json.load(open(path))
        payload["pairs"][0]["output"][0] = [2.0, 0.0]
        json.dump(payload, open(path, "w"))
        with pytest.raises(ValueError):
            load_dataset(path)

    def test_bad_version_rejected(self, tmp_path):
        path = str(tmp_path / "ds.json")
        json.dump({"format_version": 99}, open(path, "w"))
        with pytest.raises(ValueError):
            load_dataset(path)
