import numpy as np
import pytest

from vff.ansatz import ParamCircuit, VffAnsatz, build_ansatz, build_diagonal, vff_unitary
from vff.costs import (
    CostValue,
    average_fidelity,
    cost_global_empirical,
    cost_hst,
    cost_local_empirical,
    expected_entangled_global,
    expected_product_global,
    expected_product_local_mc,
    global_terms,
    local_terms,
    tensor_power_cost_relation,
)
from vff.data import Dataset, TrainingPair, generate_dataset
from vff.exceptions import ResourceCapError
from vff.hamiltonians import TrotterConfig, build_xy_chain
from vff.linalg import haar_random_unitary, kron_all, pauli_matrix
from vff.rng import make_rng

X = pauli_matrix("X")


def haar_states(dim, count, rng):
    z = (rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim)))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def product_dataset_for_ansatz(ansatz, theta, gamma, num_pairs, seed, t=None):
    """Dataset whose outputs are produced by the ansatz itself: the global
    optimum is then exactly reachable."""
    from vff.ansatz import apply_vff
    from vff.data import sample_haar_single_qubit

    rng = make_rng(seed)
    n = ansatz.n
    pairs = []
    for _ in range(num_pairs):
        factors = tuple(sample_haar_single_qubit(rng) for _ in range(n))
        state = kron_all(factors)
        out = apply_vff(ansatz, theta, gamma, state, t)
        pairs.append(TrainingPair(state, out, factors))
    return Dataset(n, tuple(pairs), "HAAR1", build_xy_chain(max(n, 2)), TrotterConfig(), seed)


class TestEmpiricalGlobal:
    def setup_method(self):
        self.ansatz = build_ansatz("XY", 3, dt_ref=0.1)
        rng = make_rng(0)
        self.theta = rng.uniform(-0.8, 0.8, self.ansatz.w.param_count)
        self.gamma = rng.uniform(-0.8, 0.8, self.ansatz.d.param_count)

    def test_zero_at_reachable_optimum(self):
        ds = product_dataset_for_ansatz(self.ansatz, self.theta, self.gamma, 4, seed=1)
        c = cost_global_empirical(self.ansatz, self.theta, self.gamma, ds)
        assert c.value < 1e-12

    def test_orthogonal_pair_gives_one(self):
        # output orthogonal to V|input>: flip the top excitation sector state
        from vff.ansatz import apply_vff

        state = kron_all([np.array([1, 0]), np.array([1, 0]), np.array([1, 0])]).astype(complex)
        v_out = apply_vff(self.ansatz, self.theta, self.gamma, state)
        # build an output orthogonal to v_out
        rng = make_rng(2)
        rand = haar_states(8, 1, rng)[0]
        orth = rand - np.vdot(v_out, rand) * v_out
        orth /= np.linalg.norm(orth)
        ds = Dataset(
            3,
            (TrainingPair(state, orth, tuple(np.array([1, 0], dtype=complex) for _ in range(3))),),
            "HAAR1", build_xy_chain(3), TrotterConfig(), 0,
        )
        c = cost_global_empirical(self.ansatz, self.theta, self.gamma, ds)
        assert abs(c.value - 1.0) < 1e-12

    def test_matches_trace_norm_form(self):
        # (1/4N) sum ||Phi><Phi| - V|Psi><Psi|V^dag||_1^2, by singular values
        h = build_xy_chain(3)
        cfg = TrotterConfig(order=2, r=1, dt=0.1)
        ds = generate_dataset(h, cfg, 5, seed=3)
        v = vff_unitary(self.ansatz, self.theta, self.gamma)
        acc = 0.0
        for pair in ds.pairs:
            rho = np.outer(pair.output, pair.output.conj())
            vpsi = v @ pair.input
            sigma = np.outer(vpsi, vpsi.conj())
            sv = np.linalg.svd(rho - sigma, compute_uv=False)
            acc += np.sum(sv) ** 2
        oracle = acc / (4 * ds.size)
        c = cost_global_empirical(self.ansatz, self.theta, self.gamma, ds)
        assert abs(c.value - oracle) < 1e-10

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            ds = Dataset(3, (), "HAAR1", build_xy_chain(3), TrotterConfig(), 0)
            cost_global_empirical(self.ansatz, self.theta, self.gamma, ds)


class TestEmpiricalLocal:
    def setup_method(self):
        self.ansatz = build_ansatz("XY", 3, dt_ref=0.1)
        rng = make_rng(5)
        self.theta = rng.uniform(-0.8, 0.8, self.ansatz.w.param_count)
        self.gamma = rng.uniform(-0.8, 0.8, self.ansatz.d.param_count)

    def test_zero_at_reachable_optimum(self):
        ds = product_dataset_for_ansatz(self.ansatz, self.theta, self.gamma, 4, seed=6)
        c = cost_local_empirical(self.ansatz, self.theta, self.gamma, ds)
        assert c.value < 1e-12

    def test_per_sample_sandwich(self):
        h = build_xy_chain(3)
        ds = generate_dataset(h, TrotterConfig(), 6, seed=7)
        for seed in range(5):
            rng = make_rng(100 + seed)
            th = rng.uniform(-2, 2, self.ansatz.w.param_count)
            ga = rng.uniform(-2, 2, self.ansatz.d.param_count)
            g = global_terms(self.ansatz, th, ga, ds)
            l = local_terms(self.ansatz, th, ga, ds)
            assert np.all(l <= g + 1e-10)
            assert np.all(g <= 3 * l + 1e-10)

    def test_single_qubit_local_equals_global(self):
        # n=1: the single local projector is the global projector
        ansatz = VffAnsatz(w=ParamCircuit(1, (), 0), d=build_diagonal(1, "XY"), dt_ref=0.1)
        rng = make_rng(8)
        ga = rng.uniform(-2, 2, 1)
        pairs = []
        for _ in range(4):
            psi = haar_states(2, 1, rng)[0]
            phi = haar_states(2, 1, rng)[0]
            pairs.append(TrainingPair(psi, phi, (psi,)))
        ds = Dataset(1, tuple(pairs), "HAAR1", build_xy_chain(2), TrotterConfig(), 0)
        cg = cost_global_empirical(ansatz, np.zeros(0), ga, ds)
        cl = cost_local_empirical(ansatz, np.zeros(0), ga, ds)
        assert abs(cg.value - cl.value) < 1e-12

    def test_missing_factors_rejected(self):
        rng = make_rng(9)
        psi = haar_states(8, 1, rng)[0]
        ds = Dataset(
            3, (TrainingPair(psi, psi, None),), "HAAR_N", build_xy_chain(3), TrotterConfig(), 0
        )
        with pytest.raises(ValueError):
            cost_local_empirical(self.ansatz, self.theta, self.gamma, ds)


class TestHst:
    def test_self_zero(self):
        u = haar_random_unitary(8, make_rng(10))
        assert cost_hst(u, u).value < 1e-12

    def test_global_phase_invariance(self):
        u = haar_random_unitary(4, make_rng(11))
        assert cost_hst(u, np.exp(0.7j) * u).value < 1e-12

    def test_identity_vs_x(self):
        assert abs(cost_hst(np.eye(2), X).value - 1.0) < 1e-14

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            cost_hst(np.eye(2), np.eye(4))


class TestExpected:
    def test_entangled_self_zero(self):
        u = haar_random_unitary(4, make_rng(12))
        assert expected_entangled_global(u, u).value < 1e-12

    def test_entangled_identity_vs_x(self):
        c = expected_entangled_global(np.eye(2), X)
        assert abs(c.value - 2.0 / 3.0) < 1e-14

    def test_entangled_matches_mc(self):
        rng = make_rng(13)
        u = haar_random_unitary(4, rng)
        v = haar_random_unitary(4, rng)
        analytic = expected_entangled_global(u, v).value
        states = haar_states(4, 40000, rng)
        w = u.conj().T @ v
        amps = np.einsum("sa,ab,sb->s", states.conj(), w, states)
        vals = 1.0 - np.abs(amps) ** 2
        assert abs(analytic - vals.mean()) <= 3 * vals.std(ddof=1) / np.sqrt(len(vals)) + 1e-12

    def test_product_identity_zero(self):
        assert expected_product_global(np.eye(8), np.eye(8)).value < 1e-14

    def test_product_xx(self):
        c = expected_product_global(np.eye(4), np.kron(X, X))
        assert abs(c.value - 8.0 / 9.0) < 1e-13

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_product_matches_mc(self, n):
        rng = make_rng(14 + n)
        d = 2**n
        u = haar_random_unitary(d, rng)
        v = haar_random_unitary(d, rng)
        analytic = expected_product_global(u, v).value
        samples = 40000
        z = (rng.standard_normal((samples, n, 2)) + 1j * rng.standard_normal((samples, n, 2)))
        z /= np.linalg.norm(z, axis=2, keepdims=True)
        states = z[:, 0, :]
        for q in range(1, n):
            states = np.einsum("sa,sb->sab", states, z[:, q]).reshape(samples, -1)
        w = u.conj().T @ v
        amps = np.einsum("sa,ab,sb->s", states.conj(), w, states)
        vals = 1.0 - np.abs(amps) ** 2
        assert abs(analytic - vals.mean()) <= 3 * vals.std(ddof=1) / np.sqrt(samples) + 1e-12

    def test_product_cap(self):
        with pytest.raises(ResourceCapError):
            expected_product_global(np.eye(2**9), np.eye(2**9))

    def test_local_mc_self_zero(self):
        u = haar_random_unitary(4, make_rng(20))
        c = expected_product_local_mc(u, u, 500, make_rng(21))
        assert c.value == 0.0 and c.stderr <= 1e-15

    def test_local_mc_sandwich_vs_global(self):
        rng = make_rng(22)
        for n in (2, 3):
            d = 2**n
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            cg = expected_product_global(u, v).value
            cl = expected_product_local_mc(u, v, 20000, rng)
            assert cl.value <= cg + 3 * cl.stderr
            assert cl.value >= cg / n - 3 * cl.stderr

    def test_local_mc_n1_equals_global(self):
        rng = make_rng(23)
        u = haar_random_unitary(2, rng)
        v = haar_random_unitary(2, rng)
        cg = expected_product_global(u, v).value
        cl = expected_product_local_mc(u, v, 30000, rng)
        assert abs(cl.value - cg) <= 3 * cl.stderr + 1e-12


class TestAverageFidelity:
    def test_self(self):
        u = haar_random_unitary(8, make_rng(24))
        assert abs(average_fidelity(u, u) - 1.0) < 1e-12

    def test_identity_vs_x(self):
        assert abs(average_fidelity(np.eye(2), X) - 1.0 / 3.0) < 1e-14

    def test_matches_mc(self):
        rng = make_rng(25)
        u = haar_random_unitary(4, rng)
        v = haar_random_unitary(4, rng)
        states = haar_states(4, 40000, rng)
        w = u.conj().T @ v
        amps = np.einsum("sa,ab,sb->s", states.conj(), w, states)
        vals = np.abs(amps) ** 2
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(average_fidelity(u, v) - vals.mean()) <= 3 * se + 1e-12


class TestCostRelations:
    def test_b2_sandwich_random_pairs(self):
        rng = make_rng(26)
        for n in (2, 3):
            d = 2**n
            for _ in range(25):
                u = haar_random_unitary(d, rng)
                v = haar_random_unitary(d, rng)
                c_p = expected_product_global(u, v).value
                c_hst = cost_hst(u, v).value  # equals (d+1)/d * entangled cost
                assert c_p <= c_hst + 1e-10
                assert c_hst <= 2 * c_p + 1e-10

    def test_hst_additive_sandwich(self):
        rng = make_rng(27)
        for n in (2, 3):
            d = 2**n
            offset = 2.0 / d + 2.0 * np.sqrt(2.0 / d)
            for _ in range(25):
                u = haar_random_unitary(d, rng)
                v = haar_random_unitary(d, rng)
                c_p = expected_product_global(u, v).value
                c_hst = cost_hst(u, v).value
                assert c_p <= c_hst + 1e-10
                assert c_hst <= c_p + offset + 1e-10

    def test_entangled_equals_scaled_hst_exactly(self):
        rng = make_rng(28)
        d = 8
        u = haar_random_unitary(d, rng)
        v = haar_random_unitary(d, rng)
        assert abs(
            expected_entangled_global(u, v).value - d / (d + 1) * cost_hst(u, v).value
        ) < 1e-12


class TestTensorPower:
    def test_n1_linear(self):
        for c in (0.0, 0.123, 0.9, 1.0):
            assert abs(tensor_power_cost_relation(c, 1) - 2 * c / 3) < 1e-14

    def test_zero_cost(self):
        for n in (1, 2, 5):
            assert abs(tensor_power_cost_relation(0.0, n)) < 1e-14

    def test_matches_direct_n3(self):
        rng = make_rng(29)
        w1 = haar_random_unitary(2, rng)
        w = kron_all([w1] * 3)
        c_hst = cost_hst(np.eye(8), w).value
        assert abs(
            tensor_power_cost_relation(c_hst, 3) - expected_product_global(np.eye(8), w).value
        ) < 1e-10

    def test_range_validation(self):
        with pytest.raises(ValueError):
            tensor_power_cost_relation(1.5, 2)


class TestCostValue:
    def test_clamps_and_flags(self):
        c = CostValue(0.5, "HST")
        assert not c.anomalous
        from vff.costs import _clamped

        tiny = _clamped(-1e-12, "HST")
        assert tiny.value == 0.0 and not tiny.anomalous
        bad = _clamped(1.1, "HST")
        assert bad.value == 1.0 and bad.anomalous and bad.raw == 1.1

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            CostValue(0.5, "NOPE")
