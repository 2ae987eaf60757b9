import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vff.ansatz import (
    GateSpec,
    ParamCircuit,
    VffAnsatz,
    apply_vff,
    build_ansatz,
    build_brickwork,
    build_diagonal,
    circuit_from_json,
    circuit_stats,
    circuit_to_json,
    givens_matrix,
    params_from_json,
    params_to_json,
    sym_matrix,
    vff_unitary,
)
from vff.linalg import pauli_matrix
from vff.rng import make_rng

angles = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False)


def number_operator_2q():
    eye = np.eye(4)
    zi = pauli_matrix("ZI")
    iz = pauli_matrix("IZ")
    return (eye - zi) / 2 + (eye - iz) / 2


class TestGivens:
    def test_zero_is_identity(self):
        assert np.allclose(givens_matrix(0.0), np.eye(4), atol=1e-15)

    def test_quarter_turn(self):
        g = givens_matrix(np.pi / 2)
        e01, e10 = np.eye(4)[1], np.eye(4)[2]
        assert np.allclose(g @ e01, e10, atol=1e-15)
        assert np.allclose(g @ e10, -e01, atol=1e-15)
        assert np.allclose(g @ np.eye(4)[0], np.eye(4)[0], atol=1e-15)
        assert np.allclose(g @ np.eye(4)[3], np.eye(4)[3], atol=1e-15)

    @given(angles)
    @settings(max_examples=30, deadline=None)
    def test_number_conserving(self, t):
        g = givens_matrix(t)
        num = number_operator_2q()
        assert np.max(np.abs(g @ num - num @ g)) < 1e-12

    @given(angles)
    @settings(max_examples=30, deadline=None)
    def test_unitary_and_angle_additive(self, t):
        g = givens_matrix(t)
        assert np.max(np.abs(g.conj().T @ g - np.eye(4))) < 1e-12
        assert np.max(np.abs(givens_matrix(t) @ givens_matrix(0.4) - givens_matrix(t + 0.4))) < 1e-12


class TestSym:
    def test_zeros_give_identity(self):
        assert np.allclose(sym_matrix(0, 0, 0, 0), np.eye(4), atol=1e-15)

    @given(angles, angles, angles, angles)
    @settings(max_examples=40, deadline=None)
    def test_unitary(self, a, b, c, d):
        m = sym_matrix(a, b, c, d)
        assert np.max(np.abs(m.conj().T @ m - np.eye(4))) < 1e-12

    @given(angles)
    @settings(max_examples=30, deadline=None)
    def test_reduces_to_givens(self, t):
        assert np.max(np.abs(sym_matrix(0, t, 0, 0) - givens_matrix(t))) < 1e-14

    @given(angles, angles, angles, angles)
    @settings(max_examples=30, deadline=None)
    def test_number_conserving(self, a, b, c, d):
        m = sym_matrix(a, b, c, d)
        num = number_operator_2q()
        assert np.max(np.abs(m @ num - num @ m)) < 1e-12


class TestBrickwork:
    def test_gate_count_claim(self):
        # ceil(1.5 n) layers on even n: exactly 1.5 n (n-1) gates, depth 3n
        c = build_brickwork(4, 6, "GIVENS")
        stats = circuit_stats(c)
        assert stats["K"] == 18 == int(1.5 * 4 * 3)
        assert stats["depth"] == 12

    def test_single_gate(self):
        c = build_brickwork(2, 1, "GIVENS")
        assert len(c.gates) == 1 and c.param_count == 1

    def test_zero_params_identity(self):
        c = build_brickwork(4, 2, "SYM")
        assert np.allclose(c.dense(np.zeros(c.param_count)), np.eye(16), atol=1e-14)

    def test_layer_structure(self):
        c = build_brickwork(5, 1, "GIVENS")
        assert [g.targets for g in c.gates] == [(0, 1), (2, 3), (1, 2), (3, 4)]

    def test_sym_slots(self):
        c = build_brickwork(4, 6, "SYM")
        stats = circuit_stats(c)
        assert stats["K"] == 18
        assert stats["param_count"] == 72


class TestDiagonal:
    def test_xy_param_count(self):
        assert build_diagonal(4, "XY").param_count == 4

    def test_heisenberg_param_count(self):
        assert build_diagonal(4, "HEISENBERG").param_count == 10

    def test_dense_is_diagonal(self):
        c = build_diagonal(3, "HEISENBERG")
        rng = make_rng(1)
        m = c.dense(rng.uniform(-2, 2, c.param_count))
        off = m - np.diag(np.diag(m))
        assert np.max(np.abs(off)) < 1e-12


class TestParamCircuit:
    def test_slot_partition_enforced(self):
        with pytest.raises(ValueError):
            ParamCircuit(2, (GateSpec("RZ", (0,), (0,)), GateSpec("RZ", (1,), (0,))), 1)
        with pytest.raises(ValueError):
            ParamCircuit(2, (GateSpec("RZ", (0,), (1,)),), 1)

    def test_gate_spec_arity(self):
        with pytest.raises(ValueError):
            GateSpec("SYM", (0, 1), (0,))
        with pytest.raises(ValueError):
            GateSpec("RZ", (0, 1), (0,))

    def test_fixed_gate(self):
        m = np.diag([1, 1j]).astype(complex)
        c = ParamCircuit(1, (GateSpec("FIXED", (0,), (), m),), 0)
        assert np.allclose(c.dense(np.zeros(0)), m, atol=1e-15)


class TestVffAnsatz:
    def _ansatz(self, n=4, model="XY"):
        return build_ansatz(model, n, dt_ref=0.1)

    def _params(self, a, seed=0, scale=0.7):
        rng = make_rng(seed)
        return (
            rng.uniform(-scale, scale, a.w.param_count),
            rng.uniform(-scale, scale, a.d.param_count),
        )

    def test_t_zero_is_identity(self):
        a = self._ansatz()
        th, ga = self._params(a)
        assert np.max(np.abs(vff_unitary(a, th, ga, t=0.0) - np.eye(16))) < 1e-12

    def test_unitary(self):
        a = self._ansatz(model="HEISENBERG")
        th, ga = self._params(a)
        v = vff_unitary(a, th, ga)
        assert np.max(np.abs(v.conj().T @ v - np.eye(16))) < 1e-10

    def test_diagonal_rejects_nondiagonal_gates(self):
        with pytest.raises(ValueError):
            VffAnsatz(w=build_brickwork(2, 1), d=build_brickwork(2, 1), dt_ref=0.1)

    def test_fast_forward_power_identity(self):
        a = self._ansatz()
        th, ga = self._params(a)
        v1 = vff_unitary(a, th, ga)
        for m in (2, 7, 29):
            vm = np.linalg.matrix_power(v1, m)
            direct = vff_unitary(a, th, ga, t=m * a.dt_ref)
            assert np.max(np.abs(vm - direct)) < 1e-10

    def test_fast_forward_large_power(self):
        a = self._ansatz()
        th, ga = self._params(a, seed=5)
        m = 10**4
        vm = np.linalg.matrix_power(vff_unitary(a, th, ga), m)
        direct = vff_unitary(a, th, ga, t=m * a.dt_ref)
        assert np.max(np.abs(vm - direct)) < 1e-10

    def test_number_conservation(self):
        for model in ("XY", "HEISENBERG"):
            a = self._ansatz(model=model)
            th, ga = self._params(a, seed=2)
            v = vff_unitary(a, th, ga, t=0.3)
            num = np.zeros((16, 16), dtype=complex)
            for q in range(4):
                letters = ["I"] * 4
                letters[q] = "Z"
                num += (np.eye(16) - pauli_matrix("".join(letters))) / 2
            assert np.max(np.abs(v @ num - num @ v)) < 1e-10

    def test_apply_matches_dense(self):
        a = self._ansatz(model="HEISENBERG")
        th, ga = self._params(a, seed=3)
        rng = make_rng(4)
        psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        psi /= np.linalg.norm(psi)
        fast = apply_vff(a, th, ga, psi, t=0.25)
        dense = vff_unitary(a, th, ga, t=0.25) @ psi
        assert np.max(np.abs(fast - dense)) < 1e-12
        assert abs(np.linalg.norm(fast) - 1) < 1e-12


class TestStatsAndSerialization:
    def test_empty_circuit_stats(self):
        c = ParamCircuit(2, (), 0)
        stats = circuit_stats(c)
        assert stats == {"K": 0, "two_qubit_gate_count": 0, "depth": 0, "param_count": 0}

    def test_circuit_round_trip(self):
        c = build_brickwork(4, 3, "SYM")
        c2 = circuit_from_json(circuit_to_json(c))
        assert c2 == c

    def test_fixed_gate_round_trip(self):
        m = np.array([[0, 1j], [1, 0]], dtype=complex) / 1.0
        m = m / np.sqrt(1)  # arbitrary fixed gate, not necessarily unitary
        c = ParamCircuit(1, (GateSpec("FIXED", (0,), (), m),), 0)
        c2 = circuit_from_json(circuit_to_json(c))
        assert np.array_equal(c2.gates[0].matrix, m)

    def test_params_round_trip_exact(self):
        rng = make_rng(6)
        th = rng.uniform(-np.pi, np.pi, 7)
        ga = rng.uniform(-np.pi, np.pi, 3)
        th2, ga2, dt = params_from_json(params_to_json(th, ga, 0.1))
        assert np.array_equal(th, th2) and np.array_equal(ga, ga2) and dt == 0.1
