"""Independent Monte-Carlo and brute-force certification of every analytic
identity the library relies on.

Each check pits a production formula against an estimator built from nothing
but index-level arithmetic and sampling, so a bug in the closed-form code
cannot confirm itself. MC comparisons pass at |analytic - estimate| <=
3*stderr + 1e-12; a marginal failure is rerun once at 4x samples (same
stream, further along) before being reported as a failure. Exact inequality
checks record their worst slack instead of a standard error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import (
    cost_hst,
    expected_product_global,
    expected_product_local_mc,
    tensor_power_cost_relation,
)
from .linalg import haar_random_unitary, kron_all, partial_trace

__all__ = [
    "OracleReport",
    "check_single_qubit_twirl",
    "check_moment_identities",
    "check_subset_formula",
    "check_cost_sandwiches",
    "check_perturbative",
    "check_power_bound",
    "run_all_checks",
]


@dataclass
class OracleReport:
    name: str
    passed: bool
    samples: int
    entries: list = field(default_factory=list)  # (label, analytic, estimate, stderr)
    detail: str = ""

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} (samples={self.samples}) {self.detail}"


def _mc_pass(analytic, estimate, stderr) -> bool:
    return bool(np.all(np.abs(np.asarray(analytic) - np.asarray(estimate))
                       <= 3.0 * np.asarray(stderr) + 1e-12))


def _batched_haar(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim)))
    z /= np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.einsum("sii->si", r)
    return q * (diag / np.abs(diag))[:, None, :]


def _haar_states_1q(count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, 2) single-qubit Haar states."""
    u = _batched_haar(2, count, rng)
    return u[:, :, 0]


def _complex_std(values: np.ndarray, axis=0) -> np.ndarray:
    return np.sqrt(np.var(values.real, axis=axis, ddof=1) + np.var(values.imag, axis=axis, ddof=1))


def check_single_qubit_twirl(samples: int, rng: np.random.Generator) -> OracleReport:
    """MC mean of |psi><psi| (x) |psi><psi| over single-qubit Haar states
    against (I (x) I + SWAP) / 6, entrywise."""
    if samples < 1000:
        raise ValueError("need at least 1e3 samples")
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[2 * j + i, 2 * i + j] = 1.0
    analytic = (np.eye(4) + swap) / 6.0

    def attempt(count):
        psi = _haar_states_1q(count, rng)
        two = np.einsum("sa,sb->sab", psi, psi).reshape(count, 4)
        per = np.einsum("sa,sb->sab", two, two.conj())
        mean = per.mean(axis=0)
        stderr = _complex_std(per) / np.sqrt(count)
        return mean, stderr

    mean, stderr = attempt(samples)
    passed = _mc_pass(analytic, mean, stderr)
    detail = ""
    used = samples
    if not passed:
        mean, stderr = attempt(4 * samples)
        used += 4 * samples
        passed = _mc_pass(analytic, mean, stderr)
        detail = "rerun at 4x samples"
    worst = float(np.max(np.abs(mean - analytic)))
    return OracleReport(
        "single_qubit_twirl", passed, used,
        entries=[("max|mean - (I+S)/6|", 0.0, worst, float(np.max(stderr)))],
        detail=detail,
    )


def _moment_closed_forms(a, b, c, dm, d):
    tra, trb, trc, trd = np.trace(a), np.trace(b), np.trace(c), np.trace(dm)
    trac, trbd = np.trace(a @ c), np.trace(b @ dm)
    i1 = tra * trb / d
    i2 = (tra * trc * trbd + trac * trb * trd) / (d**2 - 1) - (
        trac * trbd + tra * trb * trc * trd
    ) / (d * (d**2 - 1))
    i3 = (tra * trb * trc * trd + trac * trbd) / (d**2 - 1) - (
        trac * trb * trd + tra * trc * trbd
    ) / (d * (d**2 - 1))
    return i1, i2, i3


def check_moment_identities(samples: int, rng: np.random.Generator, d: int = 4) -> OracleReport:
    """First and second Haar-moment trace identities at dimension d, checked
    by direct averaging over sampled unitaries for fixed random A, B, C, D."""
    a, b, c, dm = (
        rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(4)
    )
    i1, i2, i3 = _moment_closed_forms(a, b, c, dm, d)

    def attempt(count):
        w = _batched_haar(d, count, rng)
        t1 = np.einsum("sij,jk,slk,li->s", w, a, w.conj(), b, optimize=True)
        t2 = np.einsum(
            "sij,jk,slk,lm,smp,pq,srq,ri->s", w, a, w.conj(), b, w, c, w.conj(), dm,
            optimize=True,
        )
        t3 = t1 * np.einsum("sij,jk,slk,li->s", w, c, w.conj(), dm, optimize=True)
        ests, errs = [], []
        for t in (t1, t2, t3):
            ests.append(t.mean())
            errs.append(_complex_std(t) / np.sqrt(count))
        return np.array(ests), np.array(errs)

    analytic = np.array([i1, i2, i3])
    est, err = attempt(samples)
    passed = _mc_pass(analytic, est, err)
    used = samples
    detail = ""
    if not passed:
        est, err = attempt(4 * samples)
        used += 4 * samples
        passed = _mc_pass(analytic, est, err)
        detail = "rerun at 4x samples"
    entries = [
        (label, complex(an), complex(es), float(er))
        for label, an, es, er in zip(
            ["Tr[WAW'B]", "Tr[WAW'BWCW'D]", "Tr[WAW'B]Tr[WCW'D]"], analytic, est, err
        )
    ]
    return OracleReport("moment_identities", passed, used, entries=entries, detail=detail)


def check_subset_formula(n: int, trials: int, samples: int, rng: np.random.Generator) -> OracleReport:
    """Subset-sum closed form of the product-Haar fidelity expectation against
    a direct MC over sampled product states, for `trials` random unitaries."""
    if n > 4:
        raise ValueError("subset-formula check capped at 4 qubits")
    d = 2**n
    entries = []
    passed = True
    used = 0

    def mc(w, count):
        psi = _haar_states_1q(count * n, rng).reshape(count, n, 2)
        states = psi[:, 0, :]
        for q in range(1, n):
            states = np.einsum("sa,sb->sab", states, psi[:, q]).reshape(count, -1)
        amp = np.einsum("sa,ab,sb->s", states.conj(), w, states)
        vals = np.abs(amp) ** 2
        return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(count))

    for trial in range(trials):
        w = haar_random_unitary(d, rng)
        analytic = 1.0 - expected_product_global(np.eye(d), w).raw
        est, err = mc(w, samples)
        used += samples
        ok = abs(analytic - est) <= 3 * err + 1e-12
        if not ok:
            est, err = mc(w, 4 * samples)
            used += 4 * samples
            ok = abs(analytic - est) <= 3 * err + 1e-12
        entries.append((f"trial {trial}", analytic, est, err))
        passed &= ok
    return OracleReport(f"subset_formula_n{n}", passed, used, entries=entries)


def _per_sample_chain(u, v, n, count, rng):
    """Worst slack of the pointwise chain local <= global <= n*local, computed
    from dense matrices and explicit projector algebra (independent of the
    cost module's statevector path)."""
    d = 2**n
    worst_lo, worst_hi = np.inf, np.inf
    for _ in range(count):
        factors = [_haar_states_1q(1, rng)[0] for _ in range(n)]
        psi = kron_all(factors)
        phi = u @ psi
        chi = v.conj().T @ phi
        g = 1.0 - abs(np.vdot(psi, chi)) ** 2
        loc = 0.0
        for i in range(n):
            proj = kron_all(
                [np.outer(factors[q], factors[q].conj()) if q == i else np.eye(2) for q in range(n)]
            )
            loc += 1.0 - np.real(np.vdot(chi, proj @ chi))
        loc /= n
        worst_lo = min(worst_lo, g - loc)  # local <= global
        worst_hi = min(worst_hi, n * loc - g)  # global <= n*local
    return worst_lo, worst_hi


def check_cost_sandwiches(trials: int, rng: np.random.Generator,
                          mc_samples: int = 20000) -> OracleReport:
    """Product/entangled/Hilbert-Schmidt cost orderings on random unitary pairs
    at n in {2, 3}: the two-sided product-vs-HST chain, the additive HST upper
    bound, the exact pointwise local/global chain, and (MC) the expected
    local/global chain."""
    entries = []
    passed = True
    eps = 1e-10
    for n in (2, 3):
        d = 2**n
        worst = {"b2_lower": np.inf, "b2_upper": np.inf, "hst_lower": np.inf,
                 "hst_upper": np.inf, "b3_point_lo": np.inf, "b3_point_hi": np.inf}
        offset = 2.0 / d + 2.0 * np.sqrt(2.0 / d)
        for _ in range(trials):
            u = haar_random_unitary(d, rng)
            v = haar_random_unitary(d, rng)
            c_p = expected_product_global(u, v).raw
            c_hst = cost_hst(u, v).raw
            worst["b2_lower"] = min(worst["b2_lower"], c_hst - c_p)
            worst["b2_upper"] = min(worst["b2_upper"], 2.0 * c_p - c_hst)
            worst["hst_lower"] = min(worst["hst_lower"], c_hst - c_p)
            worst["hst_upper"] = min(worst["hst_upper"], c_p + offset - c_hst)
            lo, hi = _per_sample_chain(u, v, n, 5, rng)
            worst["b3_point_lo"] = min(worst["b3_point_lo"], lo)
            worst["b3_point_hi"] = min(worst["b3_point_hi"], hi)
        for label, slack in worst.items():
            entries.append((f"n={n} {label}", 0.0, float(slack), 0.0))
            passed &= slack >= -eps
        # expected-level local/global chain, MC with 3 sigma tolerance
        u = haar_random_unitary(d, rng)
        v = haar_random_unitary(d, rng)
        c_p = expected_product_global(u, v).raw
        c_l = expected_product_local_mc(u, v, mc_samples, rng)
        lo_ok = c_l.raw <= c_p + 3 * c_l.stderr
        hi_ok = c_p <= n * (c_l.raw + 3 * c_l.stderr)
        entries.append((f"n={n} b3_expected local<=global", c_p, c_l.raw, c_l.stderr))
        passed &= lo_ok and hi_ok
    return OracleReport("cost_sandwiches", passed, trials, entries=entries)


def check_perturbative(n: int, eps_list=(1e-3, 3e-3, 1e-2),
                       rng: np.random.Generator | None = None) -> OracleReport:
    """Near the identity the product-global and Hilbert-Schmidt costs agree to
    second order: fit |C_prod - C_HST| over eps in a [eps, eps^2] basis and
    assert the linear coefficient vanishes (<= 1e-3 of the quadratic one) and
    the quadratic coefficient stays within the 2-norm envelope (1.1 slack)."""
    if rng is None:
        rng = np.random.default_rng(0)
    d = 2**n
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (g + g.conj().T) / 2.0
    h = h / np.linalg.norm(h)  # Schatten-2 normalized
    w_eig, v_eig = np.linalg.eigh(h)
    diffs = []
    for eps in eps_list:
        w = (v_eig * np.exp(-1j * eps * w_eig)) @ v_eig.conj().T
        diffs.append(
            abs(expected_product_global(np.eye(d), w).raw - cost_hst(np.eye(d), w).raw)
        )
    eps_arr = np.asarray(eps_list, dtype=float)
    basis = np.stack([eps_arr, eps_arr**2], axis=1)
    (c1, c2), *_ = np.linalg.lstsq(basis, np.asarray(diffs), rcond=None)
    envelope = 1.0 / 2 ** (n - 1)  # * ||h||_2^2 == 1
    lin_ok = abs(c1) <= 1e-3 * abs(c2) + 1e-12
    quad_ok = c2 <= envelope * 1.1
    entries = [
        ("linear coefficient", 0.0, float(c1), 0.0),
        ("quadratic coefficient", envelope, float(c2), 0.0),
    ]
    return OracleReport(
        f"perturbative_n{n}", lin_ok and quad_ok, len(eps_list), entries=entries,
        detail=f"c1={c1:.3e} c2={c2:.3e} envelope={envelope:.3e}",
    )


def check_power_bound(trials: int, m_max: int, rng: np.random.Generator,
                      n: int = 2) -> OracleReport:
    """Iterated-application bound: 1 - sqrt(1 - C_HST(U^M, V^M)) <=
    M^2 (1 - sqrt(1 - C_HST(U, V))) for M <= m_max on random pairs."""
    d = 2**n
    worst = np.inf
    for _ in range(trials):
        u = haar_random_unitary(d, rng)
        v = haar_random_unitary(d, rng)
        base = 1.0 - np.sqrt(max(0.0, 1.0 - cost_hst(u, v).raw))
        um, vm = np.eye(d, dtype=complex), np.eye(d, dtype=complex)
        for m in range(1, m_max + 1):
            um = um @ u
            vm = vm @ v
            lhs = 1.0 - np.sqrt(max(0.0, 1.0 - cost_hst(um, vm).raw))
            worst = min(worst, m**2 * base - lhs)
    passed = worst >= -1e-12
    return OracleReport(
        "power_bound", passed, trials,
        entries=[("worst slack", 0.0, float(worst), 0.0)],
        detail=f"M<={m_max}",
    )


def check_tensor_power_relation(trials: int, n: int, rng: np.random.Generator) -> OracleReport:
    """Closed form for identical 1-qubit tensor powers against the subset-sum."""
    d = 2**n
    worst = 0.0
    for _ in range(trials):
        w1 = haar_random_unitary(2, rng)
        w = kron_all([w1] * n)
        via_relation = tensor_power_cost_relation(cost_hst(np.eye(d), w).raw, n)
        direct = expected_product_global(np.eye(d), w).raw
        worst = max(worst, abs(via_relation - direct))
    passed = worst <= 1e-10
    return OracleReport(
        f"tensor_power_n{n}", passed, trials,
        entries=[("max |relation - direct|", 0.0, float(worst), 0.0)],
    )


def run_all_checks(seed: int = 0, samples: int = 100000, trials: int = 100) -> list[OracleReport]:
    """The full oracle suite at derived streams of `seed`; deterministic."""
    from .rng import make_rng

    reports = [
        check_single_qubit_twirl(samples, make_rng(seed, 1)),
        check_moment_identities(samples, make_rng(seed, 2)),
    ]
    for n in (1, 2, 3):
        reports.append(check_subset_formula(n, 3, samples, make_rng(seed, 3, n)))
    reports.append(check_cost_sandwiches(trials, make_rng(seed, 4)))
    for n in (2, 3):
        reports.append(check_perturbative(n, rng=make_rng(seed, 5, n)))
    reports.append(check_power_bound(trials, 8, make_rng(seed, 6)))
    reports.append(check_tensor_power_relation(20, 3, make_rng(seed, 7)))
    return reports
