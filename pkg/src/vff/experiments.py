"""Desk-scale reproduction experiments wired to the `repro` CLI subcommand.

Each experiment is a deterministic function of its seeds and writes plain CSV
and JSON under an output directory:

* fig2a  - 4-qubit periodic Heisenberg chain, five product training pairs,
           global cost to 1e-8; checks the learned evolution generalizes to
           the full space (average infidelity below 1e-6) and fast-forwards.
* fig2b  - open XY chain, a single product training pair, local cost to
           1e-12; fast-forward series over thousands of steps.
* figa2  - training-set-size sweep on Heisenberg chains: the smallest N whose
           trained model generalizes, versus the parameterized gate count.
* figa3  - XY chain with a fine-grained (r=10, second order) Trotter target:
           fidelity of the fast-forward against both the Trotter reference
           and the exact evolution, on a fractional time grid. Runs at n=6 by
           default (the headline plot's n=10 exceeds desk memory for the
           training sweeps; the Trotter-floor effect is identical).
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict

import numpy as np

from .ansatz import build_ansatz, circuit_stats, vff_unitary
from .config import RunConfig
from .costs import average_fidelity, cost_hst
from .data import generate_dataset
from .evaluation import FastForwardPlan, fidelity_series, series_to_csv
from .hamiltonians import TrotterConfig, build_hamiltonian, trotter_unitary
from .training import TrainConfig, reff_train, trace_to_csv

__all__ = [
    "FIGURES",
    "run_training_instance",
    "repro_fig2a",
    "repro_fig2b",
    "repro_figa2",
    "repro_figa3",
    "run_repro",
]

FIGURES = ("fig2a", "fig2b", "figa2", "figa3")


def run_training_instance(
    model: str,
    n: int,
    periodic: bool,
    num_pairs: int,
    cost_kind: str,
    target: float,
    seed: int,
    dt: float = 0.1,
    order: int = 2,
    r: int = 1,
    max_iters: int = 20000,
    restarts: int = 8,
    layers: int | None = None,
):
    """Generate data, train, and measure the exact average infidelity of the
    learned step. One self-contained experiment unit; deterministic in seed."""
    h = build_hamiltonian(model, n, periodic)
    tcfg = TrotterConfig(order=order, r=r, dt=dt)
    data = generate_dataset(h, tcfg, num_pairs, "HAAR1", seed=seed)
    ansatz = build_ansatz(model, n, layers=layers, dt_ref=dt)
    cfg = TrainConfig(
        cost_kind=cost_kind, target_cost=target, seed=seed,
        max_iters=max_iters, restarts=restarts,
    )
    t0 = time.perf_counter()
    result = reff_train(ansatz, data, cfg)
    elapsed = time.perf_counter() - t0
    u_step = trotter_unitary(h, tcfg)
    v_step = vff_unitary(ansatz, result.theta, result.gamma)
    infidelity = 1.0 - average_fidelity(u_step, v_step)
    return {
        "ansatz": ansatz,
        "hamiltonian": h,
        "trotter": tcfg,
        "result": result,
        "best_cost": result.best_cost,
        "converged": result.converged,
        "infidelity_one_step": infidelity,
        "c_hst": cost_hst(u_step, v_step).value,
        "seconds": elapsed,
    }


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def repro_fig2a(out_dir: str, seeds=(0, 1, 2), n: int = 4, num_pairs: int = 5,
                target: float = 1e-8, m_max: int = 2000) -> dict:
    rows = ["seed,best_cost,converged,infidelity_one_step,seconds"]
    summary = []
    series_csv = None
    for seed in seeds:
        run = run_training_instance(
            "HEISENBERG", n, True, num_pairs, "EMP_GLOBAL", target, seed
        )
        rows.append(
            f"{seed},{run['best_cost']!r},{int(run['converged'])},"
            f"{run['infidelity_one_step']!r},{run['seconds']:.1f}"
        )
        summary.append({
            "seed": seed,
            "best_cost": run["best_cost"],
            "converged": run["converged"],
            "infidelity_one_step": run["infidelity_one_step"],
        })
        if series_csv is None and run["converged"]:
            pts = fidelity_series(
                run["ansatz"], run["result"].theta, run["result"].gamma,
                run["hamiltonian"], run["trotter"],
                FastForwardPlan(m_max=m_max, reference="TROTTER"),
            )
            series_csv = _write(out_dir, "fig2a_series.csv", series_to_csv(pts))
    _write(out_dir, "fig2a_runs.csv", "\n".join(rows) + "\n")
    _write(out_dir, "fig2a_summary.json", json.dumps(summary, indent=1))
    return {"runs": summary, "series": series_csv}


def repro_fig2b(out_dir: str, seed: int = 0, n: int = 4, target: float = 1e-12,
                m_max: int = 2000) -> dict:
    run = run_training_instance("XY", n, False, 1, "EMP_LOCAL", target, seed)
    pts = fidelity_series(
        run["ansatz"], run["result"].theta, run["result"].gamma,
        run["hamiltonian"], run["trotter"],
        FastForwardPlan(m_max=m_max, reference="TROTTER"),
    )
    _write(out_dir, f"fig2b_series_n{n}.csv", series_to_csv(pts))
    _write(out_dir, f"fig2b_trace_n{n}.csv", trace_to_csv(run["result"].trace))
    summary = {
        "n": n,
        "seed": seed,
        "best_cost": run["best_cost"],
        "converged": run["converged"],
        "infidelity_one_step": run["infidelity_one_step"],
        "final_infidelity_vs_trotter": 1.0 - pts[-1].fid_vs_trotter,
        "steps": m_max,
    }
    _write(out_dir, f"fig2b_summary_n{n}.json", json.dumps(summary, indent=1))
    return summary


def repro_figa2(out_dir: str, sizes=(2, 3, 4), seeds=(0, 1, 2), target: float = 1e-8,
                max_pairs: int = 8, gen_infidelity: float = 1e-6) -> dict:
    """For each chain size, sweep the training-set size upward until training
    to the target also drives the exact average infidelity below the
    generalization threshold; record that minimal N against the gate count."""
    rows = ["n,K,seed,min_N_generalizing,best_cost,infidelity_one_step"]
    results = []
    for n in sizes:
        k = circuit_stats(build_ansatz("HEISENBERG", n).w)["K"]
        for seed in seeds:
            found = None
            last = None
            for num_pairs in range(1, max_pairs + 1):
                run = run_training_instance(
                    "HEISENBERG", n, True, num_pairs, "EMP_GLOBAL", target, seed
                )
                last = run
                if run["converged"] and run["infidelity_one_step"] <= gen_infidelity:
                    found = num_pairs
                    break
            rows.append(
                f"{n},{k},{seed},{found if found is not None else ''},"
                f"{last['best_cost']!r},{last['infidelity_one_step']!r}"
            )
            results.append({"n": n, "K": k, "seed": seed, "min_N": found})
    _write(out_dir, "figa2_scaling.csv", "\n".join(rows) + "\n")
    _write(out_dir, "figa2_summary.json", json.dumps(results, indent=1))
    return {"results": results}


def repro_figa3(out_dir: str, seed: int = 0, n: int = 6, target: float = 1e-12,
                m_max: int = 200, substeps: int = 4) -> dict:
    run = run_training_instance(
        "XY", n, False, 1, "EMP_LOCAL", target, seed, order=2, r=10
    )
    pts = fidelity_series(
        run["ansatz"], run["result"].theta, run["result"].gamma,
        run["hamiltonian"], run["trotter"],
        FastForwardPlan(m_max=m_max, substeps=substeps, reference="BOTH"),
    )
    _write(out_dir, "figa3_series.csv", series_to_csv(pts))
    summary = {
        "n": n,
        "seed": seed,
        "best_cost": run["best_cost"],
        "converged": run["converged"],
        "infidelity_one_step": run["infidelity_one_step"],
        "final_fid_vs_trotter": pts[-1].fid_vs_trotter,
        "final_fid_vs_exact": pts[-1].fid_vs_exact,
    }
    _write(out_dir, "figa3_summary.json", json.dumps(summary, indent=1))
    return summary


def run_repro(figure: str, out_dir: str) -> dict:
    figure = figure.lower()
    if figure == "fig2a":
        return repro_fig2a(out_dir)
    if figure == "fig2b":
        return repro_fig2b(out_dir)
    if figure == "figa2":
        return repro_figa2(out_dir)
    if figure == "figa3":
        return repro_figa3(out_dir)
    raise ValueError(f"unknown figure {figure!r}; choose from {FIGURES}")
