"""Command-line experiment runner.

Subcommands: gen-data, train, evaluate, verify, bounds, repro. One JSON
config file fully determines a run; command-line flags only select the
subcommand and file paths, so every experiment is reproducible from a single
artifact. Every run writes a manifest echoing the resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (non-finite
values), 4 oracle failure, 5 resource cap exceeded.

The VFF_OUTPUT_DIR environment variable supplies the default output
directory (default: the current directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import RunConfig, load_config
from .exceptions import ConfigError, NumericError, ResourceCapError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ORACLE = 4
EXIT_CAP = 5


def _apply_threads(threads: int | None) -> None:
    # must happen before numpy loads for the BLAS pools to see it
    if threads is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(threads))


def _out_dir(args) -> str:
    if getattr(args, "out_dir", None):
        return args.out_dir
    return os.environ.get("VFF_OUTPUT_DIR", ".")


def _write_manifest(out_dir: str, command: str, cfg: RunConfig | None, extra: dict | None = None):
    from . import __version__

    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": command,
        "package_version": __version__,
        "config": None if cfg is None else cfg.to_dict(),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)


def _build_problem(cfg: RunConfig):
    from .ansatz import build_ansatz
    from .hamiltonians import TrotterConfig, build_hamiltonian

    h = build_hamiltonian(cfg.model, cfg.n, cfg.periodic)
    tcfg = TrotterConfig(order=cfg.trotter.order, r=cfg.trotter.r, dt=cfg.trotter.dt)
    ansatz = build_ansatz(cfg.model, cfg.n, layers=cfg.ansatz_layers, dt_ref=cfg.trotter.dt)
    if cfg.ansatz.kind is not None and cfg.ansatz.kind != ansatz.w.gates[0].kind:
        from .ansatz import VffAnsatz, build_brickwork, build_diagonal

        ansatz = VffAnsatz(
            w=build_brickwork(cfg.n, cfg.ansatz_layers, cfg.ansatz.kind),
            d=build_diagonal(cfg.n, cfg.model),
            dt_ref=cfg.trotter.dt,
        )
    return h, tcfg, ansatz


def cmd_gen_data(args) -> int:
    cfg = load_config(args.config)
    _apply_threads(cfg.threads)
    from .data import generate_dataset, save_dataset

    h, tcfg, _ = _build_problem(cfg)
    ds = generate_dataset(h, tcfg, cfg.data.N, cfg.data.source, cfg.data.seed)
    save_dataset(ds, args.out)
    _write_manifest(os.path.dirname(os.path.abspath(args.out)), "gen-data", cfg,
                    {"dataset": os.path.abspath(args.out)})
    print(f"wrote {args.out} ({ds.size} pairs, source {ds.source})")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    _apply_threads(cfg.threads)
    import numpy as np

    from .ansatz import circuit_to_json, params_to_json
    from .costs import average_fidelity
    from .data import load_dataset
    from .hamiltonians import trotter_unitary
    from .linalg import DENSE_QUBIT_CAP
    from .training import TrainConfig, reff_train, trace_to_csv

    out_dir = _out_dir(args)
    h, tcfg, ansatz = _build_problem(cfg)
    ds = load_dataset(args.data)
    if ds.n != cfg.n:
        raise ConfigError(f"dataset has n={ds.n}, config says n={cfg.n}")
    tcfg_train = TrainConfig(
        optimizer=cfg.train.optimizer,
        learning_rate=cfg.train.rate,
        max_iters=cfg.train.max_iters,
        cost_kind=cfg.train.cost_kind,
        target_cost=cfg.train.target_cost,
        seed=cfg.train.seed,
        restarts=cfg.train.restarts,
    )
    reference = trotter_unitary(h, tcfg) if cfg.n <= 6 else None
    result = reff_train(ansatz, ds, tcfg_train, reference_unitary=reference)

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "params.json"), "w") as fh:
        fh.write(params_to_json(result.theta, result.gamma, ansatz.dt_ref))
    with open(os.path.join(out_dir, "circuit_w.json"), "w") as fh:
        fh.write(circuit_to_json(ansatz.w))
    with open(os.path.join(out_dir, "circuit_d.json"), "w") as fh:
        fh.write(circuit_to_json(ansatz.d))
    with open(os.path.join(out_dir, "trace.csv"), "w") as fh:
        fh.write(trace_to_csv(result.trace))
    summary = {
        "best_cost": result.best_cost,
        "converged": result.converged,
        "iterations": result.iterations,
        "restarts_used": result.restarts_used,
    }
    if reference is not None:
        from .ansatz import vff_unitary

        v = vff_unitary(ansatz, result.theta, result.gamma)
        summary["infidelity_one_step"] = 1.0 - average_fidelity(reference, v)
    with open(os.path.join(out_dir, "result.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    _write_manifest(out_dir, "train", cfg, {"dataset": os.path.abspath(args.data)})
    print(f"best cost {result.best_cost:.3e} (converged={result.converged}) "
          f"after {result.iterations} iterations; outputs in {out_dir}")
    return EXIT_OK


def _bound_reports(cfg: RunConfig, ansatz, h, tcfg, cost_value=None, cost_kind=None):
    from .ansatz import circuit_stats
    from .bounds import (
        BoundInputs,
        bound_entangled_global,
        bound_product_global,
        bound_product_local,
    )
    from .costs import CostValue
    from .training import termination_threshold

    k = circuit_stats(ansatz.w)["K"]
    from .bounds import remark_threshold, required_dataset_size
    from .hamiltonians import trotter_error

    eps = trotter_error(h, tcfg) if cfg.n <= 10 else None
    b = cfg.bounds
    summary = {
        "gate_count_K": k,
        "trotter_eps": eps,
        "required_dataset_size": required_dataset_size(b.M0, k, b.eps_target),
        "termination_threshold": None if eps is None else termination_threshold(
            b.eps_target, b.M0, eps, cfg.n
        ),
        "remark_threshold": None if eps is None else remark_threshold(
            b.eps_target, b.M0, eps, 2**cfg.n
        ),
        "reports": [],
    }
    if eps is None:
        return summary
    if cost_value is None:
        cost_value = max(summary["termination_threshold"], 0.0)
        cost_kind = cfg.train.cost_kind
    kind_map = {
        "EMP_GLOBAL": bound_product_global,
        "EMP_LOCAL": bound_product_local,
        "EXP_PRODUCT_G": bound_product_global,
        "EXP_ENTANGLED_G": bound_entangled_global,
    }
    fn = kind_map[cost_kind]
    inputs = BoundInputs(
        n=cfg.n, m_steps=b.M0, trotter_eps=eps,
        cost=CostValue(min(max(cost_value, 0.0), 1.0), cost_kind, raw=cost_value),
        gate_count=k, dataset_size=cfg.data.N, delta=b.delta, gen_constant=b.gen_constant,
    )
    rep = fn(inputs)
    summary["reports"].append({
        "kind": rep.kind,
        "M": b.M0,
        "cost_kind": cost_kind,
        "cost_value": cost_value,
        "lower_bound": rep.lower_bound,
        "lower_bound_no_gen": rep.lower_bound_no_gen,
        "raw": rep.raw,
        "trotter_term": rep.trotter_term,
        "cost_term": rep.cost_term,
        "gen_term": rep.gen_term,
        "inputs": {
            "n": cfg.n, "trotter_eps": eps, "K": k, "N": cfg.data.N,
            "delta": b.delta, "gen_constant": b.gen_constant,
        },
    })
    return summary


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    _apply_threads(cfg.threads)
    import numpy as np

    from .ansatz import params_from_json, vff_unitary
    from .bounds import bound_nested_exact
    from .costs import cost_hst
    from .evaluation import FastForwardPlan, fidelity_series, series_to_csv
    from .hamiltonians import trotter_unitary

    out_dir = _out_dir(args)
    h, tcfg, ansatz = _build_problem(cfg)
    with open(args.params) as fh:
        theta, gamma, dt_ref = params_from_json(fh.read())
    if abs(dt_ref - ansatz.dt_ref) > 1e-15:
        raise ConfigError(f"params trained at dt={dt_ref}, config says dt={ansatz.dt_ref}")
    plan = FastForwardPlan(m_max=cfg.eval.M_max, substeps=cfg.eval.substeps,
                           reference=cfg.eval.reference)
    pts = fidelity_series(ansatz, theta, gamma, h, tcfg, plan)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "series.csv"), "w") as fh:
        fh.write(series_to_csv(pts))

    bounds_summary = _bound_reports(cfg, ansatz, h, tcfg)
    u_step = trotter_unitary(h, tcfg)
    v_step = vff_unitary(ansatz, theta, gamma)
    c_hst = cost_hst(u_step, v_step).value
    bounds_summary["c_hst_one_step"] = c_hst
    bounds_summary["nested_exact_bound_at_M0"] = bound_nested_exact(
        2**cfg.n, cfg.bounds.M0, bounds_summary["trotter_eps"], c_hst
    )
    with open(os.path.join(out_dir, "bounds.json"), "w") as fh:
        json.dump(bounds_summary, fh, indent=1)
    _write_manifest(out_dir, "evaluate", cfg, {"params": os.path.abspath(args.params)})
    print(f"series of {len(pts)} points written to {out_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    _apply_threads(cfg.threads)
    from .oracles import run_all_checks

    out_dir = _out_dir(args)
    reports = run_all_checks(seed=cfg.data.seed)
    os.makedirs(out_dir, exist_ok=True)
    payload = []
    ok = True
    for rep in reports:
        print(rep.summary())
        ok &= rep.passed
        payload.append({
            "name": rep.name,
            "passed": rep.passed,
            "samples": rep.samples,
            "detail": rep.detail,
            "entries": [
                {"label": lab, "analytic": str(an), "estimate": str(es), "stderr": er}
                for (lab, an, es, er) in rep.entries
            ],
        })
    with open(os.path.join(out_dir, "oracle_reports.json"), "w") as fh:
        json.dump(payload, fh, indent=1)
    _write_manifest(out_dir, "verify", cfg)
    if not ok:
        print("oracle suite FAILED", file=sys.stderr)
        return EXIT_ORACLE
    print("oracle suite passed")
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = load_config(args.config)
    _apply_threads(cfg.threads)
    out_dir = _out_dir(args)
    h, tcfg, ansatz = _build_problem(cfg)
    cost_value = cost_kind = None
    if args.params and args.data:
        from .ansatz import params_from_json
        from .data import load_dataset
        from .training import empirical_cost

        with open(args.params) as fh:
            theta, gamma, _ = params_from_json(fh.read())
        ds = load_dataset(args.data)
        cost = empirical_cost(ansatz, theta, gamma, ds, cfg.train.cost_kind)
        cost_value, cost_kind = cost.value, cost.kind
    summary = _bound_reports(cfg, ansatz, h, tcfg, cost_value, cost_kind)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "bounds.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    _write_manifest(out_dir, "bounds", cfg)
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def cmd_repro(args) -> int:
    cfg = load_config(args.config) if args.config else None
    if cfg is not None:
        _apply_threads(cfg.threads)
    from .experiments import run_repro

    out_dir = _out_dir(args)
    summary = run_repro(args.figure, out_dir)
    _write_manifest(out_dir, f"repro {args.figure}", cfg)
    print(json.dumps(summary, indent=1, default=str))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vff",
        description="Train, fast-forward, certify, and verify diagonal-form "
                    "simulations of spin-chain dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a training dataset file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train the ansatz on a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("evaluate", help="fast-forward a trained model and evaluate bounds")
    p.add_argument("--config", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("verify", help="run the Haar/cost identity oracle suite")
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bounds", help="evaluate fidelity bounds and data prescriptions")
    p.add_argument("--config", required=True)
    p.add_argument("--params")
    p.add_argument("--data")
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("repro", help="run a bundled desk-scale reproduction experiment")
    p.add_argument("--figure", required=True, choices=["fig2a", "fig2b", "figa2", "figa3"])
    p.add_argument("--config")
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
