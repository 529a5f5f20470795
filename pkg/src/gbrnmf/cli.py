"""Command-line front end.

Subcommands: ``simulate``, ``fit``, ``evaluate``, ``verify`` and
``reconstruct``. All matrix files use the repo-wide CSV convention (no
header unless ``--header`` is given, 17-significant-digit output).

Exit codes are a stable contract:

* 0 — success
* 1 — a verification check failed
* 2 — usage or input validation error
* 3 — numeric failure (objective overflowed)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import GbrnmfError, NumericError, ShapeError
from .gbr import ConstraintSpec, FitConfig, Model, fit
from .io import load_labels, load_matrix, save_labels, save_matrix
from .matrix import gradient, reconstruct
from .simulate import (
    MODE_CONSTRAINED_ALIGNED,
    MODE_FREE_MATCHED,
    SimParams,
    SimTruth,
    evaluate_recovery,
    simulate,
)
from .verify import check_auxiliary, check_descent, check_gradient

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _save_trace(path: Path, trace: np.ndarray) -> None:
    table = np.column_stack([np.arange(trace.size), trace])
    np.savetxt(path, table, fmt=["%d", "%.17g"], delimiter=",")


def cmd_simulate(args) -> int:
    params = SimParams(
        n=args.n,
        p=args.p,
        g=args.g,
        q=args.q,
        shared_constrained=args.shared_constrained,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    truth = simulate(params)
    out = _out_dir(args)
    save_matrix(out / "x.csv", truth.x)
    save_matrix(out / "w_true.csv", truth.w_true)
    save_matrix(out / "a_true.csv", truth.a_true)
    save_matrix(out / "s_true.csv", truth.s_true)
    save_labels(out / "labels.csv", truth.group_labels)
    _write_json(
        out / "params.json",
        {
            "schema": SCHEMA_VERSION,
            "n": params.n,
            "p": params.p,
            "g": params.g,
            "q": params.q,
            "shared_constrained": params.shared_constrained,
            "noise_sd": truth.noise_sd,
            "seed": params.seed,
            "clamped": truth.clamped,
        },
    )
    return EXIT_OK


def cmd_fit(args) -> int:
    x = load_matrix(args.x, header=args.header)
    group_block = load_matrix(args.groups, header=args.header) if args.groups else None
    basis_block = load_matrix(args.basis, header=args.header) if args.basis else None
    spec = ConstraintSpec(
        q=args.q,
        group_block=group_block,
        basis_block=basis_block,
        strict_indicator=not args.relaxed_groups,
    )
    config = FitConfig(
        delta=args.delta,
        max_iter=args.max_iter,
        seed=args.seed,
        init_low=args.init_low,
        init_high=args.init_high,
    )
    model, report = fit(x, spec, config, restarts=args.restarts)

    out = _out_dir(args)
    save_matrix(out / "w.csv", model.w)
    save_matrix(out / "a.csv", model.a)
    save_matrix(out / "s.csv", model.s)
    _save_trace(out / "trace.csv", report.objective_trace)
    _write_json(
        out / "report.json",
        {
            "schema": SCHEMA_VERSION,
            "q": spec.q,
            "g": spec.g,
            "k": spec.k,
            "delta": config.delta,
            "max_iter": config.max_iter,
            "restarts": args.restarts,
            "seed": report.seed,
            "iterations": report.iterations_run,
            "termination": report.termination.value,
            "final_objective": report.final_objective,
        },
    )
    return EXIT_OK


def _load_truth_dir(truth_dir: Path, header: bool) -> SimTruth:
    params_path = truth_dir / "params.json"
    try:
        params = json.loads(params_path.read_text())
        g = int(params["g"])
        shared_constrained = int(params["shared_constrained"])
        noise_sd = float(params["noise_sd"])
        clamped = int(params["clamped"])
    except (ValueError, KeyError, TypeError) as exc:
        raise GbrnmfError(f"{params_path}: {exc}") from exc
    x = load_matrix(truth_dir / "x.csv", header=header)
    return SimTruth(
        x=x,
        w_true=load_matrix(truth_dir / "w_true.csv", header=header),
        a_true=load_matrix(truth_dir / "a_true.csv", header=header),
        s_true=load_matrix(truth_dir / "s_true.csv", header=header),
        noise=np.zeros_like(x),
        group_labels=load_labels(truth_dir / "labels.csv"),
        g=g,
        shared_constrained=shared_constrained,
        noise_sd=noise_sd,
        clamped=clamped,
    )


def cmd_evaluate(args) -> int:
    truth = _load_truth_dir(Path(args.truth_dir), args.header)
    w = load_matrix(args.w, header=args.header)
    a = load_matrix(args.a, header=args.header)
    s = load_matrix(args.s, header=args.header)
    g, k = truth.g, truth.shared_constrained
    w_mask = np.zeros(w.shape, dtype=bool)
    s_mask = np.zeros(s.shape, dtype=bool)
    if args.mode == MODE_CONSTRAINED_ALIGNED:
        w_mask[:, :g] = True
        s_mask[g : g + k, :] = True
    model = Model(w=w, a=a, s=s, w_mask=w_mask, s_mask=s_mask)
    report = evaluate_recovery(model, truth, mode=args.mode)

    out = _out_dir(args)
    _write_json(
        out / "recovery.json",
        {
            "schema": SCHEMA_VERSION,
            "mode": report.mode,
            "wa_rss": report.wa_rss,
            "s_rss_total": report.s_rss_total,
            "pairs": [
                {"truth_factor": t, "model_factor": m, "s_rss": v}
                for t, m, v in report.pairs
            ],
        },
    )
    lines = ["truth_factor,model_factor,s_rss"]
    lines += [f"{t},{m},{v:.17g}" for t, m, v in report.pairs]
    (out / "recovery.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _verify_instance(rng: np.random.Generator, max_dim: int = 6) -> tuple[np.ndarray, Model]:
    n = int(rng.integers(2, max_dim + 1))
    p = int(rng.integers(2, max_dim + 1))
    q = int(rng.integers(1, min(n, p) + 1))
    x = rng.uniform(0.0, 1.0, size=(n, p))
    model = Model(
        w=rng.uniform(0.1, 1.0, size=(n, q)),
        a=rng.uniform(0.1, 1.0, size=(q, q)),
        s=rng.uniform(0.1, 1.0, size=(q, p)),
        w_mask=np.zeros((n, q), dtype=bool),
        s_mask=np.zeros((q, p), dtype=bool),
    )
    return x, model


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise GbrnmfError(f"--trials must be >= 1, got {args.trials}")
    rng = np.random.default_rng(args.seed)
    lines: list[str] = []
    worst_rows = ["check,instance,matrix,i,j,value"]
    all_passed = True

    # gradient stage: fixed bank of small instances
    grad_worst, grad_where, grad_ok = 0.0, ("", 0, (0, 0)), True
    for instance in range(50):
        x, model = _verify_instance(rng)
        analytic = None
        if args.corrupt_gradient and instance == 0:
            analytic = gradient(x, model.w, model.a, model.s)
            analytic.d_w[0, 0] += 1.0
        rep = check_gradient(x, model, step=1e-6, tol=1e-5, analytic=analytic)
        grad_ok &= rep.passed
        for name, err in rep.max_rel_error.items():
            if err > grad_worst:
                grad_worst = err
                grad_where = (name, instance, rep.worst_entry[name])
    name, inst, (wi, wj) = grad_where
    lines.append(
        f"gradient: {'PASS' if grad_ok else 'FAIL'} "
        f"(instances=50, max_rel_error={grad_worst:.3e}, "
        f"worst={name}[{wi},{wj}] on instance {inst})"
    )
    worst_rows.append(f"gradient,{inst},{name},{wi},{wj},{grad_worst:.17g}")
    all_passed &= grad_ok

    # auxiliary stage: three bound families on a shared instance bank
    aux_instances = [_verify_instance(rng) for _ in range(20)]
    for target in ("w", "a", "s"):
        ok, min_margin, n_samples, n_skipped = True, np.inf, 0, 0
        worst_sample = (0, 0, 0)
        for instance, (x, model) in enumerate(aux_instances):
            rep = check_auxiliary(
                x, model, target=target, samples=3, probes=50,
                seed=int(rng.integers(0, 2**31)),
            )
            ok &= rep.passed
            n_skipped += rep.n_skipped
            for sample in rep.samples:
                if sample.skipped:
                    continue
                n_samples += 1
                if sample.min_margin < min_margin:
                    min_margin = sample.min_margin
                    worst_sample = (instance, sample.i, sample.j)
        inst, si, sj = worst_sample
        lines.append(
            f"auxiliary[{target}]: {'PASS' if ok else 'FAIL'} "
            f"(instances=20, samples={n_samples}, skipped={n_skipped}, "
            f"min_margin={min_margin:.3e})"
        )
        worst_rows.append(
            f"auxiliary_{target},{inst},{target},{si},{sj},{min_margin:.17g}"
        )
        all_passed &= ok

    # descent stage
    descent = check_descent(
        trials=args.trials, iterations=200, seed=int(rng.integers(0, 2**31))
    )
    lines.append(
        f"descent: {'PASS' if descent.passed else 'FAIL'} "
        f"(trials={descent.trials}, iterations={descent.iterations}, "
        f"violations={descent.violations}, worst={descent.worst_violation:.3e})"
    )
    worst_rows.append(
        f"descent,{descent.worst_trial if descent.worst_trial is not None else -1},"
        f",,,{descent.worst_violation:.17g}"
    )
    all_passed &= descent.passed

    lines.append(f"overall: {'PASS' if all_passed else 'FAIL'}")
    out = _out_dir(args)
    (out / "verify_report.txt").write_text("\n".join(lines) + "\n")
    (out / "verify_violations.csv").write_text("\n".join(worst_rows) + "\n")
    print("\n".join(lines))
    return EXIT_OK if all_passed else EXIT_CHECK_FAILED


def cmd_reconstruct(args) -> int:
    x = load_matrix(args.x, header=args.header)
    w = load_matrix(args.w, header=args.header)
    a = load_matrix(args.a, header=args.header)
    s = load_matrix(args.s, header=args.header)
    recon = reconstruct(w, a, s)
    if recon.shape != x.shape:
        raise ShapeError(
            f"reconstruction has shape {recon.shape} but x has shape {x.shape}"
        )

    if args.row is not None:
        if not 0 <= args.row < x.shape[0]:
            raise GbrnmfError(f"--row must lie in [0, {x.shape[0]}), got {args.row}")
        rows = [args.row]
    else:
        rows = list(range(x.shape[0]))

    interleaved = np.empty((2 * len(rows), x.shape[1]))
    residuals = np.empty((len(rows), 2))
    for pos, r in enumerate(rows):
        interleaved[2 * pos] = x[r]
        interleaved[2 * pos + 1] = recon[r]
        diff = x[r] - recon[r]
        residuals[pos] = (r, float(np.dot(diff, diff)))

    out = _out_dir(args)
    save_matrix(out / "recon.csv", interleaved)
    np.savetxt(out / "residuals.csv", residuals, fmt=["%d", "%.17g"], delimiter=",")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbrnmf",
        description=(
            "Group and basis restricted nonnegative matrix factorization: "
            "fit x ~ w a s with optional frozen group columns and basis rows."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic benchmark dataset")
    p_sim.add_argument("--n", type=int, default=400, help="observations")
    p_sim.add_argument("--p", type=int, default=2000, help="variables")
    p_sim.add_argument("--g", type=int, default=4, help="groups")
    p_sim.add_argument("--q", type=int, default=7, help="total factors")
    p_sim.add_argument(
        "--shared-constrained", type=int, default=1,
        help="how many shared factors are exposed as known bases",
    )
    p_sim.add_argument(
        "--noise-sd", type=float, default=None,
        help="Gaussian noise sd (default: 5%% of the mean clean signal)",
    )
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit the restricted model to a CSV matrix")
    p_fit.add_argument("--x", required=True, help="data matrix CSV (n x p)")
    p_fit.add_argument("--q", type=int, required=True, help="total factor count")
    p_fit.add_argument("--groups", help="frozen group-indicator block CSV (n x g)")
    p_fit.add_argument("--basis", help="frozen basis rows CSV (k x p)")
    p_fit.add_argument(
        "--relaxed-groups", action="store_true",
        help="allow arbitrary nonnegative group columns instead of a one-hot indicator",
    )
    p_fit.add_argument("--delta", type=float, default=0.0,
                       help="stop once per-iteration progress drops below this")
    p_fit.add_argument("--max-iter", type=int, default=50_000)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--restarts", type=int, default=1,
                       help="independent restarts; lowest final objective wins")
    p_fit.add_argument("--init-low", type=float, default=None)
    p_fit.add_argument("--init-high", type=float, default=None)
    p_fit.add_argument("--header", action="store_true",
                       help="skip the first line of every input CSV")
    p_fit.add_argument("--out", required=True, help="output directory")
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser(
        "evaluate", help="score fitted factors against a simulated truth"
    )
    p_eval.add_argument("--w", required=True)
    p_eval.add_argument("--a", required=True)
    p_eval.add_argument("--s", required=True)
    p_eval.add_argument("--truth-dir", required=True,
                        help="directory produced by the simulate command")
    p_eval.add_argument(
        "--mode", choices=[MODE_CONSTRAINED_ALIGNED, MODE_FREE_MATCHED],
        default=MODE_CONSTRAINED_ALIGNED,
    )
    p_eval.add_argument("--header", action="store_true")
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(func=cmd_evaluate)

    p_ver = sub.add_parser("verify", help="run the numerical oracle suite")
    p_ver.add_argument("--trials", type=int, default=100,
                       help="random instances for the descent harness")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument(
        "--corrupt-gradient", action="store_true",
        help="perturb one analytic gradient entry to demonstrate detection "
             "(forces a failure)",
    )
    p_ver.add_argument("--out", required=True)
    p_ver.set_defaults(func=cmd_verify)

    p_rec = sub.add_parser(
        "reconstruct", help="emit original-vs-reconstruction rows for plotting"
    )
    p_rec.add_argument("--x", required=True)
    p_rec.add_argument("--w", required=True)
    p_rec.add_argument("--a", required=True)
    p_rec.add_argument("--s", required=True)
    p_rec.add_argument("--row", type=int, default=None,
                       help="emit only this row (0-based)")
    p_rec.add_argument("--header", action="store_true")
    p_rec.add_argument("--out", required=True)
    p_rec.set_defaults(func=cmd_reconstruct)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GbrnmfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
