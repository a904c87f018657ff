"""Command-line front end for reproducible experiments.

Every command resolves its options into a config record that is embedded
in each output file (JSON key or CSV comment), so outputs are
byte-reproducible given the same arguments and self-describing about
their provenance. Exit codes: 0 success, 1 validation error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import serialize as ser
from .dynamics import FitOptions, SeriesDataset, fit_tt_model, forecast, generate_hnd
from .entanglement import PureState, ee_profile, normalize
from .errors import NumericsError, ValidationError
from .nonlin import parse as parse_nonlin
from .problem import (
    ProblemSpec,
    Representation,
    from_dual,
    full_dimension,
    symmetric_dimension,
    symmetrize,
    to_dual,
)
from .tensor_train import tt_decompose_with_error, tt_parameter_count, tt_reconstruct
from .tree_model import tcn_forward, tcn_tensors, tree_forward


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse usage failures are validation errors: single line, exit 1
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _floats(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    return [float(tok) for tok in text.split(",")]


def _ints(text: str) -> list:
    return [int(tok) for tok in text.split(",")] if text.strip() else []


def _config(command: str, **kwargs) -> dict:
    cfg = {"command": command, "version": __version__}
    cfg.update({k: v for k, v in kwargs.items() if v is not None})
    return cfg


def _load_truth(path):
    obj = ser.read_json(path)
    if "cores" in obj:
        return ser.tt_from_obj(obj)
    return ser.coeff_from_obj(obj)


def _cmd_dims(args) -> int:
    spec_o = ProblemSpec(args.L, args.P, Representation.ORIGINAL)
    spec_d = ProblemSpec(args.L, args.P, Representation.DUAL)
    print(f"full_original {full_dimension(spec_o)}")
    print(f"symmetric {symmetric_dimension(args.L, args.P)}")
    print(f"full_dual {full_dimension(spec_d)}")
    print(f"tt_parameter_bound {(args.L + 1) * args.P * args.rank**2}")
    return 0


def _cmd_map(args) -> int:
    w = ser.coeff_from_obj(ser.read_json(args.input))
    op = {"symmetrize": symmetrize, "to-dual": to_dual, "from-dual": from_dual}[args.command]
    out = op(w)
    obj = ser.coeff_to_obj(out)
    obj["config"] = _config(args.command, input=args.input, output=args.output)
    ser.write_json(args.output, obj)
    return 0


def _cmd_ee(args) -> int:
    w = ser.coeff_from_obj(ser.read_json(args.input))
    state = normalize(PureState(w.tensor))
    profile = ee_profile(state, w.spec.L, w.spec.P, w.spec.rep)
    cfg = _config(
        "ee",
        input=args.input,
        profile=args.profile,
        classification=args.classification,
        rep=w.spec.rep.value,
        L=w.spec.L,
        P=w.spec.P,
        permutation_symmetric=profile.permutation_symmetric,
    )
    ser.write_profile_csv(args.profile, profile, config=cfg)
    cls = ser.classification_to_obj(profile.scaling_class, profile.fit)
    cls["config"] = cfg
    ser.write_json(args.classification, cls)
    return 0


def _cmd_tt(args) -> int:
    w = ser.coeff_from_obj(ser.read_json(args.input))
    tt, discarded = tt_decompose_with_error(w.tensor, max_rank=args.max_rank, tol=args.tol)
    norm = float(np.linalg.norm(w.tensor))
    recon_err = float(np.linalg.norm(tt_reconstruct(tt) - w.tensor)) / (norm if norm > 0 else 1.0)
    cfg = _config("tt", input=args.input, output=args.output, report=args.report,
                  max_rank=args.max_rank, tol=args.tol)
    obj = ser.tt_to_obj(tt)
    obj["config"] = cfg
    ser.write_json(args.output, obj)
    ser.write_json(args.report, {
        "config": cfg,
        "ranks": list(tt.ranks),
        "parameter_count": tt_parameter_count(tt),
        "discarded_weight": discarded,
        "reconstruction_error": recon_err,
    })
    return 0


def _cmd_gen(args) -> int:
    truth = _load_truth(args.truth)
    f = parse_nonlin(args.nonlinearity)
    series = generate_hnd(truth, _floats(args.init), T=args.steps,
                          noise_std=args.noise_std, seed=args.seed, f=f)
    cfg = _config("gen", truth=args.truth, output=args.output, init=args.init,
                  steps=args.steps, noise_std=args.noise_std, seed=args.seed,
                  nonlinearity=f.value, L=series.L, P=series.P)
    ser.write_series_csv(args.output, series.values, config=cfg)
    return 0


def _fit_one(task):
    values, L, P, rank, iters, seed, nonlin_name, out_path, report_path, series_path = task
    f = parse_nonlin(nonlin_name)
    data = SeriesDataset(np.asarray(values), L=L, P=P, noise_std=0.0, seed=seed)
    opts = FitOptions(max_iters=iters, seed=seed, nonlinearity=f)
    model, report = fit_tt_model(data, L=L, P=P, D=rank, opts=opts)
    cfg = _config("fit", series=series_path, output=out_path, report=report_path,
                  L=L, P=P, rank=rank, iters=iters, seed=seed, nonlinearity=f.value)
    obj = ser.tt_to_obj(model)
    obj["config"] = cfg
    ser.write_json(out_path, obj)
    ser.write_json(report_path, {
        "config": cfg,
        "train_rmse": report.train_rmse,
        "validation_rmse": report.validation_rmse,
        "parameter_count": report.parameter_count,
        "gradient_check": report.gradient_check,
        "nonlinearity": report.nonlinearity,
        "iterations": report.iterations,
        "loss_curve": report.loss_curve,
    })
    return out_path


def _with_seed_suffix(path: str, seed: int) -> str:
    if "." in path.rsplit("/", 1)[-1]:
        stem, ext = path.rsplit(".", 1)
        return f"{stem}.seed{seed}.{ext}"
    return f"{path}.seed{seed}"


def _cmd_fit(args) -> int:
    values = ser.read_series_csv(args.series)
    seeds = _ints(args.seeds) if args.seeds else [args.seed]
    tasks = []
    for seed in seeds:
        out = args.output if len(seeds) == 1 else _with_seed_suffix(args.output, seed)
        rep = args.report if len(seeds) == 1 else _with_seed_suffix(args.report, seed)
        tasks.append((values.tolist(), args.L, args.P, args.rank, args.iters, seed,
                      args.nonlinearity, out, rep, args.series))
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            list(pool.map(_fit_one, tasks))
    else:
        for task in tasks:
            _fit_one(task)
    return 0


def _cmd_forecast(args) -> int:
    tt = ser.tt_from_obj(ser.read_json(args.model))
    f = parse_nonlin(args.nonlinearity)
    pred = forecast(tt, _floats(args.history), horizon=args.horizon, f=f)
    cfg = _config("forecast", model=args.model, output=args.output, history=args.history,
                  horizon=args.horizon, nonlinearity=f.value)
    ser.write_series_csv(args.output, pred, config=cfg)
    return 0


def _cmd_tcn_check(args) -> int:
    wts, f = ser.tcn_weights_from_obj(ser.read_json(args.weights))
    net = tcn_tensors(wts, f=f)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.samples):
        h = rng.uniform(-1.0, 1.0, size=4)
        leaf_vectors = [x ** np.arange(net.leaf_dim) for x in h]
        dev = abs(tree_forward(net, leaf_vectors) - tcn_forward(wts, h, f))
        worst = max(worst, dev)
    bound = 10.0 * wts.tolerance
    cfg = _config("tcn-check", weights=args.weights, output=args.output,
                  samples=args.samples, seed=args.seed, nonlinearity=f.value)
    ser.write_json(args.output, {
        "config": cfg,
        "max_abs_deviation": worst,
        "tolerance": wts.tolerance,
        "bound": bound,
        "within_bound": bool(worst < bound),
    })
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="tnpoly", description="Tensor-network polynomial model toolkit")
    parser.add_argument("--version", action="version", version=f"tnpoly {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", help="print problem dimensions for (L, P, rank)")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--P", type=int, required=True)
    p.add_argument("--rank", type=int, default=2)

    for name, blurb in (
        ("symmetrize", "project a coefficient tensor onto its symmetric part"),
        ("to-dual", "map an original-representation tensor to the time-lag lattice"),
        ("from-dual", "spread a time-lag tensor back over replica sites"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--input", required=True)
        p.add_argument("--output", required=True)

    p = sub.add_parser("ee", help="entropy profile and scaling class of a tensor")
    p.add_argument("--input", required=True)
    p.add_argument("--profile", required=True, help="output CSV of per-cut entropies")
    p.add_argument("--classification", required=True, help="output JSON with the fitted class")

    p = sub.add_parser("tt", help="tensor-train factorization of a tensor")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output chain JSON")
    p.add_argument("--report", required=True, help="output error report JSON")
    p.add_argument("--max-rank", type=int, default=None)
    p.add_argument("--tol", type=float, default=0.0)

    p = sub.add_parser("gen", help="generate a synthetic series from a truth model")
    p.add_argument("--truth", required=True, help="coefficient tensor or chain JSON")
    p.add_argument("--init", required=True, help="comma-separated initial history")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nonlinearity", default="tanh")
    p.add_argument("--output", required=True)

    p = sub.add_parser("fit", help="fit a tensor-train model to a series CSV")
    p.add_argument("--series", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--P", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", default=None, help="comma-separated seeds for independent fits")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers across seeds")
    p.add_argument("--nonlinearity", default="tanh")
    p.add_argument("--output", required=True)
    p.add_argument("--report", required=True)

    p = sub.add_parser("forecast", help="closed-loop rollout of a fitted chain")
    p.add_argument("--model", required=True)
    p.add_argument("--history", required=True, help="comma-separated most recent L values")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--nonlinearity", default="tanh")
    p.add_argument("--output", required=True)

    p = sub.add_parser("tcn-check", help="verify the delta-tensor tree matches the reference TCN")
    p.add_argument("--weights", required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)

    return parser


_HANDLERS = {
    "dims": _cmd_dims,
    "symmetrize": _cmd_map,
    "to-dual": _cmd_map,
    "from-dual": _cmd_map,
    "ee": _cmd_ee,
    "tt": _cmd_tt,
    "gen": _cmd_gen,
    "fit": _cmd_fit,
    "forecast": _cmd_forecast,
    "tcn-check": _cmd_tcn_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
