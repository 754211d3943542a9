import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from starfan.core.arrangement import (
    ChamberEnumerator,
    LatticeSpec,
    level_set_summary,
    minimal_chambers,
    parameter_grid,
    translational_grid,
    translational_likelihood_grid,
    zero_components,
)
from starfan.core.fan import Fan
from starfan.core.loss import data_matrix, log_likelihood, translational_log_likelihood, translational_zero_one_loss, zero_one_loss
from starfan.data.generator import sample_star_dataset
from starfan.data.models import FitStatus, GenSpec, LabeledDataset
from starfan.data.service import default_fan_for, resolve_dataset, resolve_fan, split_dataset, vary_fan
from starfan.data.store import DataStore, load_params
from starfan.infra.config import RunConfig, SolverOptions, get_settings
from starfan.infra.errors import SolverError, StarFanError
from starfan.infra.render import heatmap_svg, star_svg, translation_outlines
from starfan.optimization.mle import fit_mle, uniqueness_certificate
from starfan.optimization.runner import lambda_sweep, parse_lambdas
from starfan.optimization.selection import select_best_fit

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger("Main")


def _pair(text: str) -> Tuple[float, float]:
    x, y = (float(v) for v in text.split(","))
    return x, y


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starfan", description="Star-shaped classifiers on simplicial fans")
    parser.add_argument("--log-level", default=None, help="Overrides STARFAN_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, data: bool = True) -> None:
        p.add_argument("--fan", default=None, help="kite:d, typeb:d, line, rays2d:<path>, json:<path>")
        if data:
            p.add_argument("--data", default=None, help="CSV path, builtin:line8 or builtin:diagonal3")
            p.add_argument("--gen", default=None, help="JSON file with a generation spec")
            p.add_argument("--labels-variant", default=None, choices=["listed", "complemented", "inner"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)

    def solver(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=SolverOptions().tol)
        p.add_argument("--max-iter", type=int, default=SolverOptions().max_iter)
        p.add_argument("--floor", type=float, default=SolverOptions().floor)
        p.add_argument("--radius", type=float, default=SolverOptions().radius)
        p.add_argument("--holdout", type=float, default=0.0)
        p.add_argument("--strict", action="store_true", help="Exit 4 on a non-finite maximum too")
        p.add_argument("--refine", type=_pair, default=None, metavar="X,Y")
        p.add_argument("--coarsen", type=int, default=None, metavar="I")
        p.add_argument("--score-variant", default=None, choices=["listed", "complemented", "inner"],
                       help="Score builtin:line8 fits against another label variant")

    gen = sub.add_parser("gen", help="Sample a noisy dataset from a known star")
    common(gen, data=False)
    gen.add_argument("--a-true", default=None, help="JSON list of star parameters")
    gen.add_argument("--count", type=int, default=500)
    gen.add_argument("--noise", type=float, default=0.9)

    train = sub.add_parser("train", help="Fit the likelihood at one lambda or over a grid")
    common(train)
    solver(train)
    group = train.add_mutually_exclusive_group(required=True)
    group.add_argument("--lambda", dest="lam", type=float)
    group.add_argument("--lambdas", type=parse_lambdas)

    sweep = sub.add_parser("sweep", help="Fit along a lambda grid and pick the best")
    common(sweep)
    solver(sweep)
    sweep.add_argument("--lambdas", type=parse_lambdas, required=True)

    ev = sub.add_parser("eval", help="Score given parameters")
    common(ev)
    ev.add_argument("--params", required=True, help='JSON list a, or {"a": [...], "t": [...]}')
    ev.add_argument("--lambda", dest="lam", type=float, default=None)

    chambers = sub.add_parser("chambers", help="Enumerate the chambers of the data arrangement")
    common(chambers)
    chambers.add_argument("--box", default="1.2", help="hi or lo,hi")

    landscape = sub.add_parser("landscape", help="err or log-likelihood over a 2-D grid")
    common(landscape)
    landscape.add_argument("--mode", choices=["params", "translation"], default="params")
    landscape.add_argument("--metric", choices=["err", "loglik"], default="err")
    landscape.add_argument("--lambda", dest="lam", type=float, default=None)
    landscape.add_argument("--grid", required=True, help="lo:hi:step[,lo:hi:step]")
    landscape.add_argument("--params", default=None)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    gen = None
    if args.command == "gen":
        a_true = json.loads(args.a_true) if args.a_true else None
        fields = {"fan_name": args.fan or "typeb:2", "count": args.count, "noise": args.noise, "seed": args.seed}
        if a_true is not None:
            fields["a_true"] = a_true
        gen = GenSpec(**fields)
    elif getattr(args, "gen", None):
        with open(args.gen) as f:
            gen = GenSpec(**json.load(f))

    lambdas: List[float] = []
    if getattr(args, "lambdas", None):
        lambdas = args.lambdas
    elif getattr(args, "lam", None) is not None:
        lambdas = [args.lam]

    solver = SolverOptions()
    if hasattr(args, "tol"):
        solver = SolverOptions(tol=args.tol, max_iter=args.max_iter, floor=args.floor, radius=args.radius)

    fields = dict(
        command=args.command,
        fan=args.fan,
        data=getattr(args, "data", None),
        gen=gen,
        labels_variant=getattr(args, "labels_variant", None),
        lambdas=lambdas,
        solver=solver,
        holdout=getattr(args, "holdout", 0.0),
        seed=args.seed,
        strict=getattr(args, "strict", False),
    )
    if args.out:
        fields["out_dir"] = args.out
    return RunConfig(**fields)


def _load(config: RunConfig) -> Tuple[Fan, LabeledDataset]:
    if config.gen is not None:
        fan = resolve_fan(config.fan or config.gen.fan_name)
        return fan, sample_star_dataset(config.gen, fan)
    fan = resolve_fan(config.fan or default_fan_for(config.data) or "typeb:2")
    return fan, resolve_dataset(config.data, config.labels_variant)


def cmd_gen(config: RunConfig, args: argparse.Namespace) -> int:
    fan = resolve_fan(config.gen.fan_name)
    data = sample_star_dataset(config.gen, fan)
    store = DataStore(config.out_dir)
    path = store.write_dataset(data)
    positives = int(data.labels.sum())
    store.write_report({
        "command": "gen",
        "fan": fan.name,
        "spec": config.gen.model_dump(),
        "m": data.m,
        "positives": positives,
        "negatives": data.m - positives,
        "err_a_true": zero_one_loss(data_matrix(fan, data), data.labels, config.gen.a_true).err,
    })
    print(f"{path}: m={data.m}, y=1: {positives}, y=0: {data.m - positives}")
    return 0


def cmd_train(config: RunConfig, args: argparse.Namespace) -> int:
    fan, data = _load(config)
    fan = vary_fan(fan, args.refine, args.coarsen)
    train, held = split_dataset(data, config.holdout, config.seed)
    A = data_matrix(fan, train)
    holdout = (data_matrix(fan, held), held.labels) if held is not None else None
    eval_labels = None
    if args.score_variant is not None:
        eval_labels = resolve_dataset("builtin:line8", args.score_variant).labels
        if config.holdout:
            raise ValueError("--score-variant cannot be combined with --holdout")

    store = DataStore(config.out_dir)
    report = {
        "command": config.command,
        "fan": fan.name,
        "n": fan.n,
        "m": train.m,
        "solver": config.solver.model_dump(),
        "certificate": uniqueness_certificate(A, train.labels).to_dict(),
    }

    if len(config.lambdas) == 1 and config.command == "train":
        fit = fit_mle(A, train.labels, config.lambdas[0], config.solver)
        scored = train.labels if eval_labels is None else eval_labels
        report["fit"] = fit.to_dict()
        report["train"] = zero_one_loss(A, scored, fit.a_star).to_dict()
        if holdout is not None:
            report["holdout"] = zero_one_loss(holdout[0], holdout[1], fit.a_star).to_dict()
        fits = [fit]
        best = fit
    else:
        entries = lambda_sweep(A, train.labels, config.lambdas, config.solver, eval_labels=eval_labels, holdout=holdout)
        store.write_sweep(entries)
        chosen = select_best_fit(entries)
        report["sweep"] = [e.to_dict() for e in entries]
        report["best"] = chosen.to_dict() if chosen else None
        fits = [e.fit for e in entries if e.fit is not None]
        best = chosen.fit if chosen else None
        if chosen:
            print(f"best lambda={chosen.lam:.6g} accuracy={(chosen.holdout or chosen.report).accuracy:.4f}")

    if fan.dim == 2 and best is not None and not best.degenerate_rays:
        store.write_text(star_svg(fan, best.a_star, train), "star.svg")
    store.write_report(report)

    if not fits:
        raise SolverError("No lambda produced a fit")
    stuck = [f for f in fits if f.status == FitStatus.MAX_ITERATIONS]
    if config.strict:
        stuck += [f for f in fits if f.status == FitStatus.NONFINITE_MAXIMUM]
    if stuck:
        raise SolverError(f"{len(stuck)} fit(s) ended without a finite optimum: {sorted({f.status.value for f in stuck})}")
    return 0


def cmd_eval(config: RunConfig, args: argparse.Namespace) -> int:
    fan, data = _load(config)
    a, t = load_params(args.params)
    report = {"command": "eval", "fan": fan.name, "m": data.m, "a": a.tolist()}
    if t is not None:
        report["t"] = t.tolist()
        report["loss"] = translational_zero_one_loss(fan, data, a, t).to_dict()
        if args.lam is not None:
            report["log_likelihood"] = translational_log_likelihood(fan, data, a, t, args.lam)
    else:
        A = data_matrix(fan, data)
        report["loss"] = zero_one_loss(A, data.labels, a).to_dict()
        if args.lam is not None:
            report["log_likelihood"] = log_likelihood(A, data.labels, a, args.lam)
    DataStore(config.out_dir).write_report(report)
    print(json.dumps(report["loss"], sort_keys=True))
    return 0


def _parse_box(text: str) -> Tuple[float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) == 1:
        return 1e-6 * parts[0], parts[0]
    if len(parts) == 2:
        return parts[0], parts[1]
    raise ValueError(f"--box takes hi or lo,hi, got {text!r}")


def cmd_chambers(config: RunConfig, args: argparse.Namespace) -> int:
    fan, data = _load(config)
    A = data_matrix(fan, data)
    enumerator = ChamberEnumerator()
    chambers = enumerator.enumerate(A, data.labels, _parse_box(args.box))
    store = DataStore(config.out_dir)
    store.write_chambers(chambers)
    summary = level_set_summary(chambers)
    store.write_report({
        "command": "chambers",
        "fan": fan.name,
        "m": data.m,
        "box": list(_parse_box(args.box)),
        "chambers": len(chambers),
        "lp_solves": enumerator.lp_solves,
        "level_sets": {str(k): v for k, v in summary.items()},
        "minimal": [c.key for c in minimal_chambers(chambers)],
    })
    print(f"{len(chambers)} chambers; err histogram {summary}")
    return 0


def cmd_landscape(config: RunConfig, args: argparse.Namespace) -> int:
    fan, data = _load(config)
    specs = [LatticeSpec.parse(part) for part in args.grid.split(",")]
    if len(specs) == 1:
        specs = specs * 2
    if len(specs) != 2:
        raise ValueError("--grid takes one or two lo:hi:step specs")
    if args.metric == "loglik" and args.lam is None:
        raise ValueError("--metric loglik needs --lambda")
    xs, ys = specs[0].axis(), specs[1].axis()
    store = DataStore(config.out_dir)
    report = {"command": "landscape", "mode": args.mode, "metric": args.metric, "fan": fan.name, "m": data.m}

    if args.mode == "params":
        A = data_matrix(fan, data)
        values = parameter_grid(A, data.labels, xs, ys, metric=args.metric, lam=args.lam)
        svg = heatmap_svg(xs, ys, values, f"{args.metric} over (a1, a2)")
    else:
        if not args.params:
            raise ValueError("--mode translation needs --params")
        a, _ = load_params(args.params)
        if args.metric == "err":
            grid = translational_grid(fan, data, a, (specs[0], specs[1]))
            values = grid.err.astype(float)
            store.write_grid(xs, ys, grid.cell_ids(), "signature.csv")
        else:
            values = translational_likelihood_grid(fan, data, a, args.lam, (specs[0], specs[1]))
        svg = heatmap_svg(xs, ys, values, f"{args.metric} over t", outlines=translation_outlines(fan, a, data), points=data)

    finite = values[np.isfinite(values)]
    report["min"] = float(finite.min()) if finite.size else None
    report["max"] = float(finite.max()) if finite.size else None
    if args.metric == "err":
        report["zero_components"] = zero_components(values)
    store.write_grid(xs, ys, values, "grid.csv")
    store.write_text(svg, "landscape.svg")
    store.write_report(report)
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "sweep": cmd_train,
    "eval": cmd_eval,
    "chambers": cmd_chambers,
    "landscape": cmd_landscape,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (args.log_level or get_settings().log_level).upper()
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        config = _config(args)
        return COMMANDS[args.command](config, args)
    except (ValidationError, ValueError, json.JSONDecodeError) as e:
        logger.error(f"Usage error: {e}")
        return 2
    except StarFanError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error on {e.filename}: {e.strerror}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
