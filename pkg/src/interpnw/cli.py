"""Command line interface: ``interpnw <subcommand> ...``.

Exit status: 0 success, 1 usage error, 2 data/config error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from interpnw import __version__
from interpnw.config import RunConfig, load_config
from interpnw.datagen import make_scenario
from interpnw.errors import InputError, InterpNWError, NumericError
from interpnw.estimator import fit, predict_many, read_dataset_csv, read_queries_csv, write_predictions_csv
from interpnw.experiments import (
    Integrated,
    Pointwise,
    RateExperimentConfig,
    bias_variance_probe,
    run_rate_experiment,
    write_bias_variance_csv,
    write_excess_csv,
    write_rate_csv,
    write_summary,
)
from interpnw.figures import FIGURES, FigureSpec, emit_interpolation_curves
from interpnw.kernels import KERNEL_NAMES, KernelSpec, validate_for_dimension

log = logging.getLogger("interpnw")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_GRID = [256, 512, 1024, 2048, 4096, 8192, 16384]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="interpnw", description="Interpolating Nadaraya-Watson estimation with singular kernels.")
    p.add_argument("--version", action="version", version=f"interpnw {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="<command>", parser_class=_Parser)

    fp = sub.add_parser("fit-predict", help="fit on a CSV dataset and predict at query points")
    fp.add_argument("--data", required=True, help="CSV with header x1,...,xd,y")
    fp.add_argument("--kernel", required=True, choices=KERNEL_NAMES)
    fp.add_argument("--a", type=float, default=None, help="singularity exponent (default 0.49)")
    fp.add_argument("--h", type=float, required=True, help="bandwidth")
    fp.add_argument("--query", required=True, help="CSV with header x1,...,xd")
    fp.add_argument("--out", default=None, help="output CSV (default: stdout)")

    rp = sub.add_parser("rates", help="Monte Carlo convergence-rate experiment")
    rp.add_argument("--config", required=True)

    bp = sub.add_parser("bias-variance", help="bias/variance probe at a point")
    bp.add_argument("--config", required=True)

    gp = sub.add_parser("figures", help="curve tables for the 1-D interpolation figures")
    gp.add_argument("--id", required=True, choices=list(FIGURES), dest="figure_id")
    gp.add_argument("--a", type=float, default=None)
    gp.add_argument("--h", type=_floats, default=None, help="comma-separated bandwidths")
    gp.add_argument("--n", type=int, default=20)
    gp.add_argument("--seed", type=int, default=1)
    gp.add_argument("--grid", type=int, default=512)
    gp.add_argument("--out-dir", default=".")
    gp.add_argument("--svg", action="store_true", help="also write an SVG rendering")
    return p


def _kernel(name: str, a: float | None) -> KernelSpec:
    spec = KernelSpec.from_name(name, 0.49 if a is None else a)
    return spec


def _kernel_from_config(cfg: RunConfig) -> KernelSpec:
    return _kernel(cfg.get("kernel.name"), cfg.get_float("kernel.a"))


def _scenario_from_config(cfg: RunConfig):
    return make_scenario(cfg.get("scenario.name"), cfg.get_int("scenario.d", 1), cfg.scenario_params())


def _center(sc) -> list[float]:
    return list(0.5 * (sc.marginal.low + sc.marginal.high))


def cmd_fit_predict(args) -> int:
    data = read_dataset_csv(args.data)
    queries = read_queries_csv(args.query)
    model = fit(data, _kernel(args.kernel, args.a), args.h)
    batch = predict_many(model, queries)
    if args.out is None:
        write_predictions_csv(queries, batch, sys.stdout)
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_predictions_csv(queries, batch, fh)
    return EXIT_OK


def cmd_rates(args) -> int:
    cfg = load_config(args.config)
    sc = _scenario_from_config(cfg)
    kernel = _kernel_from_config(cfg)
    mode = cfg.get("experiment.eval", "integrated")
    if mode not in ("pointwise", "integrated", "both"):
        raise InputError(f"experiment.eval must be pointwise, integrated or both, got {mode!r}")
    evaluations = []
    if mode in ("pointwise", "both"):
        evaluations.append(Pointwise(tuple(cfg.get_floats("experiment.x0") or _center(sc))))
    if mode in ("integrated", "both"):
        evaluations.append(Integrated(cfg.get_int("experiment.n_eval", 1000)))
    out = Path(cfg.get("output.dir"))
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for ev in evaluations:
        rc = RateExperimentConfig(
            scenario=sc,
            kernel=kernel,
            n_grid=tuple(cfg.get_ints("experiment.n_grid", DEFAULT_GRID)),
            replicates=cfg.get_int("experiment.replicates", 100),
            evaluation=ev,
            seed=cfg.get_int("experiment.seed", 0),
            report_excess_risk=cfg.get_bool("experiment.excess_risk") and isinstance(ev, Integrated),
            allow_invalid_kernel=cfg.get_bool("kernel.force"),
            workers=cfg.get_int("experiment.workers", 1),
        )
        log.info("running %s rate experiment on %s", ev.label, rc.n_grid)
        res = run_rate_experiment(rc)
        write_rate_csv(res, out / f"rates_{ev.label}.csv")
        write_summary(res, out / f"summary_{ev.label}.txt")
        if rc.report_excess_risk:
            write_excess_csv(res, out / "excess_risk.csv")
        print(f"{ev.label}: slope={res.slope:.4f} (se {res.slope_stderr:.4f}), "
              f"theory={res.theoretical_exponent:.4f}")
        if res.degenerate:
            print(f"{ev.label}: some mean MSE values are exactly zero (degenerate fit)", file=sys.stderr)
            status = EXIT_NUMERIC
    return status


def cmd_bias_variance(args) -> int:
    cfg = load_config(args.config)
    sc = _scenario_from_config(cfg)
    kernel = _kernel_from_config(cfg)
    if not cfg.get_bool("kernel.force"):
        validate_for_dimension(kernel, sc.dim)
    x0 = cfg.get_floats("probe.x0") or _center(sc)
    reports = [
        bias_variance_probe(
            sc, kernel, n, x0,
            cfg.get_int("probe.design_reps", 200),
            cfg.get_int("probe.noise_reps", 200),
            cfg.get_int("experiment.seed", 0),
        )
        for n in cfg.get_ints("probe.n", [1024, 4096])
    ]
    out = Path(cfg.get("output.dir"))
    out.mkdir(parents=True, exist_ok=True)
    write_bias_variance_csv(reports, out / "bias_variance.csv")
    for r in reports:
        print(f"n={r.n} h={r.h:.4g} bias_sq={r.bias_sq:.4g} (bound {r.bias_bound:.4g}) "
              f"variance={r.variance:.4g} n*h^d*variance={r.variance_scale:.4g}")
    return EXIT_OK


def cmd_figures(args) -> int:
    spec = FigureSpec.default(args.figure_id, a=args.a, h_list=args.h, n=args.n,
                              seed=args.seed, grid_resolution=args.grid)
    emit_interpolation_curves(spec, args.out_dir, write_svg=args.svg)
    print(f"wrote {Path(args.out_dir) / f'figure_{spec.figure_id}.csv'}")
    return EXIT_OK


COMMANDS = {
    "fit-predict": cmd_fit_predict,
    "rates": cmd_rates,
    "bias-variance": cmd_bias_variance,
    "figures": cmd_figures,
}


def execute(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr, end="")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    if args.command is None:
        print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NumericError as exc:
        print(f"interpnw: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, InterpNWError, OSError) as exc:
        print(f"interpnw: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(execute())


if __name__ == "__main__":
    main()
