"""Command-line entry point.

Subcommands map onto experiments (``ensemble``, ``kickedtop``, ``walk``,
``transition``, ``dqc1``, ``scaling``) plus two utilities: ``sample`` writes
a matrix file, ``spectrum`` analyses one.

Exit codes: 0 success, 2 configuration error, 3 eigen-solver failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .dqc1 import ANALYTIC
from .ensembles import RngStream
from .experiments import DEFAULTS, ExperimentConfig, dqc1_source, run_experiment, spectrum_for_statistics
from .linalg import DimensionError, EigenSolverError, UnitarityError
from .spectral import WindowError, form_factor_series, hypothesis_test
from .tables import ConfigError, ResultTable, load_matrix, save_matrix

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SUBCOMMANDS = {
    "ensemble": "ensemble-convergence",
    "kickedtop": "kicked-top-scan",
    "walk": "walk",
    "transition": "transition",
    "dqc1": "dqc1-run",
    "scaling": "resource-scaling",
}

# flags whose argparse dest is also the experiment parameter name
DIRECT_FLAGS = (
    "beta", "dim", "samples", "eps_steps", "shots", "threshold_c", "workers", "regime",
    "source", "matrix", "n_max", "epsilon", "num_qubits", "sizes", "trials",
    "constant_shots", "shots_per_dim",
)


def _number_list(text: str) -> list:
    """``"10,20,30"`` or an inclusive range ``"10:250:10"``."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) not in (2, 3):
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        out, k = [], 0
        while start + k * step <= stop + 1e-9:
            out.append(start + k * step)
            k += 1
    else:
        out = [float(x) for x in text.split(",") if x.strip()]
    return [int(x) if float(x).is_integer() else x for x in out]


def _shots(text: str):
    if text == ANALYTIC:
        return ANALYTIC
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shots must be an integer or 'analytic', got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("shots must be positive")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--config", default=None, help="JSON file of parameters; flags override it")
    p.add_argument("--workers", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqc1chaos", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ensemble", help="t0/t1 convergence over random-matrix samples")
    _common(p)
    p.add_argument("--beta", type=int, choices=(0, 1, 2, 4))
    p.add_argument("--dim", type=int, help="matrix size (doublets for beta=4)")
    p.add_argument("--samples", type=int)
    p.add_argument("--delta-n", type=int, help="largest window")

    p = sub.add_parser("kickedtop", help="t0/t1 of the kicked top over a grid of j")
    _common(p)
    p.add_argument("--regime", choices=("regular", "chaotic"))
    p.add_argument("--j", type=_number_list, help="e.g. 10:250:10 or 10,20,40")
    p.add_argument("--delta-n", type=int)

    p = sub.add_parser("walk", help="eigenphase random walk, regular and chaotic")
    _common(p)
    p.add_argument("--j", type=float)

    p = sub.add_parser("transition", help="t0 along the regular-to-chaotic interpolation")
    _common(p)
    p.add_argument("--j", type=_number_list)
    p.add_argument("--delta-n", type=int)
    p.add_argument("--eps-steps", type=int)

    p = sub.add_parser("dqc1", help="simulated one-clean-qubit form factors")
    _common(p)
    p.add_argument("--source", choices=("cue", "coe", "cse", "poisson", "identity",
                                        "kicked-regular", "kicked-chaotic", "file"))
    p.add_argument("--matrix", help="matrix JSON file for --source file")
    p.add_argument("--dim", type=int)
    p.add_argument("--j", type=float)
    p.add_argument("--n-max", type=int)
    p.add_argument("--shots", type=_shots, help="total shots per power, or 'analytic'")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--num-qubits", type=int)
    p.add_argument("--no-bias-correction", action="store_true", default=None)

    p = sub.add_parser("scaling", help="misclassification rate against N under shot budgets")
    _common(p)
    p.add_argument("--sizes", type=_number_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--constant-shots", type=int)
    p.add_argument("--shots-per-dim", type=int)
    p.add_argument("--delta-n", type=int)
    p.add_argument("--threshold-c", type=float)

    p = sub.add_parser("sample", help="write a unitary to a matrix JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--source", default="cue",
                   choices=("cue", "coe", "cse", "poisson", "identity", "kicked-regular", "kicked-chaotic"))
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--j", type=float, default=20)

    p = sub.add_parser("spectrum", help="form factors and verdict for a matrix file")
    p.add_argument("matrix")
    p.add_argument("--delta-n", type=int, default=30)
    p.add_argument("--threshold-c", type=float, default=3.0)
    p.add_argument("--beta", type=int, choices=(0, 1, 2, 4), default=2,
                   help="4 collapses Kramers doublets first")
    p.add_argument("--max-window-fraction", type=float, default=0.1)
    p.add_argument("--subspace-scaling", choices=("linear", "quadratic"), default="linear")
    return parser


def _experiment_params(args: argparse.Namespace, experiment: str) -> dict:
    params = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        for key in ("seed", "format", "out"):
            if key in doc and getattr(args, key) is None:
                setattr(args, key, doc[key])
            doc.pop(key, None)
        params.update(doc)
    given = {k: v for k, v in vars(args).items() if v is not None}
    for name in DIRECT_FLAGS:
        if name in given and (name != "workers" or "workers" in DEFAULTS[experiment]):
            params[name] = given[name]
    if "delta_n" in given:
        params["delta_n_max" if experiment == "ensemble-convergence" else "delta_n"] = given["delta_n"]
    if "j" in given:
        params["j_list" if experiment in ("kicked-top-scan", "transition") else "j"] = given["j"]
    if given.get("no_bias_correction"):
        params["bias_correction"] = False
    return params


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_sample(args) -> None:
    p = {"source": args.source, "dim": args.dim, "j": args.j, "matrix": None}
    save_matrix(dqc1_source(p, RngStream(args.seed, 0)), args.out)


def _run_spectrum(args) -> None:
    u = load_matrix(args.matrix)
    spec = spectrum_for_statistics(u, args.beta)
    fraction = args.max_window_fraction if args.max_window_fraction > 0 else None
    series = form_factor_series(spec, args.delta_n)
    v = hypothesis_test(series, args.delta_n, args.threshold_c, fraction, args.subspace_scaling)
    rows = [[n, series[n]] for n in range(1, series.n_max + 1)]
    meta = {"N": series.dim, "t0": v.t0, "t1": v.t1, "decision": v.decision.value,
            "k_estimate": v.k_estimate, "version": __version__}
    sys.stdout.write(ResultTable(["n", "T_n"], rows, meta).to_csv())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sample":
            _run_sample(args)
            return EXIT_OK
        if args.command == "spectrum":
            _run_spectrum(args)
            return EXIT_OK
        experiment = SUBCOMMANDS[args.command]
        params = _experiment_params(args, experiment)
        config = ExperimentConfig(
            experiment, params,
            master_seed=0 if args.seed is None else args.seed,
            output_path=args.out,
            output_format=args.format or "csv",
        )
        table = run_experiment(config)
        _emit(table.dumps(config.output_format), config.output_path)
    except EigenSolverError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, WindowError, DimensionError, UnitarityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
