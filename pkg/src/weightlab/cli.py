"""Command-line interface: thin wrappers over the experiment runner.

Each subcommand assembles one ExperimentConfig and hands it to
``runner.run``; the only work done here is argument parsing and writing the
result to stdout or files. Report-style outputs (probe-compactness) also
render a figure next to the delimited output unless ``--no-figure``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .runner import ExperimentConfig, run


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument("--dim", type=int, default=1, choices=(1, 2), help="grid dimension")
    parser.add_argument("--levels", type=int, default=8, help="grid depth L (cells per axis 2^L)")
    parser.add_argument(
        "--lattice", default="dyadic", choices=("dyadic", "shifted"), help="cube family"
    )
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", default="json", choices=("json", "csv"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weightlab",
        description="dyadic-grid workbench for weights, maximal operators, "
        "function-space norms, and compactness probes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="Muckenhoupt-type constants of a weight")
    _add_common(p)
    p.add_argument("--weight", default="lognormal", help="unit | lognormal(s) | power(a[,c]) | @file")
    p.add_argument("--p", default="2", help="exponent, rational like 3/2")
    p.add_argument("--r", default=None, help="limited-range lower exponent")
    p.add_argument("--s", default=None, help="limited-range upper exponent (inf allowed)")

    p = sub.add_parser("maximal", help="iterated maximal operator")
    _add_common(p)
    p.add_argument("--f", default="random", help="function source")
    p.add_argument("--k", type=int, default=1, help="number of iterations")

    p = sub.add_parser("sparse", help="stopping-time sparse family and its checks")
    _add_common(p)
    p.add_argument("--f", default="nonneg", help="function source (made nonnegative)")
    p.add_argument("--a", type=float, default=2.0, help="stopping threshold factor, >= 2")

    p = sub.add_parser("norm", help="norm of a function in a weighted space")
    _add_common(p)
    p.add_argument("--space", required=True, help="weighted:p=2,w=unit or variable:p=@f.json,w=@w.json")
    p.add_argument("--f", default="random", help="function source")

    p = sub.add_parser("rescale", help="rescaled space along (r, s) with trace")
    _add_common(p)
    p.add_argument("--space", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--s", required=True)

    p = sub.add_parser("rdf", help="iteration-built majorant weight")
    _add_common(p)
    p.add_argument("--f", default="nonneg")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--B", default="auto", help="operator norm bound, or 'auto'")
    p.add_argument("--K", type=int, default=40, help="iteration depth")

    p = sub.add_parser("selfimprove", help="largest r0 with r0' >= 2 c_d B")
    _add_common(p)
    p.add_argument("--B", default="2")
    p.add_argument("--rstar", default="2")
    p.add_argument("--cd", default="4")

    p = sub.add_parser("lrplan", help="limited-range off-diagonal exponent plan")
    _add_common(p)
    p.add_argument("--r1", required=True)
    p.add_argument("--s1", required=True)
    p.add_argument("--r2", required=True)
    p.add_argument("--s2", required=True)
    p.add_argument("--p1", required=True)
    p.add_argument("--eps", default=None, help="tilde margin epsilon (rational)")

    p = sub.add_parser("probe-compactness", help="commutator singular-value decay probe")
    _add_common(p)
    p.add_argument("--kernel", default="hilbert", choices=("hilbert", "dini", "rough"))
    p.add_argument("--symbol", default="bump", help="bump | jump | log | @file (file fixes the depth)")
    p.add_argument("--weight", default="unit")
    p.add_argument("--depths", default="6..8", help="range like 6..10 or list 6,8,10")
    p.add_argument("--tails", default="8,16,32")
    p.add_argument("--no-figure", action="store_true", help="skip the figure next to --out")

    p = sub.add_parser("acceptance", help="run the acceptance suite")
    _add_common(p)

    return parser


def _parse_depths(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",")]


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    params: dict = {}
    kind = args.command
    if kind == "weights":
        params = {"weight": args.weight, "p": args.p}
        if args.r is not None:
            params["r"] = args.r
        if args.s is not None:
            params["s"] = args.s
    elif kind == "maximal":
        params = {"f": args.f, "iterations": args.k}
    elif kind == "sparse":
        params = {"f": args.f, "a": args.a}
    elif kind == "norm":
        params = {"space": args.space, "f": args.f}
    elif kind == "rescale":
        params = {"space": args.space, "r": args.r, "s": args.s}
    elif kind == "rdf":
        params = {"f": args.f, "r": args.r, "bound": args.B, "iterations": args.K}
    elif kind == "selfimprove":
        params = {"bound": args.B, "r_star": args.rstar, "c_d": args.cd}
    elif kind == "lrplan":
        params = {"r1": args.r1, "s1": args.s1, "r2": args.r2, "s2": args.s2, "p1": args.p1}
        if args.eps is not None:
            params["epsilon"] = args.eps
    elif kind == "probe-compactness":
        params = {
            "kernel": args.kernel,
            "symbol": args.symbol,
            "weight": args.weight,
            "depths": _parse_depths(args.depths),
            "tails": [int(t) for t in args.tails.split(",")],
        }
    return ExperimentConfig(
        kind=kind,
        seed=args.seed,
        dimension=args.dim,
        depth=args.levels,
        lattice=args.lattice,
        params=params,
    )


def _write_csv(record, path_or_stdout) -> None:
    rows = record.outputs.get("rows")
    writer = csv.writer(path_or_stdout)
    if rows is not None:
        writer.writerow(["depth", "k", "sigma_ratio"])
        for row in rows:
            writer.writerow([row["depth"], row["k"], repr(row["ratio"])])
        return
    values = record.outputs.get("values")
    if values is not None:
        writer.writerow(["cell", "value"])
        for i, v in enumerate(values):
            writer.writerow([i, repr(v)])
        return
    writer.writerow(["key", "value"])
    for key, value in record.outputs.items():
        writer.writerow([key, json.dumps(value)])


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    record = run(config)

    if args.out:
        out_path = Path(args.out)
        with open(out_path, "w", newline="") as fh:
            if args.format == "json":
                json.dump(record.to_json(), fh, indent=2)
            else:
                _write_csv(record, fh)
        if args.command == "probe-compactness" and not args.no_figure:
            from .plots import render_probe_figure

            render_probe_figure(record.outputs, str(out_path.with_suffix(".png")))
    else:
        if args.format == "json":
            json.dump(record.to_json(), sys.stdout, indent=2)
            sys.stdout.write("\n")
        else:
            _write_csv(record, sys.stdout)

    if args.command == "acceptance":
        for crit in record.outputs["criteria"]:
            status = "PASS" if crit["passed"] else "FAIL"
            print(f"{status}  {crit['name']}  {crit['detail']}", file=sys.stderr)
    return 0 if record.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
