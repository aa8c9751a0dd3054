"""Command line front end.

Subcommands mirror the pipeline configs: s2, s1, sn build and verify word
certificates for rotation powers; matrix checks the root-of-unity
compressibility criterion; bfs runs the exact word-metric demos; appendix
runs the displacement-ball experiments; run executes a JSON config file;
table converts a verified certificate into the distortion-bound CSV.

Exit status is 0 exactly when every verified entry passed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, DistortionLabError
from .reports import ExperimentConfig, emit_distortion_table, read_certificate, run, run_config_file


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--theta", default="cf:golden",
                   help="angle description: cf:golden | cf:a0,a1,(b1,...) | rat:p/q")
    p.add_argument("--growth", default="quadratic",
                   help="growth target: linear|quadratic|cubic|exp|n^k")
    p.add_argument("--count", type=int, default=6, help="number of certificate entries")
    p.add_argument("--samples", type=int, default=10_000, help="verification grid size")
    p.add_argument("--tol", type=float, default=1e-8, help="verification tolerance")
    p.add_argument("--seed", type=int, default=0, help="grid seed")
    p.add_argument("--out", default=None, help="output path stem or cert.json path")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="distortion-lab",
                                 description="word-length certificates for "
                                             "circle and sphere transformation groups")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("s2", help="rotation certificates on the 2-sphere")
    _add_common(p)

    p = sub.add_parser("s1", help="rotation certificates on the circle")
    _add_common(p)
    p.add_argument("--mode", choices=("lipschitz", "c1"), default="lipschitz")

    p = sub.add_parser("sn", help="simultaneous certificates from pre-factored inputs")
    _add_common(p)
    p.add_argument("--dim", type=int, choices=(1, 2), default=2)
    p.add_argument("--inputs", default=None,
                   help="path to a JSON inputs spec (rotation multiples, "
                        "{'multiples': [...]}, or {'maps': [...]}; default [1, 2])")
    p.add_argument("--exponents", default=None,
                   help="comma-separated explicit exponents overriding the schedule")

    p = sub.add_parser("matrix", help="integer-matrix compressibility check")
    p.add_argument("--check", required=True, metavar="MATRIX_JSON",
                   help="path to a JSON file with row-major rational strings")
    p.add_argument("--out", default=None)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("bfs", help="exact word-metric certificates (affine model group)")
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--radius", type=int, default=11)
    p.add_argument("--out", default=None)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("appendix", help="displacement-ball experiments")
    p.add_argument("--experiment", default="diameter", choices=("diameter",))
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("run", help="run a JSON experiment config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("table", help="distortion-bound CSV from a verified certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--out", default=None)

    return ap


def _matrix_rows_from_file(path: str):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "rows" in data:
        return data["rows"]
    if isinstance(data, dict) and "entries" in data:
        flat = data["entries"]
        n = int(round(len(flat) ** 0.5))
        if n * n != len(flat):
            raise ConfigError("flat matrix entries must form a square")
        return [flat[i * n:(i + 1) * n] for i in range(n)]
    if isinstance(data, list):
        return data
    raise ConfigError("matrix JSON must be a list of rows or {rows: [...]}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            report = run_config_file(args.config)
        elif args.command == "table":
            cert = read_certificate(args.cert)
            csv = emit_distortion_table(cert)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(csv)
            else:
                sys.stdout.write(csv)
            return 0
        else:
            cfg_dict = {"pipeline": args.command}
            if args.command in ("s2", "s1", "sn"):
                cfg_dict.update(theta=args.theta, growth=args.growth, count=args.count,
                                samples=args.samples, tol=args.tol, seed=args.seed)
                if args.command == "s1":
                    cfg_dict["mode"] = args.mode
                if args.command == "sn":
                    cfg_dict["dim"] = args.dim
                    if args.inputs:
                        with open(args.inputs) as fh:
                            cfg_dict["inputs"] = json.load(fh)
                    if args.exponents:
                        cfg_dict["exponents"] = [int(x) for x in args.exponents.split(",")]
            elif args.command == "matrix":
                cfg_dict["matrix_rows"] = _matrix_rows_from_file(args.check)
            elif args.command == "bfs":
                cfg_dict.update(k_max=args.k_max, radius=args.radius)
            elif args.command == "appendix":
                cfg_dict.update(experiment=args.experiment, r=args.r, k=args.k,
                                trials=args.trials, seed=args.seed)
            if getattr(args, "out", None):
                cfg_dict["out"] = args.out
            if getattr(args, "no_figures", False):
                cfg_dict["figures"] = False
            report = run(ExperimentConfig.from_dict(cfg_dict))
        print(f"pipeline={report.pipeline} passed={report.passed} "
              f"sup_error={report.sup_error:.3e} outputs={report.outputs}")
        return 0 if report.passed else 1
    except (ConfigError, DistortionLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
