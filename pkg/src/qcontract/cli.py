"""``qcontract`` command line.

Exit codes: 0 accept or success, 2 halt (integrity violation), 1 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .budget import (
    BudgetParams,
    NonPositiveMargin,
    ReferenceMode,
    calibrate_tolerance,
    detection_margin,
    per_observable_shots,
    raw_shot_budget,
    shot_budget,
)
from .channels import ChannelKind, DriftParams, Tier, kernel_circuit, observable_family
from .contract import Fingerprint, StageSpec, Verdict, compute_fingerprint, run_verifier
from .experiments import ConfigError, DriftTargetUnreachable, ExperimentConfig, run_experiment
from .framebound import frame_bound_analytic_local, frame_bound_numeric
from .report import emit_report
from .simcore import IDEAL, NoiseModel, derive_rng

EXIT_OK, EXIT_ERROR, EXIT_HALT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for halt here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common(seed_default: int | None = 0) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--shots", type=int, default=None, help="shots per observable")
    p.add_argument("--exact", action="store_true", help="exact expectations, no sampling")
    p.add_argument("--family", choices=[t.value for t in Tier], default=None)
    p.add_argument("--channel", choices=[c.value for c in ChannelKind], default=None)
    p.add_argument("--noise-lambda", type=float, default=None)
    p.add_argument("--noise-readout", type=float, default=None)
    p.add_argument("--out", type=Path, default=None, metavar="DIR")
    p.add_argument("--config", type=Path, default=None, metavar="FILE")
    return p


def _noise(args) -> NoiseModel:
    if args.exact:
        return IDEAL
    return NoiseModel(0.02 if args.noise_lambda is None else args.noise_lambda,
                      0.01 if args.noise_readout is None else args.noise_readout)


def _drift(args) -> DriftParams | None:
    if args.channel != ChannelKind.DRIFTED.value:
        return None
    return DriftParams(tuple(args.drift_alpha), tuple(args.drift_beta))


def _emit(doc: dict, out: Path | None, name: str) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def cmd_fingerprint(args) -> int:
    family = observable_family(args.family or "complete")
    channel = args.channel or "honest"
    circuit = kernel_circuit(channel, args.xi, args.xj, drift=_drift(args))
    shots = None if args.exact else (args.shots or 2280)
    fp = compute_fingerprint(circuit, family, shots, _noise(args), derive_rng(args.seed),
                             {"channel": channel, "seed": args.seed})
    _emit(fp.to_dict(), args.out, "fingerprint.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    tier = args.family or "complete"
    family = observable_family(tier)
    if args.reference is not None:
        reference = Fingerprint.from_dict(json.loads(args.reference.read_text(encoding="utf-8")))
    else:
        reference = compute_fingerprint(kernel_circuit("honest", args.xi, args.xj), family,
                                        provenance={"channel": "honest"})
    spec = StageSpec(tuple(family), args.epsilon,
                     {"kind": "honest", "x_i": list(args.xi), "x_j": list(args.xj)})
    channel = kernel_circuit(args.channel or "honest", args.xi, args.xj, drift=_drift(args))
    report = run_verifier(spec, reference, channel, args.rounds, args.shots or 2280,
                          _noise(args), derive_rng(args.seed))
    doc = report.to_dict()
    doc["spec"] = spec.to_dict()
    _emit(doc, args.out, "verdict.json")
    return EXIT_HALT if report.verdict is Verdict.HALT else EXIT_OK


def cmd_budget(args) -> int:
    k = args.k if args.k is not None else len(observable_family(args.family or "complete"))
    params = BudgetParams(args.delta, args.epsilon, args.C, k, args.B, args.eta,
                          ReferenceMode(args.mode))
    total = shot_budget(params)
    doc = {"gamma": detection_margin(args.delta, args.C, args.epsilon),
           "N_raw": raw_shot_budget(params), "N": total,
           "n_O": per_observable_shots(total, k), "k": k, "mode": params.mode.value}
    _emit(doc, args.out, "budget.json")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    fps = [Fingerprint.from_dict(json.loads(p.read_text(encoding="utf-8")))
           for p in args.fingerprints]
    interval = calibrate_tolerance(fps, args.delta_min, args.C)
    _emit(interval.to_dict(), args.out, "calibration.json")
    return EXIT_OK


def cmd_framebound(args) -> int:
    family = observable_family(args.family or "complete")
    res = frame_bound_numeric(family, restarts=args.restarts, rng=derive_rng(args.seed))
    doc = res.to_dict()
    doc["family"] = [o.label for o in family]
    if args.family in (None, "complete"):
        doc["analytic"] = frame_bound_analytic_local(2)
    _emit(doc, args.out, "framebound.json")
    return EXIT_OK


_FLAG_TO_FIELD = {"seed": "seed", "shots": "shots", "exact": "exact", "channel": "channel",
                  "noise_lambda": "noise_lambda", "noise_readout": "noise_readout"}


def cmd_experiment(args) -> int:
    base = ExperimentConfig.load(args.config).to_dict() if args.config else {}
    base["experiment"] = args.name
    for flag, key in _FLAG_TO_FIELD.items():
        val = getattr(args, flag)
        if val is not None and val is not False:
            base[key] = val
    if args.family is not None:
        base["families"] = [args.family]
    if args.trials is not None:
        base["trials"] = args.trials
    if args.out is not None:
        base["out"] = str(args.out)
    cfg = ExperimentConfig.from_dict(base).validate()
    artifact = run_experiment(cfg)
    out = Path(cfg.out) if cfg.out else None
    if out is not None:
        for path in emit_report(artifact, out):
            print(path, file=sys.stderr)
    for name, table in artifact.tables.items():
        print(f"# {name}")
        print(",".join(table.columns))
        for row in table.rows:
            print(",".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in row))
    return EXIT_OK


def _floats(n: int):
    def parse(text: str) -> tuple[float, ...]:
        vals = tuple(float(v) for v in text.split(","))
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return vals
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcontract", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    def channel_args(p):
        p.add_argument("--xi", type=_floats(2), default=(0.4, 1.2))
        p.add_argument("--xj", type=_floats(2), default=(1.1, 0.3))
        p.add_argument("--drift-alpha", type=_floats(2), default=(0.0, 0.0))
        p.add_argument("--drift-beta", type=_floats(2), default=(0.0, 0.0))

    p = sub.add_parser("fingerprint", parents=[common], help="fingerprint one channel")
    channel_args(p)
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("verify", parents=[common], help="streaming verifier against the honest reference")
    channel_args(p)
    p.add_argument("--epsilon", type=float, default=0.15)
    p.add_argument("--rounds", type=int, default=50)
    p.add_argument("--reference", type=Path, default=None, help="reference fingerprint JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("budget", parents=[common], help="detection margin and shot budget")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.15)
    p.add_argument("--C", type=float, default=math.sqrt(3.0))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--mode", choices=[m.value for m in ReferenceMode], default="precomputed")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("calibrate", parents=[common], help="tolerance interval from timepoint fingerprints")
    p.add_argument("fingerprints", nargs="+", type=Path)
    p.add_argument("--delta-min", type=float, default=0.5)
    p.add_argument("--C", type=float, default=math.sqrt(3.0))
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("framebound", parents=[common], help="numeric frame-bound constant")
    p.add_argument("--restarts", type=int, default=200)
    p.set_defaults(func=cmd_framebound)

    p = sub.add_parser("experiment", parents=[common], help="run a desk-scale experiment")
    p.add_argument("name", choices=["detection", "sample", "drift"])
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    # NonPositiveMargin, ConfigError and DriftTargetUnreachable are ValueErrors too
    except (NonPositiveMargin, ConfigError, DriftTargetUnreachable, ValueError, KeyError,
            OSError) as exc:
        print(f"qcontract: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
