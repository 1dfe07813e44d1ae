"""Command-line front end.

    sdpi compute  --channel bsc.json --divergence kl
    sdpi bounds   --channel bsc.json
    sdpi envelope --channel bsc.json --output-format csv
    sdpi verify   --channel bsc.json --samples 100000 --seed 7
    sdpi post     --channel bsc.json

Reports go to stdout, logs to stderr.  Exit status: 0 success, 1 usage
error, 2 invalid input, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass
from typing import Optional

from sdpi import __version__
from sdpi.contraction import eta_f, sandwich_bounds, trace_envelope
from sdpi.divergence import DivergenceKind
from sdpi.model import parse_channel
from sdpi.oracle import verify_reduction
from sdpi.post_sdpi import post_eta

log = logging.getLogger("sdpi")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3
SUBCOMMANDS = ("compute", "bounds", "envelope", "verify", "post")


@dataclass
class RunConfig:
    subcommand: str
    channel_path: str
    kind: str = "kl"
    tol: float = 1e-6
    samples: int = 100_000
    seed: int = 0
    window_max: float = 4.0
    normalize: bool = False
    output_format: str = "json"
    threads: str = "1"
    starts: int = 8

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        DivergenceKind.parse(self.kind)
        if not self.tol > 0:
            raise ValueError("--tol must be positive")
        if self.samples < 1:
            raise ValueError("--samples must be >= 1")
        if not self.window_max > 0:
            raise ValueError("--window-max must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("--seed must be a 64-bit unsigned integer")
        if self.threads != "auto" and int(self.threads) < 1:
            raise ValueError("--threads must be >= 1 or 'auto'")
        if self.output_format not in ("json", "csv"):
            raise ValueError("--output-format must be json or csv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdpi", description="Contraction coefficients of finite channels.")
    parser.add_argument("--version", action="version", version=f"sdpi {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--channel", "--channel-path", "--channel_path", dest="channel_path",
                       required=True, help="channel JSON file")
        p.add_argument("--divergence", "--kind", dest="kind", default="kl",
                       type=str.lower, choices=[k.value for k in DivergenceKind])
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--window-max", "--window_max", dest="window_max", type=float, default=4.0)
        p.add_argument("--normalize", action="store_true", help="divide each row by its sum")
        p.add_argument("--output-format", "--output_format", "--format", dest="output_format",
                       choices=["json", "csv"], default="json")
        p.add_argument("--threads", default="1", help="thread count or 'auto'")
        p.add_argument("--starts", type=int, default=8, help="random starts per cell (post)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _dumps(obj) -> str:
    # repr-based float output round-trips exactly
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False)


def _csv(vertices) -> str:
    lines = ["d_in,d_out"]
    lines += [f"{x:.17g},{y:.17g}" for x, y in vertices]
    return "\n".join(lines)


def execute(cfg: RunConfig) -> tuple[int, str]:
    """Run one configured workflow; returns ``(exit_status, report_text)``."""
    with open(cfg.channel_path, encoding="utf-8") as fh:
        channel = parse_channel(fh.read(), normalize=cfg.normalize)
    kind = DivergenceKind.parse(cfg.kind)
    header = {"tool": "sdpi", "version": __version__, "config": asdict(cfg),
              "channel": {"name": channel.name, "input_size": channel.input_size,
                          "output_size": channel.output_size}}
    status = EXIT_OK
    if cfg.subcommand == "compute":
        result = eta_f(channel, kind, cfg.tol, threads=cfg.threads).to_dict()
    elif cfg.subcommand == "bounds":
        lo, up_g, up_d = sandwich_bounds(channel)
        result = {"lower": lo, "upper_g": up_g, "upper_diam": up_d}
    elif cfg.subcommand == "envelope":
        curve = trace_envelope(channel, kind, cfg.window_max)
        if cfg.output_format == "csv":
            log.info("config: %s", json.dumps(header))
            return status, _csv(curve.vertices.tolist())
        result = curve.to_dict()
    elif cfg.subcommand == "verify":
        report = verify_reduction(channel, kind, cfg.samples, cfg.seed, threads=cfg.threads,
                                  tol=cfg.tol)
        result = report.to_dict()
        if report.violations > 0:
            status = EXIT_VERIFY
    else:
        result = post_eta(channel, tol=cfg.tol, starts=cfg.starts, seed=cfg.seed,
                          threads=cfg.threads).to_dict()
    if cfg.output_format == "csv" and cfg.subcommand != "envelope":
        log.warning("csv output is only defined for envelope; writing json")
    return status, _dumps({**header, **result})


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        verbose = vars(args).pop("verbose")
        cfg = RunConfig(**vars(args))
        cfg.validate()
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sdpi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"sdpi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    try:
        status, text = execute(cfg)
    except (ValueError, OSError) as exc:
        print(f"sdpi: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        log.removeHandler(handler)
    sys.stdout.write(text + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
