"""Command-line entry point: ``wbarray {manifold,design,scf,corr,psl}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import correlation, persist
from .design import design_operator
from .errors import ConfigError, WbArrayError
from .manifold import PathParams, steering_grid, synthesize_channel, uniform_angle_grid

log = logging.getLogger("wbarray")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 2, 3, 4


class UsageError(WbArrayError):
    pass


def _angle(text: str) -> float:
    try:
        return persist._parse_float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _load_config(args):
    if args.config is None:
        raise UsageError("--config is required")
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cfg = persist.parse_config(path)
    if args.seed is not None:
        cfg = replace(cfg, design=replace(cfg.design, seed=args.seed))
    return cfg


def cmd_manifold(args) -> int:
    cfg = _load_config(args)
    n = args.angles if args.angles is not None else cfg.n_angles
    grid = steering_grid(cfg.manifold(args.band), uniform_angle_grid(n))
    persist.write_steering_grid(args.out, grid, cfg, args.band)
    log.info("wrote steering grid %s to %s", grid.tensor.shape, args.out)
    return EXIT_OK


def cmd_design(args) -> int:
    cfg = _load_config(args)
    design_cfg = cfg.design
    if args.batches is not None:
        design_cfg = replace(design_cfg, batches=args.batches)
    checkpoint = Path(str(args.out) + ".ckpt")

    def sink(record, phi):
        k, held, batch = record
        log.info("iteration %d/%d  heldout %.6g  batch %.6g", k, design_cfg.batches, held, batch)
        persist.write_tensor(checkpoint, phi)

    op, history = design_operator(cfg.manifold("low"), cfg.manifold("high"), design_cfg, sink)
    persist.write_tensor(args.out, op.phi)
    if args.log is not None:
        persist.write_training_log(args.log, history)
    log.info("initial heldout error %.6g", history.initial_heldout_error)
    return EXIT_OK


def _maybe_operator(path):
    return None if path is None else persist.read_tensor(path)


def cmd_scf(args) -> int:
    grid, _ = persist.read_steering_grid(args.manifold)
    phi = _maybe_operator(args.operator)
    normalize = not args.raw
    if phi is None:
        map_ = correlation.scf(grid, normalize=normalize)
    else:
        map_ = correlation.effective_scf(grid, phi, normalize=normalize)
    persist.write_map_csv(args.out, map_)
    return EXIT_OK


def cmd_corr(args) -> int:
    grid, manifold = persist.read_steering_grid(args.manifold)
    phi = _maybe_operator(args.operator)
    theta = math.radians(args.theta_deg) if args.theta_deg is not None else args.theta
    clean = synthesize_channel(manifold, [PathParams(args.gamma, theta, args.tau)])
    if math.isinf(args.snr_db):
        x = clean
    else:
        power = float(np.mean(np.abs(clean) ** 2))
        noise = power / 10 ** (args.snr_db / 10)
        x = synthesize_channel(
            manifold,
            [PathParams(args.gamma, theta, args.tau)],
            noise_variance=noise,
            seed=args.seed if args.seed is not None else 0,
        )
    if phi is None:
        map_ = correlation.correlation_function(x, grid, tau=args.tau)
    else:
        map_ = correlation.correlation_function_with_operator(x, phi, grid, tau=args.tau)
    persist.write_map_csv(args.out, map_)
    return EXIT_OK


def cmd_psl(args) -> int:
    map_ = persist.read_map_csv(args.input)
    level = correlation.peak_sidelobe_level(map_, math.radians(args.halfwidth_deg))
    print(f"{level:.4f}")
    return EXIT_OK


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--seed", type=int, default=default(None), help="override the configured seed")
    flags.add_argument("--config", default=default(None), help="run configuration file")
    flags.add_argument("--threads", type=int, default=default(1), help="BLAS thread cap (default 1)")
    flags.add_argument("--quiet", action="store_true", default=default(False), help="progress off")
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wbarray", parents=[_global_flags(False)], description=__doc__)
    # Globals may also follow the subcommand; suppressed defaults keep the
    # subparser from clobbering values given before it.
    common = _global_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("manifold", parents=[common], help="write a steering grid")
    p.add_argument("--out", required=True)
    p.add_argument("--band", choices=("low", "high"), default="low")
    p.add_argument("--angles", type=int, default=None, help="grid size (default from config)")
    p.set_defaults(func=cmd_manifold)

    p = sub.add_parser("design", parents=[common], help="design the operator")
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None, help="training log CSV")
    p.add_argument("--batches", type=int, default=None, help="override K")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("scf", parents=[common], help="spatial correlation map CSV")
    p.add_argument("--manifold", required=True)
    p.add_argument("--operator", default=None)
    p.add_argument("--raw", action="store_true", help="skip unit-diagonal normalization")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scf)

    p = sub.add_parser("corr", parents=[common], help="correlation function CSV")
    p.add_argument("--manifold", required=True)
    p.add_argument("--operator", default=None)
    p.add_argument("--theta", type=_angle, default=math.pi / 4, help="source azimuth, radians")
    p.add_argument("--theta-deg", type=float, default=None, help="source azimuth, degrees")
    p.add_argument("--tau", type=float, default=0.3, help="normalized delay in (0, 1]")
    p.add_argument("--gamma", type=complex, default=1.0)
    p.add_argument("--snr-db", type=float, default=math.inf)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("psl", parents=[common], help="peak side-lobe level of a map CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--halfwidth-deg", type=float, default=5.0)
    p.set_defaults(func=cmd_psl)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"wbarray: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WbArrayError as exc:
        print(f"wbarray: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"wbarray: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
