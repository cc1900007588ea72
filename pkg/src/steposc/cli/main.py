"""``steposc`` command line."""
from __future__ import annotations

import argparse
import contextlib
import copy
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import ConfigError, ConvergenceError, IngestionError, StepOscError
from . import commands, presets
from .config import _merge, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_INGESTION = 4

log = logging.getLogger("steposc")


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, IngestionError):
        return EXIT_INGESTION
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(exc, (ConfigError, StepOscError)):
        return EXIT_CONFIG
    return 1


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="YAML experiment configuration")
    p.add_argument("--out", metavar="DIR", help="output directory (output.dir)")
    p.add_argument("--levels", metavar="K", type=int, help="number of levels (solver.levels)")
    p.add_argument("--seed", metavar="N", type=int, help="random seed")
    p.add_argument("--threads", metavar="N", type=int, help="worker processes / BLAS threads")
    p.add_argument("--preset", metavar="NAME", help="start from the settings of a named preset")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steposc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("classical", "integrate a trajectory with impacts"),
                        ("spectrum", "finite-difference eigenvalues and eigenvectors"),
                        ("mixing", "P/T mixing curves under a linear field")):
        _common(sub.add_parser(name, help=help_))
    p = sub.add_parser("stats", help="spacing statistics of stored spectra")
    _common(p)
    p.add_argument("--input", action="append", default=[], metavar="PATH",
                   help="spectrum bundle directory or CSV (repeatable)")
    p.add_argument("--synthetic", choices=("uniform", "poisson", "semi-poisson", "goe-wigner"),
                   help="self-test on a generated level sequence")
    p = sub.add_parser("concentration", help="concentration census of stored eigenvectors")
    _common(p)
    p.add_argument("--input", metavar="DIR", help="spectrum bundle directory")
    p = sub.add_parser("preset", help="run every step of a named preset")
    _common(p)
    p.add_argument("name", help=f"one of: {', '.join(sorted(presets.PRESETS))}")
    return ap


def _cli_overrides(args) -> dict:
    o: dict = {}
    if args.out is not None:
        o["output"] = {"dir": args.out}
    if args.levels is not None:
        o["solver"] = {"levels": args.levels}
    if args.seed is not None:
        o["seed"] = args.seed
    if args.threads is not None:
        o["threads"] = args.threads
    return o


def _preset_base(name: Optional[str], command: str) -> dict:
    """Overrides of the first step of preset ``name`` that runs ``command``."""
    if not name:
        return {}
    for st in presets.get(name):
        if st.command == command:
            return copy.deepcopy(st.overrides)
    raise ConfigError(f"preset: {name!r} has no {command} step")


def make_config(args, base: Optional[dict] = None) -> dict:
    """Defaults, then preset ``base``, then ``--config``, then command-line flags."""
    cfg = load_config(args.config, base)
    return load_config(None, _merge(cfg, _cli_overrides(args)))


def _thread_limit(n: int):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # optional
        return contextlib.nullcontext()
    return threadpool_limits(limits=n)


def _run(args) -> Path:
    if args.command == "preset":
        return run_preset(args)
    cfg = make_config(args, _preset_base(args.preset, args.command))
    with _thread_limit(cfg["threads"]):
        if args.command == "stats":
            return commands.cmd_stats(cfg, args.input, args.synthetic)
        if args.command == "concentration":
            return commands.cmd_concentration(cfg, args.input)
        return commands.COMMANDS[args.command](cfg)


def run_preset(args) -> Path:
    name = args.name or args.preset
    steps = presets.get(name)
    top = None
    for st in steps:
        cfg = make_config(args, st.overrides)
        root = Path(cfg["output"]["dir"])
        top = root
        cfg["output"]["dir"] = str(root / st.subdir)
        log.info("preset %s: %s -> %s", name, st.command, cfg["output"]["dir"])
        with _thread_limit(cfg["threads"]):
            if st.command == "stats":
                commands.cmd_stats(cfg, [str(root / st.input_step)])
            elif st.command == "concentration":
                commands.cmd_concentration(cfg, str(root / st.input_step))
            else:
                commands.COMMANDS[st.command](cfg)
    return top


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = _run(args)
    except Exception as exc:  # mapped to documented exit codes
        code = exit_code(exc)
        if code == 1:
            raise
        print(f"steposc: error: {exc}", file=sys.stderr)
        got = getattr(exc, "eigenvalues", None)
        if isinstance(exc, ConvergenceError) and got is not None and len(got):
            print(f"steposc: {len(got)} eigenpairs converged before the failure",
                  file=sys.stderr)
        return code
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
