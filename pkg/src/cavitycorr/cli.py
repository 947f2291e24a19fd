"""Command-line scenario runner.

Exit status: 0 all validations within tolerance, 1 bad configuration,
2 a validation exceeded its tolerance, 3 a numerical error aborted a run.
"""
import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import CavityCorrError, ConfigError
from .scenario import PRESET_NAMES, load_config, make_config, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="cavitycorr",
        description="Exact dynamics of a cavity mode coupled to a coupled-resonator waveguide, "
                    "with correlated initial states.",
    )
    p.add_argument("--preset", action="append", metavar="NAME",
                   help=f"figure preset ({', '.join(PRESET_NAMES)} or 'all'); repeatable")
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--out", type=Path, help="output directory (one subdirectory per preset in a batch)")
    p.add_argument("--dt", type=float, help="time step in units of 1/omega0")
    p.add_argument("--tmax", type=float, help="final time in units of 1/omega0")
    p.add_argument("--eta", type=float, help="coupling ratio lambda/lambda0")
    p.add_argument("--no-oracle", action="store_true", help="skip the finite-chain oracle")
    p.add_argument("--no-fock", action="store_true", help="skip the Fock-space master-equation check")
    p.add_argument("--seed-check", action="store_true", help="run the acceptance suite and exit")
    p.add_argument("--jobs", type=int, default=1, help="presets to run in parallel")
    return p


def _overrides(args):
    values = {}
    if args.dt is not None:
        values["dt"] = args.dt
    if args.tmax is not None:
        values["t_max"] = args.tmax
    if args.eta is not None:
        values["eta"] = args.eta
    if args.no_oracle:
        values["run_oracle"] = False
    if args.no_fock:
        values["run_fock"] = False
    return values


def _configs(args):
    overrides = _overrides(args)
    names = []
    for item in args.preset or []:
        names.extend(PRESET_NAMES if item == "all" else [item])
    if args.config is not None:
        if names:
            raise ConfigError("--config and --preset are mutually exclusive")
        cfg = load_config(args.config, overrides)
        out = args.out or Path(cfg.out)
        return [(cfg, out)]
    if not names:
        raise ConfigError("nothing to run: give --preset or --config")
    batch = len(names) > 1
    base = args.out or Path("out")
    configs = []
    for name in names:
        cfg = make_config({"preset": name, **overrides})
        configs.append((cfg, base / name if batch else base))
    return configs


def _run_one(item):
    cfg, out = item
    try:
        result = run_scenario(cfg, out)
    except (CavityCorrError, ArithmeticError, ValueError) as exc:
        return cfg.preset, EXIT_NUMERICAL, f"numerical error: {exc}"
    failed = [c.name for c in result.checks if not c.passed]
    if failed:
        return cfg.preset, EXIT_VALIDATION, f"{len(failed)} breach(es): {', '.join(failed)}; see {out}/report.txt"
    return cfg.preset, EXIT_OK, f"all checks passed; outputs in {out}"


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed_check:
        from .acceptance import run_acceptance

        results = run_acceptance(stream=sys.stdout)
        return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION
    try:
        items = _configs(args)
    except ConfigError as exc:
        print(f"cavitycorr: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_run_one, items))
    else:
        outcomes = [_run_one(item) for item in items]
    status = EXIT_OK
    for name, code, message in outcomes:
        print(f"{name}: {message}")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
