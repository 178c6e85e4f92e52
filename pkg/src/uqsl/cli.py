"""Command-line front end.

    uqsl list-scenarios
    uqsl validate-config --config run.ini [--override KEY=VALUE ...]
    uqsl run --config run.ini [--out DIR] [--threads N] [--override KEY=VALUE ...] [--strict]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, load_config
from .errors import ConfigError, UQSLError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

DESCRIPTIONS = {
    "phase_diagram": "sign regions of f_alpha(rho)^(mu-1) - 1 over seeded random states",
    "amplitude_damping": "qubit under amplitude damping: tau_qsl (closed form), delta, kappa_min",
    "pt_qubit": "PT-symmetric qubit varpi sigma_x + i eta sigma_z for each eta/varpi",
    "xxz": "reduced dynamics of one end of an open XXZ chain for each L",
    "custom_channel": "user Kraus channel from a module:function factory",
    "custom_nonhermitian": "user non-Hermitian generator given as a literal matrix",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqsl", description="Entropic quantum speed limits for nonunitary dynamics."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-scenarios", help="print the available scenarios")

    def add_common(p):
        p.add_argument("--config", required=True, help="path to a key-value config file")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a dotted config key (repeatable)",
        )

    v = sub.add_parser("validate-config", help="parse and check a config without running it")
    add_common(v)

    r = sub.add_parser("run", help="run a scenario and write CSVs plus a manifest")
    add_common(r)
    r.add_argument("--out", help="output directory (default: output.dir from the config)")
    r.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    r.add_argument(
        "--strict", action="store_true", help="fail with exit code 3 if kappa_min hits the floor"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list-scenarios":
        for name in SCENARIOS:
            print(f"{name:20s} {DESCRIPTIONS[name]}")
        return EXIT_OK

    try:
        cfg = load_config(args.config, args.override)
        if args.command == "validate-config":
            print(f"ok: scenario {cfg.scenario}, {len(cfg.alphas)}x{len(cfg.mus)} entropy grid, "
                  f"{cfg.n_points} time points")
            return EXIT_OK
        if args.strict:
            cfg.strict = True
        if args.threads < 1:
            raise ConfigError(f"--threads: must be at least 1, got {args.threads}")
        # imported here so that list-scenarios and validate-config stay light
        from .scenarios import run_scenario

        result = run_scenario(cfg, args.out, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UQSLError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    for path in result.files:
        print(path)
    print(result.manifest)
    if result.any_loose:
        print("note: some rows carry flag_loose=1 (kappa_min reached the floor)", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
