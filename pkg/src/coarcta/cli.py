"""Command-line front end.

    coarcta synth    --out run/
    coarcta ingest   --config run.yaml
    coarcta train    --config run.yaml [--models knn,voting]
    coarcta evaluate --config run.yaml
    coarcta bcgen    --config run.yaml [--bc-mode transient]
    coarcta oracle   --config run.yaml
    coarcta report   --config run.yaml
    coarcta all      --config run.yaml   (every step in order)

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
"""
import argparse
import logging
import sys

from coarcta import pipeline
from coarcta.config import config_from_dict, load_config
from coarcta.errors import CoarctaError, ConfigError, DataError, NumericError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("coarcta")


def build_parser():
    parser = argparse.ArgumentParser(prog="coarcta", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=pipeline.COMMANDS + ("all",))
    parser.add_argument("--config", help="YAML pipeline config")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="split / model / synthesis seed (overrides config)")
    parser.add_argument("--models", help="comma-separated model names (train/evaluate roster, bcgen selection)")
    parser.add_argument("--bc-mode", choices=("snapshot", "transient"))
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args):
    if args.config:
        config = load_config(args.config)
        data = config.to_dict()
    elif args.out:
        data = {"traces_dir": f"{args.out}/traces", "output_dir": args.out}
    else:
        raise ConfigError("either --config or --out is required")
    if args.out:
        data["output_dir"] = args.out
    if args.seed is not None:
        data["seed"] = args.seed
    if args.bc_mode:
        data["bc_mode"] = args.bc_mode
    return config_from_dict(data)


def run_command(command, config, models=None):
    """Run one pipeline step; returns the list of files written."""
    if command == "synth":
        return pipeline.run_synth(config)
    if command == "ingest":
        return pipeline.run_ingest(config)
    if command == "train":
        return pipeline.run_train(config, models)
    if command == "evaluate":
        return pipeline.run_evaluate(config, models)
    if command == "bcgen":
        return pipeline.run_bcgen(config, models)
    if command == "oracle":
        return pipeline.run_oracle(config)
    if command == "report":
        return pipeline.run_report(config)
    if command == "all":
        written = []
        for step in pipeline.COMMANDS:
            if step == "synth":
                continue
            written += run_command(step, config, models if step in ("train", "evaluate") else None)
        return written
    raise ConfigError(f"unknown command {command!r}")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    models = [m.strip() for m in args.models.split(",") if m.strip()] if args.models else None
    try:
        config = resolve_config(args)
        written = run_command(args.command, config, models)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, CoarctaError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
