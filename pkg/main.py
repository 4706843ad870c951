import argparse
import logging
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))
# components live under src/ as <component>.src.* packages

from config import HdxgeoConfig
from experiments.src.config import Config
from experiments.src.settings import ConfigError, load_config
from experiments.src.tools import run
from utils.logger_config import setup_logger

# Configure logging
logger = setup_logger("hdxgeo")


def build_epilog():
    lines = ["experiments and the CSV files they write:"]
    for info in Config.EXPERIMENTS["experiments"]:
        lines.append(f"  {info['name']}: {info['description']}")
        for filename, columns in info["columns"].items():
            lines.append(f"      {filename}: {', '.join(columns)}")
    lines.append("")
    lines.append("every run also writes manifest.json and timings.json; samples.npz when raw_samples is true.")
    lines.append(f"exit codes: {HdxgeoConfig.EXIT_OK} all checks passed, {HdxgeoConfig.EXIT_CHECK_FAILED} "
                 f"some check failed, {HdxgeoConfig.EXIT_ERROR} execution or configuration error.")
    lines.append(f"environment overrides: {HdxgeoConfig.ENV_PREFIX}<PARAM>, {HdxgeoConfig.ENV_PREFIX}MASTER_SEED, "
                 f"{HdxgeoConfig.ENV_PREFIX}OUTPUT_DIR, {HdxgeoConfig.ENV_PREFIX}WORKERS, "
                 f"{HdxgeoConfig.ENV_PREFIX}LOG_LEVEL.")
    return "\n".join(lines)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hdxgeo",
        description="Random geometric graphs and complexes on the sphere: simulation and verification runs.",
        epilog=build_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", choices=Config.experiment_names())
    parser.add_argument("--config", help="JSON file with one flat object of parameters")
    parser.add_argument("--seed", type=int, help="64-bit master seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="worker threads for independent trials")
    parser.add_argument("--version", action="version", version=HdxgeoConfig.CODE_VERSION)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.getLogger().setLevel(logger.level)
    try:
        config = load_config(args.experiment, config_path=args.config, seed=args.seed, out=args.out,
                             workers=args.workers)
    except ConfigError as e:
        logging.critical("Invalid configuration: %s", str(e))
        return HdxgeoConfig.EXIT_ERROR

    manifest = run(config)
    if manifest.error:
        logging.critical("Run failed: %s", manifest.error)
    logger.info("%s finished with status %s; results in %s", config.experiment, manifest.status, config.output_dir)
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
