"""
ESN Pruning Experiment CLI Script
=================================

Command-line interface for generating datasets, running centrality-based
reservoir pruning experiments, plotting pruning curves and dumping node
centrality scores.

Exit codes: 0 success, 1 configuration/validation error, 2 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path

# Add src directory to path for imports
script_dir = Path(__file__).parent
project_root = script_dir.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from config_manager import Config, ConfigError
from experiment_runner import ExperimentConfig, cmd_centrality, cmd_generate, cmd_run, curve_files
from svg_plot import plot_curves

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def setup_logging(level: str = "INFO", fmt: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'):
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=fmt, force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Echo State Network reservoir pruning experiments',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Write a 10,000-sample Mackey-Glass series to output/mackey_glass.csv
  python scripts/esn_experiment.py generate

  # Synthetic load surrogate with a fixed seed
  python scripts/esn_experiment.py generate --set dataset.kind=synth-load --set dataset.n_samples=5000 --set dataset.seed=1

  # Full pruning experiment from a config file
  python scripts/esn_experiment.py run --config config/config_template.json

  # Quick run: one size, one measure, two seeds
  python scripts/esn_experiment.py run --set experiment.reservoir_sizes=[200] --set experiment.measures=[\\"C2\\"] --set experiment.n_reps=2

  # Plot the curves of a finished run
  python scripts/esn_experiment.py plot output --output output/figures/prune_curves.svg

  # Centrality scores of a generated reservoir
  python scripts/esn_experiment.py centrality --size 200 --seed 42 --output output/scores.csv
        """
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='Path to configuration file (default: built-in defaults)')
    common.add_argument(
        '--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
        help='Override a configuration value, e.g. pruning.max_prune_fraction=0.3 (repeatable)'
    )
    common.add_argument('--output-dir', type=str, help='Output directory (overrides config and ESN_OUTPUT_DIR)')
    common.add_argument('--env-file', type=str, help='Path to .env file (default: auto-detect)')
    common.add_argument('--verbose', '-v', action='store_true', help='Enable debug logging')

    subparsers = parser.add_subparsers(dest='command', required=True, help='Command to run')

    gen = subparsers.add_parser('generate', parents=[common], help='Write the configured dataset to CSV')
    gen.add_argument('--output', type=str, help='CSV path (default: <output_dir>/<dataset>.csv)')

    subparsers.add_parser('run', parents=[common], help='Run the prune/retrain/evaluate experiment')

    plot = subparsers.add_parser('plot', parents=[common], help='Plot pruning curves as SVG')
    plot.add_argument('curves', nargs='+', help='Curve CSV files or run directories')
    plot.add_argument('--output', type=str, help='SVG path (default: <output_dir>/figures/prune_curves.svg)')

    cen = subparsers.add_parser('centrality', parents=[common], help='Dump node centrality scores')
    cen.add_argument('--reservoir', type=str, help='Serialized reservoir JSON (default: generate one)')
    cen.add_argument('--size', type=int, help='Reservoir size when generating')
    cen.add_argument('--seed', type=int, help='Seed when generating')
    cen.add_argument('--save-reservoir', type=str, help='Also save the generated reservoir to this path')
    cen.add_argument('--output', type=str, help='Score CSV path (default: <output_dir>/centrality.csv)')

    return parser


def load_config(args) -> Config:
    """Config file, then --set overrides, then --output-dir"""
    config = Config(config_path=args.config, env_file=args.env_file)
    for assignment in args.overrides:
        config.apply_override(assignment)
    if args.output_dir:
        config.set('paths.output_dir', args.output_dir)
    return config


def _plot_inputs(items):
    paths = []
    for item in items:
        item = Path(item)
        if item.is_dir():
            found = curve_files(item)
            if not found:
                raise ValueError(f"No curve CSV files in directory {item}")
            paths.extend(found)
        else:
            paths.append(item)
    return paths


def main(argv=None) -> int:
    """Main CLI function"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging('DEBUG' if args.verbose else 'INFO')

    # Errors up to here abort before any replica starts
    try:
        config = load_config(args)
        setup_logging(
            'DEBUG' if args.verbose else config.get('logging.level', 'INFO'),
            config.get('logging.format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s'),
        )
        ecfg = ExperimentConfig.from_config(config)
    except (ConfigError, ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    try:
        if args.command == 'generate':
            path, info = cmd_generate(ecfg, Path(args.output) if args.output else None)
            print(f"Dataset: {info['name']}")
            print(f"Length: {info['length']}")
            print(f"Min/Max: {info['min']:.6f} / {info['max']:.6f}")
            for name, (start, stop) in info['splits'].items():
                print(f"  {name}: [{start}, {stop})")
            print(f"Saved to: {path}")
            return EXIT_OK

        if args.command == 'plot':
            output = Path(args.output) if args.output else ecfg.output_dir / 'figures' / 'prune_curves.svg'
            path = plot_curves(_plot_inputs(args.curves), output)
            print(f"Plot saved to: {path}")
            return EXIT_OK

        if args.command == 'centrality':
            output = Path(args.output) if args.output else ecfg.output_dir / 'centrality.csv'
            path = cmd_centrality(
                ecfg,
                output,
                reservoir_path=Path(args.reservoir) if args.reservoir else None,
                size=args.size,
                seed=args.seed,
                save_path=Path(args.save_reservoir) if args.save_reservoir else None,
            )
            print(f"Centrality scores saved to: {path}")
            return EXIT_OK

        result = cmd_run(ecfg)
        print(f"Replicas: {len(result.results)} ({result.n_failed} failed)")
        print(f"Results saved to: {result.output_dir}")
        return EXIT_RUNTIME if result.n_failed else EXIT_OK

    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Validation error: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"Error running {args.command}: {e}", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
