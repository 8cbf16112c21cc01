"""
Jump-statistics command line

    python -m src.cli stats --chain xx --L 2 --gamma 1 --order 2
    python -m src.cli patterns --chain xx --L 3 --mode exact --seed 1

Exit codes: 0 success, 2 configuration error, 3 numeric error,
4 enumeration cap exceeded.
"""
import argparse
import sys
from typing import Dict, List, Optional

from src.cli.commands import COMMANDS
from src.config.analysis_config import MAX_THREADS
from src.config.run_config import RunConfig
from src.models.errors import EnumerationCapError, JumpStatsError, NumericError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CAP = 4

# flag name -> key in the model section
_MODEL_FLAGS = {"chain": "chain", "L": "L", "gamma": "gamma", "kappa": "kappa", "hopping": "hopping"}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run-config file")
    common.add_argument("--chain", choices=["xx", "xy"], help="Built-in chain model")
    common.add_argument("--L", type=int, help="Number of sites")
    common.add_argument("--gamma", help="Injection/extraction rate (rational in exact mode, e.g. 1/2)")
    common.add_argument("--kappa", help="Pairing strength (xy chains)")
    common.add_argument("--hopping", help="Hopping amplitude J")
    common.add_argument("--mode", choices=["exact", "float"], help="Scalar field (default float)")
    common.add_argument("--seed", type=int, help="Master seed of stochastic commands")
    common.add_argument("--threads", type=int, help=f"Worker bound (default JUMPPAT_THREADS or {MAX_THREADS})")
    common.add_argument("--output-dir", dest="output_dir", help="Directory for result files")
    common.add_argument("--initial", help="Initial state: 'pi' or an occupation string such as 110")
    common.add_argument("--profile", choices=["fast", "balanced", "full"], help="Workload profile")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="jump-stats",
        description="Jump-channel statistics of monitored open quantum systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    stats = sub.add_parser("stats", parents=[common], help="Distributions, two-point laws and mutual information")
    stats.add_argument("--order", type=int, help="Largest N of the full distribution (default 2)")
    stats.add_argument("--mi-max", dest="mi_max", type=int, help="Largest N of the MI sweep (default 10)")

    simulate = sub.add_parser("simulate", parents=[common], help="Seeded post-jump trajectories")
    simulate.add_argument("--steps", type=int, help="Kept jumps per trajectory (default 1000)")
    simulate.add_argument("--trajectories", type=int, help="Number of trajectories (default 1)")
    simulate.add_argument("--burn-in", dest="burn_in", type=int, help="Discarded leading jumps")
    simulate.add_argument("--dump-states", dest="dump_states", action="store_true", default=None,
                          help="Also write the post-jump states as JSON")

    patterns = sub.add_parser("patterns", parents=[common], help="Renewal / closed / recurring / open classification")
    patterns.add_argument("--steps", type=int, help="Steps per detection trajectory")
    patterns.add_argument("--trajectories", type=int, help="Detection trajectories")
    patterns.add_argument("--max-states", dest="max_states", type=int, help="Closure state budget")
    patterns.add_argument("--approximate", action="store_true", default=None,
                          help="Float trajectories with trace-distance state matching")
    patterns.add_argument("--tol-match", dest="tol_match", type=float, help="Trace-distance tolerance")

    cluster = sub.add_parser("cluster", parents=[common], help="Future-signature clustering")
    cluster.add_argument("--nc", help="Comma-separated cluster counts, e.g. 12,32")
    cluster.add_argument("--samples", type=int, help="Post-burn-in states (default 2000)")
    cluster.add_argument("--burn-in", dest="burn_in", type=int, help="Discarded leading jumps")
    cluster.add_argument("--horizon", type=int, help="Signature horizon n (default 6)")
    cluster.add_argument("--metric", choices=["probability", "trace"], help="Distance backend")

    likelihood = sub.add_parser("likelihood", parents=[common], help="Rank candidate models on a symbol string")
    likelihood.add_argument("string", nargs="?", help="Observed symbol string, e.g. EIIEEIEIEEIIEIE")
    likelihood.add_argument("--candidates", help="Comma-separated chain:L list, e.g. xx:2,xx:3")

    info = sub.add_parser("info", parents=[common], help="Process summary")
    info.add_argument("--eigenvalues", type=int, help="Number of leading eigenvalues to print")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    model = {key: getattr(args, flag) for flag, key in _MODEL_FLAGS.items() if getattr(args, flag) is not None}
    return RunConfig(
        config_path=args.config,
        model=model or None,
        mode=args.mode,
        seed=args.seed,
        threads=args.threads,
        output_dir=args.output_dir,
    )


def command_params(args: argparse.Namespace) -> Dict:
    skip = {"command", "config", "mode", "seed", "threads", "output_dir", *_MODEL_FLAGS}
    return {key: value for key, value in vars(args).items() if key not in skip}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        COMMANDS[args.command](config, command_params(args))
    except EnumerationCapError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_CAP
    except NumericError as e:
        print(f"❌ Numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except JumpStatsError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as e:
        # malformed input that slipped past validation (numpy/scipy conversions)
        print(f"❌ Invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
