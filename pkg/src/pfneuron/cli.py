"""Command-line experiment runner.

Exit codes: 0 success, 1 configuration error, 2 numeric/simulation error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, load_config
from .experiments import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_IO = 3


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def run(
    config_path,
    out_dir,
    seed: int | None = None,
    workers: int | None = None,
    quiet: bool = False,
) -> int:
    """Run one experiment; returns the process exit code."""
    if seed is not None and seed < 0:
        return _fail(EXIT_CONFIG, "--seed must be >= 0")
    if workers is not None and workers < 1:
        return _fail(EXIT_CONFIG, "--workers must be >= 1")
    try:
        cfg = load_config(config_path)
    except (OSError, UnicodeDecodeError) as e:
        return _fail(EXIT_IO, f"cannot read config: {e}")
    except ConfigError as e:
        return _fail(EXIT_CONFIG, str(e))
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    try:
        run_experiment(cfg, out_dir, workers=workers, quiet=quiet)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, str(e))
    except OSError as e:
        return _fail(EXIT_IO, str(e))
    except Exception as e:
        return _fail(EXIT_NUMERIC, f"{type(e).__name__}: {e}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pfneuron",
        description="Run a configured device/neuron experiment and write its data files.",
    )
    parser.add_argument("--config", required=True, help="key=value experiment config file")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's rng seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="sweep worker processes (default: CPU count)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    args = parser.parse_args(argv)
    return run(args.config, args.out, seed=args.seed,
               workers=args.workers, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
