#!/usr/bin/env python3
"""
Jump Statistics App
Launcher for the command line in src/cli:

    python jump_stats_app.py stats --chain xx --L 2 --gamma 1 --order 2
    python jump_stats_app.py patterns --chain xx --L 2 --mode exact --seed 1
    python jump_stats_app.py cluster --chain xy --L 3 --gamma 1 --kappa 1/2 --nc 12,32 --seed 1
"""
import os
import sys

script_dir = os.path.dirname(os.path.abspath(__file__))
if script_dir not in sys.path:
    sys.path.insert(0, script_dir)

from dotenv import load_dotenv

load_dotenv()

from src.cli.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
