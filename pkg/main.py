#!/usr/bin/env python3
"""
fluxfit - fluxonium qubit characterization.

Usage:
    # Simulate a spectrum
    python main.py simulate --ec 1.0 --el 1.0 --ej 4.0 --out spec.csv

    # Full pipeline from a measured map
    python main.py characterize --map map.csv --model tuned.fxnn --bias-zero 0 --bias-pi 1

    # Any subcommand with debug logging
    python main.py --debug fit --points labeled.csv --guess 1.3,0.7,7.0
"""

import sys

from fluxfit.cli import main

if __name__ == "__main__":
    sys.exit(main())
