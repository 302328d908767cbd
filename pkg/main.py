"""Sparse Oblique Forest - Command-Line Entry Point.

Trains sparse oblique random forests that pick, per tree node, between
exact sort-based and histogram-based split finding.

Features:
- Load CSV, libsvm and Excel datasets
- Startup calibration of the exact/histogram breakeven
- Parallel, seed-deterministic forest training
- Versioned model files and batch prediction
- Depth, phase and mode benchmark tables

Usage:
    python main.py gen-data --samples 1000 --features 10 --seed 7 --out trunk.csv
    python main.py train --data trunk.csv --trees 10 --mode dynamic --seed 1 --out m.bin
    python main.py predict --model m.bin --data trunk.csv --out predictions.csv
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from cli.commands import main


if __name__ == "__main__":
    sys.exit(main())
