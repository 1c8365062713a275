#!/usr/bin/env python3
"""
FormLab - Main Entry Point
Form inequalities of symmetric contraction semigroups on finite measure spaces.

    python formlab.py validate docs/sample_data/e1.json
    python formlab.py verify --seed 0
"""

from src.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
