#!/usr/bin/env python3
"""
Generate the sample operator and function files in docs/sample_data
- e1.json: the swap E_1 on the two-point space
- row_sum_1_1.json: symmetric, row sums 1.1 (not Dunford-Schwartz)
- markov_chain.json: a reversible Markov chain on three points
- general.json: a complex symmetric contraction, with general_functions.json
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.file_formats import dump_operator, functions_to_dict  # noqa: E402
from src.operators import KernelOperator, classify, e_lambda  # noqa: E402
from src.reports import to_json  # noqa: E402
from src.space import CFunction, make_space  # noqa: E402

OUT_DIR = Path(__file__).resolve().parent.parent / "docs" / "sample_data"


def build_samples():
    """Operators keyed by file name, plus the probe function for general.json"""
    pair = make_space([1.0, 1.0])
    chain = make_space([0.25, 0.25, 0.5])
    uniform = make_space([1.0, 1.0, 1.0])
    samples = {
        "e1.json": e_lambda(1.0),
        "row_sum_1_1.json": KernelOperator(pair, np.array([[0.6, 0.5], [0.5, 0.6]], dtype=complex)),
        "markov_chain.json": KernelOperator(chain, np.array(
            [[0.5, 0.2, 0.3], [0.2, 0.5, 0.3], [0.15, 0.15, 0.7]], dtype=complex)),
        "general.json": KernelOperator(uniform, np.array(
            [[0.2, 0.3 + 0.1j, 0.0], [0.3 - 0.1j, 0.0, 0.4j], [0.0, -0.4j, 0.5]], dtype=complex)),
    }
    functions = [CFunction(uniform, [1.0, 1j, -0.5 + 0.25j])]
    return samples, functions


def main():
    print("🧮 Sample Operator Generator")
    print("=" * 50)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    samples, functions = build_samples()

    for name, T in samples.items():
        dump_operator(T, OUT_DIR / name)
        found = classify(T)
        print(f"✅ {name}: n={T.n} symmetric={found.symmetric} dunford_schwartz={found.dunford_schwartz} "
              f"markovian={found.markovian}")

    (OUT_DIR / "general_functions.json").write_text(to_json(functions_to_dict(functions)) + "\n", encoding="utf-8")
    print(f"✅ general_functions.json: {len(functions)} function(s)")
    print(f"📊 Wrote {len(samples) + 1} files to {OUT_DIR}")


if __name__ == "__main__":
    main()
