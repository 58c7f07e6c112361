"""Run every experiment with its defaults and collect outputs in one directory.

    python scripts/run_all.py [out_dir]
"""
import sys
from pathlib import Path

from contactmech.cli import main

EXPERIMENTS = ["oscillator", "particle2d", "rigidbody", "convergence", "equilibria"]

if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    codes = {}
    for name in EXPERIMENTS:
        print(f"== {name}")
        codes[name] = main([name, "--out", str(out)])
    print()
    for name, code in codes.items():
        print(f"{name:<12s} {'ok' if code == 0 else f'exit {code}'}")
    sys.exit(max(codes.values()))
