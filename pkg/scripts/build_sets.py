"""Regenerate the bundled O_inf / S_inf files through the CLI."""
import os
import sys
from pathlib import Path

from setguard.cli import main

DATA = Path(__file__).resolve().parents[1] / "src" / "setguard" / "data"

if __name__ == "__main__":
    # relative paths keep the bundled manifests machine-independent
    os.chdir(DATA)
    code = main(["sets", "compute", "--model", "cart_model.ini", "--input-constraint", "--out", "sets/oinf.poly"])
    if code == 0:
        code = main(["sets", "attenuate", "--model", "cart_model.ini", "--umax", "12",
                     "--oinf", "sets/oinf.poly", "--out", "sets/sinf.poly"])
    sys.exit(code)
