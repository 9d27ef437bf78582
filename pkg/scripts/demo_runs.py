"""Write traces and set outlines for the two bundled demonstration runs into ``out/demo``."""
import argparse
from pathlib import Path

from setguard.cli import main
from setguard.scenario import BUNDLED_DIR

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/demo")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("fig3_top", "fig3_bottom"):
        main(["simulate", "--scenario", str(BUNDLED_DIR / "scenarios" / f"{name}.ini"),
              "--trace", str(out / f"{name}.csv"), "--emit-sets"])
