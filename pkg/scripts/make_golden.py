"""Regenerate the golden roots shipped with the package.

Run only after a deliberate solver change; the file is a regression anchor.
"""
import json
from pathlib import Path

from usc_laser.model import SystemParams
from usc_laser.verify import generate_golden

CASES = [(SystemParams(wc=wc, z_pump=z), g)
         for g in ("coulomb", "dipole")
         for wc in (1.0, 0.25, 0.5, 1.5)
         for z in (0.05, 0.3, 0.5)]

if __name__ == "__main__":
    roots = generate_golden(CASES)
    out = Path(__file__).resolve().parents[1] / "src" / "usc_laser" / "data" / "golden_roots.json"
    out.write_text(json.dumps({"roots": roots}, indent=1) + "\n")
    print(f"wrote {len(roots)} roots to {out}")
