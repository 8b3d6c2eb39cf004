"""Pump x cavity-frequency intensity maps in both gauges, plus the two
dipole-gauge parameter sets (stronger coupling, lower loss) that do show
bistability."""
import time

from _common import parser, save_map
from usc_laser import SystemParams
from usc_laser.sweeps import Axis, MapSpec, map_pump_cavity

CASES = [("coulomb", SystemParams(), "coulomb"),
         ("dipole", SystemParams(), "dipole"),
         ("dipole_g0.4", SystemParams(g_tilde=0.4), "dipole"),
         ("dipole_kappa0.001", SystemParams(kappa=0.001), "dipole")]


def main():
    ap = parser(__doc__.splitlines()[0], "results/pump_cavity")
    ap.add_argument("--rows", type=int, default=81)
    ap.add_argument("--pumps", type=int, default=101)
    args = ap.parse_args()
    for name, p, gauge in CASES:
        t = time.time()
        spec = MapSpec(Axis("wc", 0.05, 2.05, args.rows), Axis("z_pump", 0.0, 0.5, args.pumps),
                       template=p, gauge=gauge)
        res = map_pump_cavity(spec)
        save_map(res, args.out, f"map_{name}", f"{name}: |a1|^2 by increasing pump")
        rows = res.bistable_rows()
        span = f"[{min(rows):.3f}, {max(rows):.3f}]" if rows else "none"
        print(f"{name:18s} bistable rows {span} ({len(rows)}) in {time.time() - t:.1f} s")


if __name__ == "__main__":
    main()
