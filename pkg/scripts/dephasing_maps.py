"""Coupling x dephasing-ratio map of the largest |a1|^2 over the cavity
frequency, with the total dephasing rate held at 0.15."""
import numpy as np

from _common import parser, save_map
from usc_laser.sweeps import RATIO_AXIS, Axis, MapSpec, map_dephasing_coupling


def main():
    ap = parser(__doc__.splitlines()[0], "results/dephasing")
    ap.add_argument("--n", type=int, default=41, help="points per axis")
    ap.add_argument("--wc-points", type=int, default=40)
    ap.add_argument("--pumps", type=int, default=51)
    args = ap.parse_args()
    wc_grid = tuple(np.linspace(2.0, 0.05, args.wc_points))
    for gauge in ("coulomb", "dipole"):
        spec = MapSpec(Axis("g_tilde", 0.05, 0.45, args.n), Axis(RATIO_AXIS, 0.0, 0.95, args.n),
                       gauge=gauge, wc_grid=wc_grid, pump_points=args.pumps)
        res = map_dephasing_coupling(spec)
        save_map(res, args.out, f"dephasing_{gauge}", f"{gauge}: max |a1|^2 over wc")
        print(f"{gauge}: max |a1|^2 per ratio at top coupling:",
              np.round(np.fmax(res.field("a1_sq_up"), res.field("a1_sq_down"))[-1], 3))


if __name__ == "__main__":
    main()
