"""Coupling x loss map: highest bistable cavity frequency at pump 1/2 and
the population Z0 there, in both gauges."""
import numpy as np

from _common import parser, save_map
from usc_laser.sweeps import Axis, MapSpec, map_coupling_loss


def main():
    ap = parser(__doc__.splitlines()[0], "results/coupling_loss")
    ap.add_argument("--n", type=int, default=41, help="points per axis")
    ap.add_argument("--wc-points", type=int, default=96)
    ap.add_argument("--pumps", type=int, default=101)
    args = ap.parse_args()
    wc_grid = tuple(np.linspace(1.0, 0.05, args.wc_points))
    for gauge in ("coulomb", "dipole"):
        spec = MapSpec(Axis("g_tilde", 0.05, 0.45, args.n), Axis("kappa", 0.001, 0.05, args.n),
                       gauge=gauge, wc_grid=wc_grid, pump_points=args.pumps)
        res = map_coupling_loss(spec)
        save_map(res, args.out, f"coupling_loss_{gauge}", f"{gauge}: Z0 at the bistable ceiling")
        n_bi = sum(c.bistable for row in res.cells for c in row)
        print(f"{gauge}: {n_bi} of {args.n * args.n} cells bistable")


if __name__ == "__main__":
    main()
