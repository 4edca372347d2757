"""Map the certified region of the (beta, velocity scale) plane.

Starting from the certified fig2 digraph data, we vary the weight
exponent beta and rescale the initial velocities, then ask two separate
questions at every grid point: does the certificate guarantee flocking,
and does the simulated run actually flock?  The certificate is sufficient
but far from necessary, so the simulated flocking region is much larger
than the certified one -- but no certified point may fail to flock.
"""
import sys

import numpy as np

from delayflock import preset, sweep


def main(out_path: str | None = None):
    template = preset("fig2-digraph").replace(t_end=15.0, dt=0.02,
                                              flock_tol=1e-10)
    betas = list(np.linspace(0.1, 0.6, 6))
    scales = list(np.geomspace(1e-2, 1e2, 9))
    axes = {"beta": betas, "scale": scales}
    reports = sweep(template, axes,
                    out_path=out_path)

    print("rows: beta, columns: velocity scale "
          "(G = certified+flocks, f = flocks only, . = neither)\n")
    header = "beta\\scale " + " ".join(f"{s:7.2g}" for s in scales)
    print(header)
    it = iter(reports)
    unsound = 0
    for b in betas:
        cells = []
        for _ in scales:
            rep = next(it)
            cert = rep.certificate is not None and rep.certificate.guaranteed
            final_ratio = rep.final_spread / max(
                float(rep.diameter_series.spread[0]), 1e-300)
            flocks = final_ratio < 1e-2
            if cert and not flocks:
                unsound += 1
            cells.append("   G   " if cert else ("   f   " if flocks
                                                 else "   .   "))
        print(f"{b:10.3g} " + " ".join(cells))
    print(f"\ncertified points that failed to flock: {unsound} "
          "(must be zero; the condition is sufficient)")
    if out_path:
        print(f"full table written to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
