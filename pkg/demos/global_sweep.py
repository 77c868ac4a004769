"""Per-direction error of the left extension around the whole circle,
against twice the distance to the nearest sample. Writes sweep.csv.

    python3 demos/global_sweep.py [net size]
"""
import csv
import sys

import numpy as np

from phtkan.bounds import directionwise_distance, nearest_distance
from phtkan.geometry import generate_net
from phtkan.kan import default_query_grid, sample_pht
from phtkan.shapes import disk_mesh
from phtkan.spacetime import SampleGrid


def main(size=6):
    grid = SampleGrid(generate_net(size), np.linspace(-np.pi, 0, 49))
    diagram = sample_pht(disk_mesh(64), grid, 0)
    query = default_query_grid(grid.params)
    tests = generate_net(120, offset=0.01)
    rows = []
    for w in tests:
        angle = float(np.arctan2(w[1], w[0]))
        rows.append((angle, directionwise_distance(diagram, w, query), 2 * nearest_distance(grid, w)))
    with open("sweep.csv", "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["direction_angle", "measured", "bound"])
        out.writerows(rows)
    worst = max(rows, key=lambda r: r[1])
    print(f"{len(rows)} directions, worst error {worst[1]:.4f} at angle {worst[0]:.4f} (bound there {worst[2]:.4f})")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 6)
