"""A single point sampled from one direction: the extension to the opposite
side of the circle is off by exactly twice the angular distance.

    python3 demos/tight_bound.py
"""
import numpy as np

from phtkan.bounds import check_directionwise
from phtkan.geometry import DirectionSet, angle_direction
from phtkan.shapes import point_shape
from phtkan.spacetime import SampleGrid


def main():
    grid = SampleGrid(DirectionSet([[1.0, 0.0]]), [-np.pi, -np.pi / 2, 0.0])
    for angle in np.linspace(0, -np.pi / 2, 5):
        r = check_directionwise(point_shape(0, 1), grid, angle_direction(angle), 0)
        print(f"w at {angle / np.pi:+.3f}pi  {r}")


if __name__ == "__main__":
    main()
