"""Sample the transform of a disk at six directions and extend it to a
direction between two samples with all three Kan extensions.

    python3 demos/disk_extensions.py
"""
import numpy as np

from phtkan.barcodes import bottleneck, decompose
from phtkan.geometry import angle_direction, generate_net
from phtkan.homology import direction_barcode
from phtkan.kan import FLAVORS, extend_module, sample_pht
from phtkan.shapes import disk_mesh
from phtkan.spacetime import SampleGrid


def in_pi(x):
    return f"{x / np.pi:+.3f}pi"


def show(name, bc):
    bars = ", ".join(f"[{in_pi(b.birth)}, {in_pi(b.death)}{']' if b.cap else ')'}" for b in bc)
    print(f"{name:>7}: {bars or '(none)'}")


def main():
    disk = disk_mesh(64)
    grid = SampleGrid(generate_net(6), np.linspace(-np.pi, 0, 97))
    diagram = sample_pht(disk, grid, 0)
    # halfway between the samples at pi/3 and 2pi/3
    w = angle_direction(np.pi / 2)
    truth = direction_barcode(disk, w, 0, grid.params)
    show("true", truth)
    for flavor in FLAVORS:
        bc = decompose(extend_module(w, grid.params, diagram, flavor))
        show(flavor, bc)
        print(f"{'':>9}distance to truth: {bottleneck(truth, bc, capped=False) / np.pi:.3f}pi (cap bars as finite)")


if __name__ == "__main__":
    main()
