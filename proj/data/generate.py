"""Regenerates the sample CSVs in this directory (fixed seeds)."""

import numpy as np


def write(path, rows, header):
    with open(path, "w") as f:
        f.write(header + "\n")
        for r in rows:
            f.write(",".join(repr(float(v)) for v in np.atleast_1d(r)) + "\n")


if __name__ == "__main__":
    write("uniform_10000.csv", np.random.default_rng(4).uniform(0.0, 1.0, 10000), "x")
    write("failing_region_samples.csv", np.random.default_rng(8).uniform(0.0, 1.0, 500), "x")
    write("near_boundary_samples.csv", np.random.default_rng(6).uniform(0.0, 1.0, 500), "x")
