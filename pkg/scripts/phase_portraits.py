"""Arrow plots of the IR flow for the bulk, near-boundary and AdS systems.

Each portrait is written as <name>.csv (the field table) and <name>.svg into
--out.  Axes are arctan-compactified as in the usual stream plots.
"""

import argparse
from pathlib import Path

from rgflow.cli import field_csv, field_svg
from rgflow.flow import GridSpec, sample_vector_field
from rgflow.models import ModelSpec

PORTRAITS = {
    "bulk": ModelSpec.bulk(),
    "dirichlet_full_z1": ModelSpec.half_minkowski("dirichlet", "full", 1.0),
    "dirichlet_minimal_z1e-5": ModelSpec.half_minkowski("dirichlet", "minimal", 1e-5),
    "neumann_minimal_z0.5": ModelSpec.half_minkowski("neumann", "minimal", 0.5),
    "ads_conformal": ModelSpec.ads(),
    "ads_xi0": ModelSpec.ads(0.0),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/portraits", type=Path)
    ap.add_argument("-n", type=int, default=25)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    grid = GridSpec((-1.5, 1.5), (-1.5, 1.5), n=args.n, compactified=True)
    for name, model in PORTRAITS.items():
        table = sample_vector_field(model, grid, workers=args.workers)
        (args.out / f"{name}.csv").write_text(field_csv(table))
        (args.out / f"{name}.svg").write_text(field_svg(table))
        print(f"{name:<26} {int((~table.mask).sum()):>4} arrows, {int(table.mask.sum()):>4} masked")


if __name__ == "__main__":
    main()
