#!/usr/bin/env python3
"""Write the benchmark datasets as plain numeric CSV files under data/.

Each output has a header row and the label in the last column. Values are
copied verbatim; scaling happens in the loader.

Sources:
  boston.csv         MASS::Boston (506 rows, 13 features, target medv)
  pima.csv           MASS::Pima.te followed by MASS::Pima.tr (532 complete rows)
  breast_cancer.csv  scikit-learn's copy of the Wisconsin diagnostic data

The MASS tables are read from the CSV exports shipped with the `pydataset`
package, or from a directory given with --mass-dir.
"""

import argparse
import csv
import os
import sys


def mass_dir_default():
    try:
        import pydataset  # noqa: F401
    except ImportError:
        return None
    base = os.path.dirname(sys.modules["pydataset"].__file__)
    return os.path.join(base, "resources", "rdata", "csv", "MASS")


def read_r_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header = rows[0][1:]
    return header, [r[1:] for r in rows[1:]]


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{path}: {len(rows)} rows, {len(header) - 1} features")


def boston(mass, out):
    header, rows = read_r_csv(os.path.join(mass, "Boston.csv"))
    write(os.path.join(out, "boston.csv"), header, rows)


def pima(mass, out):
    rows = []
    for name in ("Pima.te.csv", "Pima.tr.csv"):
        header, part = read_r_csv(os.path.join(mass, name))
        rows.extend(part)
    label = {"Yes": "1", "No": "0"}
    header = header[:-1] + ["diabetes"]
    write(os.path.join(out, "pima.csv"), header, [r[:-1] + [label[r[-1]]] for r in rows])


def breast_cancer(out):
    from sklearn.datasets import load_breast_cancer

    bunch = load_breast_cancer()
    header = [n.replace(" ", "_") for n in bunch.feature_names] + ["benign"]
    rows = [[repr(float(v)) for v in x] + [str(int(y))] for x, y in zip(bunch.data, bunch.target)]
    write(os.path.join(out, "breast_cancer.csv"), header, rows)


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--mass-dir", default=mass_dir_default())
    p.add_argument("--out", default=os.path.join(here, "..", "data"))
    args = p.parse_args()
    if args.mass_dir is None:
        sys.exit("MASS csv directory not found; install pydataset or pass --mass-dir")
    os.makedirs(args.out, exist_ok=True)
    boston(args.mass_dir, args.out)
    pima(args.mass_dir, args.out)
    breast_cancer(args.out)


if __name__ == "__main__":
    main()
