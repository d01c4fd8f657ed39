#!/usr/bin/env python3
"""Write <name>.raw files for `pnn_chm fetch` from locally installed packages.

For machines without access to the UCI archive. Each raw file reproduces the
layout of the upstream source listed in data/registry.json, so the regular
fetch conversion and validation run unchanged afterwards:

    python3 tools/stage_offline_datasets.py data
    pnn_chm fetch --dir data

Sources: scikit-learn bundled copies (iris, cancer, wine), keel-ds (pima,
vehicle, monks as MONK-2) and imbalanced-databases (glass).
"""

import argparse
import pathlib
import sys


def keel_rows(name):
    import keel_ds

    path = pathlib.Path(keel_ds.__file__).parent / "data" / "balanced" / "raw" / f"{name}.dat"
    rows = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([t.strip() for t in line.split(",")])
    return rows


def sklearn_rows(loader):
    bunch = loader()
    return [[repr(float(v)) for v in x] + [str(int(y))] for x, y in zip(bunch.data, bunch.target)]


def stage_iris():
    from sklearn.datasets import load_iris

    names = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
    rows = sklearn_rows(load_iris)
    return "".join(",".join(r[:-1] + [names[int(r[-1])]]) + "\n" for r in rows)


def stage_cancer():
    from sklearn.datasets import load_breast_cancer

    # upstream layout: id, diagnosis, 30 features; sklearn codes malignant as 0
    rows = sklearn_rows(load_breast_cancer)
    out = []
    for i, r in enumerate(rows):
        label = "M" if r[-1] == "0" else "B"
        out.append(",".join([str(i + 1), label] + r[:-1]) + "\n")
    return "".join(out)


def stage_wine():
    from sklearn.datasets import load_wine

    rows = sklearn_rows(load_wine)
    return "".join(",".join([str(int(r[-1]) + 1)] + r[:-1]) + "\n" for r in rows)


def stage_pima():
    return "".join(",".join(r) + "\n" for r in keel_rows("pima"))


def stage_vehicle():
    return "".join(" ".join(r) + " \n" for r in keel_rows("vehicle"))


def stage_monks():
    # upstream layout: class, a1..a6, id
    out = []
    for i, r in enumerate(keel_rows("monk-2")):
        out.append(" " + " ".join([r[-1]] + r[:-1] + [f"data_{i + 1}"]) + "\n")
    return "".join(out)


def stage_glass():
    import imbalanced_databases

    path = (pathlib.Path(imbalanced_databases.__file__).parent / "data" / "glass"
            / "glass.data.txt")
    return path.read_text()


STAGERS = {
    "iris": stage_iris,
    "cancer": stage_cancer,
    "wine": stage_wine,
    "pima": stage_pima,
    "vehicle": stage_vehicle,
    "monks": stage_monks,
    "glass": stage_glass,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("dir", type=pathlib.Path)
    parser.add_argument("--only", nargs="*", default=sorted(STAGERS))
    args = parser.parse_args()
    args.dir.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in args.only:
        try:
            text = STAGERS[name]()
        except Exception as exc:  # missing optional package
            print(f"{name}: skipped ({exc})", file=sys.stderr)
            failed += 1
            continue
        (args.dir / f"{name}.raw").write_text(text)
        print(f"{name}: wrote {name}.raw", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
