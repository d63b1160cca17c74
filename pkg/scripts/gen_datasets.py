#!/usr/bin/env python3
"""Regenerate the bundled demo ARFF files.

The three datasets mirror the shape of classic UCI benchmarks (diabetes: 768
rows / 8 numeric features / 2 classes; wine: 178 / 13 / 3; vertebral: 310 / 6
/ 3) but the values are synthetic draws from class-conditional distributions,
so the files are freely redistributable and generation is bit-reproducible.

Several diabetes features are deliberately coarse-grained (pressure in 10 mmHg
steps, insulin in 100-unit bands, age in 5-year bins): clinical measurements
cluster on round values, and the low-cardinality marginals give the symbol
granulation realistic saturation behavior as the cluster count grows.

Usage: python scripts/gen_datasets.py [out_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

DIABETES_SEED = 111
VERTEBRAL_SEED = 123
WINE_SEED = 303


def gen_diabetes(out_dir: Path):
    rng = np.random.default_rng(DIABETES_SEED)
    gap = 1.6
    names = ["Preg", "Plas", "Pres", "Skin", "Insu", "Mass", "Pedi", "Age"]
    lines = ["@relation pima_diabetes", ""]
    lines += [f"@attribute {n} numeric" for n in names]
    lines.append("@attribute Class {tested_negative,tested_positive}")
    lines += ["", "@data"]
    classes = ["tested_negative", "tested_positive"]
    for ci, count in [(0, 500), (1, 268)]:
        preg = rng.poisson([2.2, 2.2 + 1.6 * gap][ci], count).clip(0, 6)
        plas = (np.round(rng.normal([112, 112 + 26 * gap][ci], 20, count) / 25) * 25).clip(50, 200)
        pres = (np.round(rng.normal([67, 67 + 13 * gap][ci], 11, count) / 10) * 10).clip(40, 110)
        skin = (np.round(rng.normal([19, 19 + 10 * gap][ci], 8, count) / 10) * 10).clip(0, 50)
        insu = (np.round((rng.gamma(2.2, 55, count) + [0, 90 * gap][ci]) / 100) * 100).clip(0, 600)
        mass = np.round(rng.normal([29.5, 29.5 + 6 * gap][ci], 5.0, count), 1).clip(18.2, 60.0)
        pedi = np.round(rng.gamma(2.3, 0.17, count) + [0.078, 0.078 + 0.18 * gap][ci], 3).clip(0.078, 2.42)
        age = (np.round((21 + rng.gamma([1.9, 2.9][ci], [5.0, 5.0 + gap][ci], count)) / 10) * 10).clip(20, 80)
        for r in zip(preg, plas, pres, skin, insu, mass, pedi, age):
            cells = [str(int(r[0])), str(int(r[1])), str(int(r[2])), str(int(r[3])),
                     str(int(r[4])), f"{r[5]:.1f}", f"{r[6]:.3f}", str(int(r[7]))]
            lines.append(",".join(cells + [classes[ci]]))
    path = out_dir / "diabetes.arff"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def gen_vertebral(out_dir: Path):
    rng = np.random.default_rng(VERTEBRAL_SEED)
    means = {
        "PelvicIncidence": (44.0, 76.0, 56.0),
        "PelvicTilt": (20.0, 28.0, 11.0),
        "LumbarAngle": (31.0, 66.0, 46.0),
        "SacralSlope": (26.0, 54.0, 42.0),
        "PelvicRadius": (108.0, 118.0, 128.0),
        "Spondylolisthesis": (2.0, 64.0, 4.0),
    }
    stds = {"PelvicIncidence": 7.0, "PelvicTilt": 5.0, "LumbarAngle": 9.0,
            "SacralSlope": 7.0, "PelvicRadius": 7.0, "Spondylolisthesis": 11.0}
    order = list(means)
    lines = ["@relation vertebral_column", ""]
    lines += [f"@attribute {n} numeric" for n in order]
    lines.append("@attribute Class {hernia,spondylolisthesis,normal}")
    lines += ["", "@data"]
    classes = ["hernia", "spondylolisthesis", "normal"]
    for ci, count in [(0, 60), (1, 150), (2, 100)]:
        cols = []
        for n in order:
            col = np.round(rng.normal(means[n][ci], stds[n], count) / 2) * 2
            if n == "Spondylolisthesis":
                col = col.clip(-11, 180)
            cols.append(col)
        for row in np.column_stack(cols):
            lines.append(",".join(f"{v:.1f}" for v in row) + "," + classes[ci])
    path = out_dir / "vertebral.arff"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def gen_wine(out_dir: Path):
    rng = np.random.default_rng(WINE_SEED)
    spec = [
        ("Alcohol", (13.9, 12.3, 13.2), 0.52, 2),
        ("MalicAcid", (1.9, 1.9, 3.4), 0.95, 2),
        ("Ash", (2.5, 2.24, 2.44), 0.28, 2),
        ("Alcalinity", (16.5, 20.5, 21.5), 3.0, 1),
        ("Magnesium", (107.0, 93.0, 99.0), 11.0, 0),
        ("TotalPhenols", (2.9, 2.2, 1.6), 0.4, 2),
        ("Flavanoids", (3.0, 2.0, 0.75), 0.44, 2),
        ("NonflavPhenols", (0.28, 0.36, 0.46), 0.1, 2),
        ("Proanthocyanins", (1.95, 1.6, 1.15), 0.48, 2),
        ("ColorIntensity", (5.6, 3.0, 7.5), 1.25, 2),
        ("Hue", (1.07, 1.05, 0.67), 0.12, 2),
        ("OD280", (3.2, 2.8, 1.65), 0.4, 2),
        ("Proline", (1120.0, 510.0, 640.0), 150.0, 0),
    ]
    lines = ["@relation wine", ""]
    lines += [f"@attribute {name} numeric" for name, *_ in spec]
    lines.append("@attribute Class {class_1,class_2,class_3}")
    lines += ["", "@data"]
    classes = ["class_1", "class_2", "class_3"]
    for ci, count in [(0, 59), (1, 71), (2, 48)]:
        cols = [np.round(rng.normal(m[ci], s, count), d) for _, m, s, d in spec]
        for row in np.column_stack(cols):
            cells = [f"{v:.{d}f}" if d else str(int(v))
                     for v, (_, _, _, d) in zip(row, spec)]
            lines.append(",".join(cells) + "," + classes[ci])
    path = out_dir / "wine.arff"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)
    gen_diabetes(out_dir)
    gen_vertebral(out_dir)
    gen_wine(out_dir)


if __name__ == "__main__":
    main()
