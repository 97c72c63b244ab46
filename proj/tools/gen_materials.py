#!/usr/bin/env python3
"""Write data/materials.json and the index fixture used by the unit tests.

GaN follows a two-pole Sellmeier law (UV electronic pole plus IR lattice
pole). Al(x)Ga(1-x)N reuses the GaN poles with the constant term shifted by

    dA(x) = a * x + b * x**2,

where a and b are fixed by the two calibration anchors below. The anchors were
tuned so that the shipped Bragg stack reproduces its target design
(core 582 nm, cladding 293/517 nm, grating period 2.77 um); see README.md.

Usage: gen_materials.py [--data-dir DIR]
"""

import argparse
import json
import math
from pathlib import Path

GAN = {"A": 3.214563, "B1": 2.104094, "C1_um": 0.2605841, "B2": 1.297096, "C2_um": 17.86}

# Offsets of the constant term at the two cladding compositions.
ANCHORS = {0.02: -0.02388147, 0.45: -1.378747}

VALID_RANGE_NM = [400.0, 2500.0]
D33_PM_PER_V = 16.5
ALLOYS = [0.02, 0.20, 0.45]

FIXTURE_WAVELENGTHS_NM = [400.0, 532.0, 793.0, 800.0, 806.0, 1064.0, 1310.0, 1550.0,
                          1653.3333333333333, 2000.0, 2500.0]


def composition_law():
    (x1, y1), (x2, y2) = sorted(ANCHORS.items())
    # Solve a*x + b*x^2 = y at both anchors.
    det = x1 * x2 * x2 - x2 * x1 * x1
    a = (y1 * x2 * x2 - y2 * x1 * x1) / det
    b = (x1 * y2 - x2 * y1) / det
    return a, b


def params_for(x):
    a, b = composition_law()
    p = dict(GAN)
    p["A"] = GAN["A"] + a * x + b * x * x
    return p


def index(params, lambda_nm):
    lam2 = (lambda_nm * 1e-3) ** 2
    n2 = params["A"]
    for k in (1, 2):
        n2 += params[f"B{k}"] * lam2 / (lam2 - params[f"C{k}_um"] ** 2)
    return math.sqrt(n2)


def materials():
    out = [{
        "name": "GaN",
        "al_fraction": 0.0,
        "dispersion_params": dict(GAN),
        "valid_range_nm": VALID_RANGE_NM,
        "d33_pm_per_V": D33_PM_PER_V,
    }]
    for x in ALLOYS:
        out.append({
            "name": f"AlGaN_x{x:.2f}",
            "al_fraction": x,
            "dispersion_params": params_for(x),
            "valid_range_nm": VALID_RANGE_NM,
            "d33_pm_per_V": 0.0,
        })
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", type=Path,
                        default=Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()

    mats = materials()
    args.data_dir.mkdir(parents=True, exist_ok=True)
    with open(args.data_dir / "materials.json", "w") as f:
        json.dump({"schema": "brwspdc-materials/1", "materials": mats}, f, indent=2)
        f.write("\n")

    fixture = {
        "note": "Indices evaluated by tools/gen_materials.py, independent of the C++ code.",
        "samples": [
            {"material": m["name"], "lambda_nm": lam,
             "n": float(f"{index(m['dispersion_params'], lam):.12f}")}
            for m in mats for lam in FIXTURE_WAVELENGTHS_NM
        ],
    }
    (args.data_dir / "fixtures").mkdir(exist_ok=True)
    with open(args.data_dir / "fixtures" / "material_indices.json", "w") as f:
        json.dump(fixture, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
