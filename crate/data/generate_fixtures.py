#!/usr/bin/env python3
"""Writes synthetic stand-ins for the five regression benchmarks.

Each file has the same number of input variables and instances as the
corresponding public benchmark (airfoil self-noise, concrete compressive
strength, protein plasma binding, concrete slump, yacht hydrodynamics) and
feature ranges resembling the originals. The targets are noisy nonlinear
functions of the inputs, so the files exercise every code path of the
ensemble without redistributing the original data. Replace them with the
real CSVs (target in the last column, one header row) to run on the
original data.

Output is deterministic: python3 data/generate_fixtures.py
"""

from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent


def write(name, header, x, y):
    path = HERE / f"{name}.csv"
    with path.open("w") as f:
        f.write(",".join(header) + "\n")
        for row, t in zip(x, y):
            f.write(",".join(f"{v:.6g}" for v in row) + f",{t:.6g}\n")
    print(f"{path.name}: {x.shape[0]} rows, {x.shape[1]} features")


def airfoil(rng):
    n = 1502
    freqs = np.array([200, 250, 315, 400, 500, 630, 800, 1000, 1250, 1600, 2000,
                      2500, 3150, 4000, 5000, 6300, 8000, 10000, 12500, 16000, 20000])
    f = rng.choice(freqs, n)
    angle = np.round(rng.uniform(0.0, 22.2, n), 1)
    chord = rng.choice([0.0254, 0.0508, 0.1016, 0.1524, 0.2286, 0.3048], n)
    velocity = rng.choice([31.7, 39.6, 55.5, 71.3], n)
    thickness = np.exp(rng.uniform(np.log(0.0004), np.log(0.058), n))
    y = (130.0 - 7.5 * (np.log10(f) - 3.1) ** 2 - 0.22 * angle - 30.0 * chord
         + 0.09 * velocity - 150.0 * thickness + rng.normal(0.0, 2.0, n))
    x = np.column_stack([f, angle, chord, velocity, thickness])
    write("airfoil", ["frequency", "angle", "chord", "velocity", "thickness", "sound_pressure"], x, y)


def concrete(rng):
    n = 1029
    cement = rng.uniform(100, 540, n)
    slag = np.where(rng.random(n) < 0.5, 0.0, rng.uniform(0, 360, n))
    ash = np.where(rng.random(n) < 0.55, 0.0, rng.uniform(0, 200, n))
    water = rng.uniform(120, 250, n)
    sp = np.where(rng.random(n) < 0.35, 0.0, rng.uniform(0, 32, n))
    coarse = rng.uniform(800, 1150, n)
    fine = rng.uniform(590, 990, n)
    age = rng.choice([1, 3, 7, 14, 28, 56, 90, 180, 365], n)
    binder = cement + 0.7 * slag + 0.4 * ash
    y = 28.0 * (binder / water) ** 0.9 * np.log1p(age) / np.log(29.0) + 0.25 * sp - 8.0
    y = np.clip(y + rng.normal(0.0, 4.0, n), 2.0, 83.0)
    x = np.column_stack([cement, slag, ash, water, sp, coarse, fine, age])
    write("concrete", ["cement", "slag", "ash", "water", "superplasticizer",
                       "coarse", "fine", "age", "strength"], x, y)


def ppb(rng):
    n, p = 131, 626
    x = rng.normal(0.0, 1.0, (n, p))
    x[:, : p // 2] = np.abs(x[:, : p // 2])
    w = np.zeros(p)
    active = rng.choice(p, 12, replace=False)
    w[active] = rng.normal(0.0, 8.0, 12)
    y = 60.0 + x @ w + 3.0 * x[:, active[0]] * x[:, active[1]] + rng.normal(0.0, 10.0, n)
    y = np.clip(y, 0.5, 99.9)
    write("ppb", [f"d{i}" for i in range(p)] + ["binding"], x, y)


def slump(rng):
    n = 102
    cement = rng.uniform(137, 374, n)
    slag = rng.uniform(0, 193, n)
    ash = rng.uniform(0, 260, n)
    water = rng.uniform(160, 240, n)
    sp = rng.uniform(4.4, 19, n)
    coarse = rng.uniform(708, 1050, n)
    fine = rng.uniform(640, 903, n)
    slump_cm = rng.uniform(0, 29, n)
    flow = np.clip(20.0 + 2.0 * slump_cm + rng.normal(0, 5, n), 20, 78)
    y = 0.06 * cement + 0.02 * slag + 0.03 * ash - 0.05 * water + 0.1 * sp + 18.0 + rng.normal(0, 2.5, n)
    x = np.column_stack([cement, slag, ash, water, sp, coarse, fine, slump_cm, flow])
    write("slump", ["cement", "slag", "ash", "water", "sp", "coarse", "fine",
                    "slump", "flow", "strength"], x, y)


def yacht(rng):
    n = 307
    lcb = np.round(rng.uniform(-5.0, 0.0, n), 1)
    pc = np.round(rng.uniform(0.53, 0.6, n), 3)
    ld = np.round(rng.uniform(4.34, 5.14, n), 2)
    bd = np.round(rng.uniform(2.81, 5.35, n), 2)
    lb = np.round(rng.uniform(2.73, 3.64, n), 2)
    fr = rng.choice(np.round(np.arange(0.125, 0.4501, 0.025), 3), n)
    base = 55.0 * np.exp(18.0 * (fr - 0.45))
    y = base * (1.0 + 3.0 * (pc - 0.565)) * (1.0 + 0.05 * (bd - 4.0)) * np.exp(rng.normal(0.0, 0.05, n))
    x = np.column_stack([lcb, pc, ld, bd, lb, fr])
    write("yacht", ["lcb", "prismatic", "length_displacement", "beam_draught",
                    "length_beam", "froude", "resistance"], x, y)


def main():
    rng = np.random.default_rng(20170613)
    airfoil(rng)
    concrete(rng)
    ppb(rng)
    slump(rng)
    yacht(rng)


if __name__ == "__main__":
    main()
