"""Generate data/synthetic_nhanes.csv: 200 NHANES-shaped rows for tests.

Values are drawn to roughly match the marginal ranges of the 2017-18 adult
extract; DXDTOPF is the bundled DSGE model plus noise, clipped to the
observed range. Not real survey data.
"""
import csv
import pathlib

import numpy as np

ROWS = 200
OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic_nhanes.csv"


def main() -> None:
    rng = np.random.default_rng(20171)
    male = rng.integers(0, 2, ROWS)
    age = rng.integers(18, 60, ROWS)
    height = np.clip(rng.normal(160.5 + 13.5 * male, 6.8), 138.3, 190.2)
    weight = np.clip(rng.normal(0.9 * height - 70.0, 17.0), 36.2, 176.5)
    waist = np.clip(0.55 * weight + rng.normal(52.0, 8.0, ROWS), 56.4, 154.9)
    hip = np.clip(0.45 * weight + rng.normal(68.5 - 3.0 * male, 6.0), 77.8, 168.5)
    leg = np.clip(0.24 * height + rng.normal(0.0, 2.4, ROWS), 26.0, 50.0)
    arml = np.clip(0.22 * height + rng.normal(0.4, 1.6, ROWS), 29.6, 45.5)
    armc = np.clip(0.2 * weight + rng.normal(17.2, 2.8, ROWS), 20.7, 52.7)

    fat = (
        31 * hip / 100
        + 9 * height * waist / 100000
        - 1387 * height / (130 * waist)
        - waist * weight**2 * male / 540000
        + 48 * male / 5
        + height * waist / (arml * weight)
    )
    fat = np.clip(fat + rng.normal(0.0, 3.0, ROWS), 12.1, 56.1)

    with OUT.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["SEQN", "RIAGENDR", "RIDAGEYR", "RIDEXPRG", "BMXWT", "BMXHT", "BMXLEG",
                    "BMXARML", "BMXARMC", "BMXWAIST", "BMXHIP", "DXDTOPF"])
        for i in range(ROWS):
            w.writerow([93703 + i, int(male[i]), int(age[i]), 0,
                        f"{weight[i]:.1f}", f"{height[i]:.1f}", f"{leg[i]:.1f}", f"{arml[i]:.1f}",
                        f"{armc[i]:.1f}", f"{waist[i]:.1f}", f"{hip[i]:.1f}", f"{fat[i]:.1f}"])


if __name__ == "__main__":
    main()
