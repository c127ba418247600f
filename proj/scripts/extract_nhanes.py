"""Build data/nhanes_2017_2018.csv from the NHANES 2017-18 XPT files.

Usage: python3 scripts/extract_nhanes.py DEMO_J.XPT BMX_J.XPT DXX_J.XPT [out.csv]

Inner-joins the three files on SEQN, keeps the columns the engine uses and
recodes RIAGENDR to 1 = male, 0 = female. Row filtering (age, pregnancy,
missing values) is left to the engine.
"""
import pathlib
import sys

import pandas as pd

DEMO = ["SEQN", "RIAGENDR", "RIDAGEYR", "RIDEXPRG"]
BMX = ["SEQN", "BMXWT", "BMXHT", "BMXLEG", "BMXARML", "BMXARMC", "BMXWAIST", "BMXHIP"]
DXX = ["SEQN", "DXDTOPF"]
DEFAULT_OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "nhanes_2017_2018.csv"


def main() -> int:
    if len(sys.argv) not in (4, 5):
        print(__doc__.strip().splitlines()[2], file=sys.stderr)
        return 1
    demo = pd.read_sas(sys.argv[1], format="xport")[DEMO]
    bmx = pd.read_sas(sys.argv[2], format="xport")[BMX]
    dxx = pd.read_sas(sys.argv[3], format="xport")[DXX]
    out = pathlib.Path(sys.argv[4]) if len(sys.argv) == 5 else DEFAULT_OUT

    table = demo.merge(bmx, on="SEQN").merge(dxx, on="SEQN")
    table["SEQN"] = table["SEQN"].astype("int64")
    table["RIAGENDR"] = table["RIAGENDR"].map({1.0: 1, 2.0: 0})
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, index=False, na_rep="")
    print(f"{out}: {len(table)} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
