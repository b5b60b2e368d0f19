"""Convert AeroDyn v13 single-table airfoil files to the package polar format.

The shipped NREL-5MW polars were produced from the reference turbine's
AeroDyn tables as redistributed (Apache-2.0) with the ROSCO toolbox source
(Examples/Test_Cases/NREL-5MW/AeroData)::

    python tools/convert_aerodyn_polars.py <AeroData dir> src/gadsim/data/nrel5mw/polars
"""
import sys
from pathlib import Path


def read_aerodyn_table(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    start = next(i for i, ln in enumerate(lines) if "Minimum CD value" in ln) + 1
    rows = []
    for ln in lines[start:]:
        parts = ln.split()
        if len(parts) < 3:
            break
        try:
            row = tuple(float(x) for x in parts[:3])
        except ValueError:
            break
        # the DU25 source table repeats its -13 deg row verbatim
        if rows and row == rows[-1]:
            continue
        rows.append(row)
    return lines[0].strip(), rows


def main(src, dst):
    dst = Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    for path in sorted(Path(src).glob("*.dat")):
        title, rows = read_aerodyn_table(path)
        with open(dst / path.name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {path.stem}: {title}\n")
            fh.write("# Source: NREL 5-MW reference turbine AeroDyn tables (via ROSCO, Apache-2.0).\n")
            fh.write("alpha_deg cl cd\n")
            for a, cl, cd in rows:
                fh.write(f"{a:8.2f} {cl:8.4f} {cd:8.4f}\n")
        print(f"{path.name}: {len(rows)} rows")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
