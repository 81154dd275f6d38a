#!/usr/bin/env python3
"""Convert the CTM tables shipped with the `pybdm` Python package into
`acss-ktable` CSV files.

    pip download pybdm --no-deps -d /tmp/pybdm
    python3 -m zipfile -e /tmp/pybdm/pybdm-*.whl /tmp/pybdm/x
    python3 tools/convert_pybdm_tables.py /tmp/pybdm/x/pybdm/ctmdata data/ktables

By default every pattern up to length 8 is written, plus every two-symbol
pattern up to length 12. Pass --max-length 12 to write the complete tables
(the 9-symbol table is then several hundred MB).
"""
import argparse
import gzip
import os
import pickle

ALPHABETS = (2, 4, 5, 6, 9)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("ctmdata")
    ap.add_argument("out_dir")
    ap.add_argument("--max-length", type=int, default=8)
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    for alphabet in ALPHABETS:
        path = os.path.join(args.ctmdata, f"ctm-b{alphabet}-d12.pkl.gz")
        with gzip.open(path) as fh:
            table = pickle.load(fh)
        rows = []
        for (length,), entries in table.items():
            for pattern, k in entries.items():
                binary = set(pattern) <= {"0", "1"}
                if length <= args.max_length or binary:
                    rows.append((pattern, k))
        rows.sort()
        out = os.path.join(args.out_dir, f"k{alphabet}.csv")
        with open(out, "w", newline="\n") as fh:
            fh.write(f"# acss-ktable alphabet={alphabet}\n")
            for pattern, k in rows:
                fh.write(f"{pattern},{k:.12f}\n")
        print(f"{out}: {len(rows)} rows")


if __name__ == "__main__":
    main()
