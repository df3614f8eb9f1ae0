#!/usr/bin/env python3
"""Rebuild processed.cleveland.data from the heart_disease.tab table shipped in
the Orange3 wheel (Orange/datasets/heart_disease.tab).

The Orange copy stores the Cleveland records with categorical labels and a
binary target. This script maps the labels back to the numeric UCI codes and
writes the 14-column comma-separated layout with '?' for missing values.

usage: convert_orange_heart.py <orange3-*.whl | heart_disease.tab> <out>
"""
import sys
import zipfile

CODES = {
    1: {"female": "0.0", "male": "1.0"},
    2: {"typical ang": "1.0", "atypical ang": "2.0", "non-anginal": "3.0", "asymptomatic": "4.0"},
    6: {"normal": "0.0", "ST-T abnormal": "1.0", "left vent hypertrophy": "2.0"},
    10: {"upsloping": "1.0", "flat": "2.0", "downsloping": "3.0"},
    12: {"normal": "3.0", "fixed defect": "6.0", "reversable defect": "7.0"},
}


def numeric(field):
    if field == "?":
        return "?"
    value = float(field)
    return repr(value)


def main():
    src, out = sys.argv[1], sys.argv[2]
    if src.endswith(".whl"):
        text = zipfile.ZipFile(src).read("Orange/datasets/heart_disease.tab").decode()
    else:
        text = open(src).read()
    lines = text.splitlines()[3:]
    with open(out, "w") as fh:
        for line in lines:
            fields = line.split("\t")
            row = []
            for col, field in enumerate(fields[:13]):
                if field != "?" and col in CODES:
                    row.append(CODES[col][field])
                else:
                    row.append(numeric(field))
            row.append(fields[13])
            fh.write(",".join(row) + "\n")


if __name__ == "__main__":
    main()
