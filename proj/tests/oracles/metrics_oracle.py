#!/usr/bin/env python3
"""Spreadsheet-style reference metrics for every fixture report.

Reads the raw fixture CSVs with the csv module and recomputes each column with
mpmath at 30 digits. CI widths and maturities are exact rationals (the inputs
are decimals), so bins are assigned by explicit threshold ladders without
rounding at the edges. Output is
frozen into tests/data/metrics_oracle.csv and compared by the unit suite.
"""
import csv
import sys
from fractions import Fraction
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30
Z = mp.mpf("1.959964")

ROOT = Path(__file__).resolve().parents[2]
FIX = ROOT / "data" / "fixture"


def ladder(v, rules, extreme=None):
    v = Fraction(v)
    if extreme is not None and v > Fraction(extreme):
        return "EXTREME"
    for idx, upper in rules:
        if v < Fraction(upper):
            return str(idx)
    return str(len(rules) + 1)


def width_bin(v):
    return ladder(v, [(1, "0.25"), (2, "0.45"), (3, "0.65")], "1.00")


def rel_bin(v):
    return ladder(v, [(1, "0.25"), (2, "0.45"), (3, "0.65"), (4, "1.00")],
                  "1.50")


def maturity_bin(v, outcome):
    if outcome == "OS":
        edges = ["0.25", "0.40", "0.55", "0.70"]
    else:
        edges = ["0.25", "0.45", "0.65", "0.85"]
    return ladder(v, [(i + 1, e) for i, e in enumerate(edges)])


def rel_key(v):
    return Fraction(mp.nstr(v, 25))


def main(out):
    trials = {}
    with open(FIX / "trials.csv", newline="") as f:
        for r in csv.DictReader(f):
            trials[(r["trial_id"], r["subtrial_id"])] = r
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial_id", "subtrial_id", "outcome", "cutoff_date", "ln_hr", "se", "ci_width", "rel_uncertainty",
                "maturity_control", "maturity_comparator", "ci_width_bin", "rel_unc_bin", "maturity_control_bin",
                "maturity_comparator_bin"])
    with open(FIX / "outcomes.csv", newline="") as f:
        for r in csv.DictReader(f):
            t = trials[(r["trial_id"], r["subtrial_id"])]
            hr, lo, up = (mp.mpf(r[k]) for k in ("hr", "ci_lower", "ci_upper"))
            ln_hr = mp.log(hr)
            se = (mp.log(up) - mp.log(lo)) / (2 * Z)
            width = Fraction(r["ci_upper"]) - Fraction(r["ci_lower"])
            rel = se / abs(ln_hr) if ln_hr != 0 else None
            mc = Fraction(int(r["events_control"]), int(t["n_control"])) if r["events_control"] else None
            mb = Fraction(int(r["events_comparator"]), int(t["n_comparator"])) if r["events_comparator"] else None

            def s(v):
                if v is None:
                    return ""
                if isinstance(v, Fraction):
                    v = mp.mpf(v.numerator) / v.denominator
                return mp.nstr(v, 17, strip_zeros=False)

            w.writerow([r["trial_id"], r["subtrial_id"], r["outcome"], r["cutoff_date"], s(ln_hr), s(se), s(width),
                        s(rel), s(mc), s(mb), width_bin(width), "EXTREME" if rel is None else rel_bin(rel_key(rel)),
                        "" if mc is None else maturity_bin(mc, r["outcome"]),
                        "" if mb is None else maturity_bin(mb, r["outcome"])])


if __name__ == "__main__":
    main(sys.stdout)
