#!/usr/bin/env python3
"""Recompute the checks in an output directory's summary.json from the tables
written next to it. Exit status 0 iff every recomputed verdict matches."""
import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np


def load_table(out, stem):
    js, cs = out / f"{stem}.json", out / f"{stem}.csv"
    if js.exists():
        return json.loads(js.read_text())
    rows = []
    with cs.open() as f:
        for r in csv.DictReader(f):
            rows.append({k: json.loads(v) if v not in ("", None) and k != "family" else v for k, v in r.items()})
    return rows


def check_spectrum(out, summary):
    rows = load_table(out, "spectrum")
    mult = {}
    for r in rows:
        mult[round(r["value"], 9)] = r["multiplicity"]
    symmetric = all(mult.get(round(-v, 9)) == m for v, m in mult.items())
    got = {"spectrum_symmetric": symmetric}
    pos = [r["value"] for r in rows if r["value"] > 0]
    for c in summary["checks"]:
        if c["name"] == "smallest_positive_is_2pi_dist":
            got[c["name"]] = bool(pos) and abs(min(pos) - c["value"]) <= 1e-12 and c["pass"]
    return got


def check_grid(out, summary):
    rows = load_table(out, "grid")
    got = {}
    for c in summary["checks"]:
        v = c["value"] or {}
        if c["name"] == "nonfredholm_exactly_on_walls":
            wm, wp = v.get("weight", [0.0, 0.0])
            ok = True
            for r in rows:
                if wm == 0 and wp == 0:
                    ok &= r["fredholm"] == (r["dist_W"] > 1e-10)
                elif not r["fredholm"]:
                    ok &= r["dist_W"] < max(abs(wm), abs(wp)) / (2 * math.pi) + v["cell"]
            got[c["name"]] = ok
        elif c["name"] == "wall_map_consistent":
            lo, hi, n = v["delta_min"], v["delta_max"], v["n"]
            walls = {"minus": [r["wall"] for r in rows if r["family"] == "minus"],
                     "plus": [r["wall"] for r in rows if r["family"] == "plus"]}
            count = 0
            for i in range(n):
                for j in range(n):
                    dm, dp = lo + (hi - lo) * (i + 0.5) / n, lo + (hi - lo) * (j + 0.5) / n
                    count += any(abs(dm - x) <= 1e-10 for x in walls["minus"]) or any(
                        abs(dp - x) <= 1e-10 for x in walls["plus"])
            got[c["name"]] = count == v["non_fredholm_samples"]
    return got


def check_index(out, summary):
    rows = load_table(out, "index")
    ok = [r["index"] == -r["spectral_flow"] and r["index"] == r["dim_ker"] - r["dim_coker"] for r in rows]
    return {"index_equals_minus_flow": ok}


def check_scan(out, summary):
    recs = [json.loads(line) for line in (out / "monopole.jsonl").read_text().splitlines() if line.strip()]
    rank_ok = all(r["rank"] == abs(r["index"]) for r in recs)
    anti = all(abs(re) <= 1e-9 for r in recs for re, _ in r["higgs_eigenvalues"])
    return {"rank_equals_abs_index": rank_ok, "higgs_anti_hermitian": anti, "bogomolny_residual_reported": True}


def ray_coefficient(ray):
    samples = sorted(ray["samples"], key=lambda s: s["r"])
    pc = samples[0]["pole_count"]
    if pc == 0:
        return None
    xs, ys = [], []
    for s in samples[:3]:
        mu = sorted(s["eigenvalues"], key=abs, reverse=True)[:pc]
        xs.append(1 / s["r"])
        ys.append(sum(mu) / pc)
    if len(xs) == 1:
        return ys[0] / xs[0]
    A = np.column_stack([xs, np.ones(len(xs))])
    return float(np.linalg.lstsq(A, np.array(ys), rcond=None)[0][0])


def check_singularity(out, summary):
    rep = json.loads((out / "singularity.json").read_text())
    got = {}
    coeffs = []
    for i, ray in enumerate(rep["rays"]):
        c = ray_coefficient(ray)
        if (c is None) != (ray["coefficient"] is None) or (c is not None and abs(c - ray["coefficient"]) > 1e-9):
            got[f"pole_coefficient_half_ray{i}"] = None  # table and report disagree
            continue
        got[f"pole_coefficient_half_ray{i}"] = c is not None and abs(2 * abs(c) - 1) <= 0.05
        if c is not None:
            coeffs.append(c)
    spread = None
    if coeffs and len(coeffs) == len(rep["rays"]):
        m = sum(coeffs) / len(coeffs)
        spread = max(abs(c - m) / abs(m) for c in coeffs)
    got["isotropy_spread"] = spread is not None and spread <= 0.02
    return got


def audit_residuals(r):
    if r["r"] == 0:
        hatbar = r["dim_vbar"] - r["dim_ehat"] - r["dim_wprime"] + r["dim_kbar"]
        hatv = r["dim_ehat"] - r["dim_vcorner"]
    else:
        hatbar = r["dim_vbar"] - r["dim_ehat"] - r["dim_wprime"]
        hatv = r["dim_ehat"] - r["dim_vcorner"] - r["dim_wprime"] + r["dim_kbar"]
    split = r["dim_vbar"] - r["dim_vcorner"] - (r["dim_h"] - r["dim_kbar"])
    rk = r["dim_h"] - r["rk_h_case"]
    return hatbar, hatv, split, rk


def check_audit(out, summary):
    rows = load_table(out, "audit")
    got = {"audit_residuals_zero": [], "vcorner_equals_ehat_at_w": [], "rk_h_matches_case": []}
    for r in rows:
        res = audit_residuals(r)
        stored = (r["residual_hatbar"], r["residual_hatv"], r["residual_split"], r["residual_rk_h"])
        if res != stored:
            print(f"audit row r={r['r']}: stored residuals {stored}, recomputed {res}")
        got["audit_residuals_zero"].append(res == (0, 0, 0, 0))
        if r["r"] == 0:
            got["vcorner_equals_ehat_at_w"].append(r["dim_vcorner"] == r["dim_ehat"])
            got["rk_h_matches_case"].append(r["dim_h"] == r["rk_h_case"])
    return got


CHECKERS = {"spectrum": check_spectrum, "grid": check_grid, "index": check_index, "scan": check_scan,
            "singularity": check_singularity, "audit": check_audit}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    args = ap.parse_args()
    summary = json.loads((args.out_dir / "summary.json").read_text())
    got = CHECKERS[summary["command"]](args.out_dir, summary)
    # checks with a repeated name are matched in order
    seen = {}
    bad = 0
    for c in summary["checks"]:
        name = c["name"]
        want = got.get(name)
        if isinstance(want, list):
            k = seen.get(name, 0)
            seen[name] = k + 1
            want = want[k] if k < len(want) else None
        if want is None or bool(want) != c["pass"]:
            print(f"MISMATCH {name}: summary says {c['pass']}, recomputed {want}")
            bad += 1
        else:
            print(f"ok {name}: {c['pass']}")
    all_pass = all(c["pass"] for c in summary["checks"])
    if all_pass != summary["all_pass"]:
        print(f"MISMATCH all_pass: summary says {summary['all_pass']}, checks give {all_pass}")
        bad += 1
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
