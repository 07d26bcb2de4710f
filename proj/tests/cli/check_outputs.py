#!/usr/bin/env python3
# Copyright 2026-present the lincoup authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Checks CLI output schemas and a few values against closed forms.

usage: check_outputs.py LINCOUP_BINARY WORKDIR
"""

import csv
import json
import math
import pathlib
import shutil
import subprocess
import sys


def run(exe, workdir, name, config, *args, expect=0):
    out = workdir / name
    cfg = workdir / f"{name}.json"
    cfg.write_text(json.dumps(config))
    proc = subprocess.run([exe, *args, "--config", str(cfg), "--out", str(out)],
                          capture_output=True, text=True)
    if proc.returncode != expect:
        sys.exit(f"{name}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return out


def read_csv(path, header):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if rows[0] != header:
        sys.exit(f"{path}: header {rows[0]}, expected {header}")
    return [[float(v) for v in r] for r in rows[1:]]


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    exe, workdir = sys.argv[1], pathlib.Path(sys.argv[2])
    shutil.rmtree(workdir, ignore_errors=True)
    workdir.mkdir(parents=True)
    exp1 = {"family": "exponential", "params": [1.0]}
    weib2 = {"family": "weibull", "params": [2.0, 1.0]}

    out = run(exe, workdir, "ee_curve", {"marginal1": exp1, "marginal2": exp1}, "curve")
    for x1, phi, dphi in read_csv(out / "curve.csv", ["x1", "phi", "phi_prime"]):
        assert close(phi, x1, 1e-12) and close(dphi, 1.0, 1e-10), (x1, phi, dphi)
    grid = read_csv(out / "quantile_grid.csv", ["level", "j", "u", "v"])
    assert {int(r[0]) for r in grid} == set(range(1, 11))

    out = run(exe, workdir, "ew_curve", {"marginal1": exp1, "marginal2": weib2}, "curve")
    for x1, phi, _ in read_csv(out / "curve.csv", ["x1", "phi", "phi_prime"]):
        assert abs(phi - math.sqrt(x1)) <= 1e-8, (x1, phi)

    # Five log-spaced points from 1 to 16 put z = 4 on the grid.
    out = run(exe, workdir, "ee_product",
              {"grids": {"z_min": 1.0, "z_max": 16.0, "z_points": 5}}, "product")
    rows = read_csv(out / "product.csv", ["z", "rho", "g", "L_g"])
    z4 = [r for r in rows if close(r[0], 4.0, 1e-12)]
    assert z4, rows
    _, rho, g, lin = z4[0]
    assert close(rho, 2.0, 1e-12) and close(g, math.exp(-2) / 4, 1e-10) and close(lin, 1.5, 1e-8), z4
    norm = dict(line.split(" = ") for line in (out / "normalization.txt").read_text().splitlines())
    assert 1 - 1e-6 <= float(norm["integral"]) <= 1.0 + 1e-12, norm

    out = run(exe, workdir, "ee_perturb", {}, "perturb")
    summary = read_csv(out / "summary.csv", ["n", "a", "b", "delta", "epsilon", "nu", "Lmin", "Lmax"])
    assert len(summary) == 5
    for n, *_, lmin, lmax in summary:
        assert lmin <= -10 * n and lmax >= 10 * n, (n, lmin, lmax)
    for k in range(1, 6):
        read_csv(out / f"window_{k}.csv", ["z", "g0", "g1", "L0", "L1"])
    json.loads((out / "measure.json").read_text())
    assert json.loads((out / "perturb_summary.json").read_text())["all_met"]

    first = run(exe, workdir, "verify_a", {"samples": 20000, "binned_samples": 200000}, "verify")
    second = run(exe, workdir, "verify_b", {"samples": 20000, "binned_samples": 200000}, "verify")
    a = (first / "verify_summary.json").read_text()
    b = (second / "verify_summary.json").read_text()
    assert a == b, "verify is not deterministic for a fixed seed"
    print("outputs ok")


if __name__ == "__main__":
    main()
