#!/usr/bin/env python3
# Copyright 2026 The hazboost Authors.
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

"""Reference values for the unit tests, computed independently of the C++
code with 50-digit arithmetic. Run once; the output is checked in as
tests/data/derived_values.json and must not be regenerated to make a
failing test pass."""

import json
import sys

import mpmath as mp

mp.mp.dps = 50


def grid_argmin(f, lo, hi, step):
    """Brute-force minimizer of f on lo, lo+step, ..., hi."""
    best_x, best_v = None, None
    n = int(mp.nint((hi - lo) / step))
    for i in range(n + 1):
        x = lo + i * step
        v = f(x)
        if best_v is None or v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def risk(rows, n):
    """(1/n) sum of w*exp(F) - delta*F over (w, delta, F) rows."""
    return mp.fsum(w * mp.exp(f) - d * f for (w, d, f) in rows) / n


def beta_pdf(u, a, b):
    return u ** (a - 1) * (1 - u) ** (b - 1) / mp.beta(a, b)


def lam(hid, t, x):
    t, x = mp.mpf(t), mp.mpf(x)
    if hid == 1:
        return beta_pdf(t, 2, 2) * beta_pdf(x, 2, 2)
    if hid == 2:
        return beta_pdf(t, 4, 4) * beta_pdf(x, 4, 4)
    if hid == 3:
        z = mp.log(t) - x
        return mp.npdf(z) / (t * mp.ncdf(x - mp.log(t)))
    if hid == 4:
        return mp.mpf(1.5) * mp.sqrt(t) * mp.exp(-mp.cos(2 * mp.pi * x) / 2 - mp.mpf(1.5))
    raise ValueError(hid)


def main():
    out = {}

    # Figure S.1 weights and events (decimal inputs, not binary doubles).
    w = [mp.mpf(s) for s in ("0.09", "0.03", "0.10", "0.04", "0.02", "0.10")]
    total_w = mp.fsum(w)
    out["figure_total_weight"] = float(total_w)
    out["f0_figure"] = float(mp.log(2 / total_w))
    out["f0_one_event_weight_two"] = float(mp.log(mp.mpf(1) / 2))
    # Time-axis weighted quantile at 0.10: epochs ending at or before 0.10
    # in the middle table are (0.01, 0.10] and (0.06, 0.10].
    out["q0_at_0_10"] = float((mp.mpf("0.09") + mp.mpf("0.04")) / total_w)
    # Time bin labelled 0.01 after Step 4 holds rows with weights 0.09, 0.04
    # and one event; U at F = F0.
    out["hist_time_bin_001_U"] = float((mp.mpf("0.09") + mp.mpf("0.04")) * 2 / total_w)

    # Leaf values by grid minimization of exp(-g) U + g V.
    for name, u, v in (("leaf_u2_v1", 2, 1), ("leaf_u1_v3", 1, 3)):
        f = lambda g, u=u, v=v: mp.exp(-g) * u + g * v
        # coarse pass then a 1e-6 pass around the coarse optimum
        g0, _ = grid_argmin(f, mp.mpf(-5), mp.mpf(5), mp.mpf("0.001"))
        g1, _ = grid_argmin(f, g0 - mp.mpf("0.001"), g0 + mp.mpf("0.001"), mp.mpf("1e-6"))
        out[name] = float(g1)

    # Split score example by direct risk evaluation on a 2-row dataset:
    # row L: w=2, delta=1; row R: w=1, delta=1; F = 0 before the round, n=2.
    # Before: one leaf, gamma_P = log(U_P / V_P) = log(3/2).
    # After: gamma_L = log 2, gamma_R = 0.
    rows_before = [(2, 1, -mp.log(mp.mpf(3) / 2)), (1, 1, -mp.log(mp.mpf(3) / 2))]
    rows_after = [(2, 1, -mp.log(2)), (1, 1, mp.mpf(0))]
    out["split_score_example"] = float(risk(rows_after, 2) - risk(rows_before, 2))

    out["lambda1_half_half"] = float(lam(1, "0.5", "0.5"))
    out["lambda3_one_zero"] = float(lam(3, 1, 0))
    out["lambda4_quarter"] = {str(t): float(lam(4, t, "0.25")) for t in ("0.5", "1", "2.5", "5")}
    out["lambda_spot"] = [
        {"id": hid, "t": t, "x": x, "value": float(lam(hid, t, x))}
        for hid, t, x in (
            (1, "0.3", "0.7"),
            (2, "0.25", "0.6"),
            (2, "0.5", "0.5"),
            (3, "0.2", "0.9"),
            (3, "4.5", "0.1"),
            (4, "3", "0.6"),
        )
    ]

    # Weighted quantile example: epochs of equal duration with x = 1, 2, 3 and
    # max_bins = 2; candidate j is the smallest x with cumulative share >= j/2.
    xs, share = [1, 2, 3], [mp.mpf(1) / 3, mp.mpf(2) / 3, mp.mpf(1)]
    out["weighted_example_candidates"] = [
        next(x for x, q in zip(xs, share) if q >= mp.mpf(j) / 2) for j in (1, 2)
    ]

    # Constant-hazard law checks use these closed forms.
    out["exp_truncated_cdf_rate2_t_half"] = float(1 - mp.exp(-1))

    json.dump(out, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
