#!/usr/bin/env python3
"""
Pre-run that measures every quantity frozen in cmsdisc/defaults.yml.

Writes calibration-report.json at the repo root; validate_thresholds.py
compares it against the frozen values.
"""
import json
import logging
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

import numpy as np  # noqa: E402

from cmsdisc.chebyshev_core import ChebKind  # noqa: E402
from cmsdisc.cms_envelope import build_envelope, coefficient_decay  # noqa: E402
from cmsdisc.config import default_grid  # noqa: E402
from cmsdisc.et_bounds import calibrate_K, rho  # noqa: E402
from cmsdisc.measures import (  # noqa: E402
    circle_corpus,
    sharpness_witness,
    test_corpus,
    two_sided_discrepancy,
)
from cmsdisc.wigner import (  # noqa: E402
    EnsembleConfig,
    EntryModel,
    counting_experiment,
    moment_limit,
    wigner_experiment,
)

REPORT = ROOT / "calibration-report.json"
SWEEP_N0 = (1, 2, 4, 8, 16, 32, 64)
WIGNER_N = 200


def envelope_constants():
    decay, scaling = 0.0, 0.0
    for n0 in SWEEP_N0:
        for k0 in range(1, n0 + 1):
            first = build_envelope(ChebKind.FIRST, n0, k0)
            for n, p, q in coefficient_decay(first):
                decay = max(decay, n * max(p, q))
            second = build_envelope(ChebKind.SECOND, n0, k0)
            scaling = max(scaling, second.coefficient_gap * n0 / rho(second.node, n0))
    print(f"[OK] envelopes: coefficient_decay={decay:.4f} second_kind_scaling={scaling:.4f}")
    return {"coefficient_decay": decay, "second_kind_scaling": scaling}


def sharpness():
    worst = 0.0
    for n0 in range(1, 65):
        mu = sharpness_witness(n0)
        x_star = float(mu.positions[-1])
        at_node = two_sided_discrepancy(mu, ChebKind.SECOND, x_star)
        worst = max(worst, rho(x_star, n0) / (n0 * at_node))
    print(f"[OK] witnesses: sharpness_factor={worst:.4f}")
    return {"sharpness_factor": worst}


def constants():
    result = calibrate_K(test_corpus(0) + circle_corpus(0), SWEEP_N0)
    print(f"[OK] corpus: k1={result.k1:.4f} k2={result.k2:.4f} k3={result.k3:.4f}")
    return {"k1": result.k1, "k2": result.k2, "k3": result.k3}, result.as_dict()["witnesses"]


def wigner():
    config = EnsembleConfig(WIGNER_N, EntryModel.COMPLEX_GAUSSIAN, seed=0)
    grid = default_grid()
    law = max(r.ratio for r in counting_experiment(config, grid, 100).counts)
    combined = wigner_experiment(config, grid, moment_limit(WIGNER_N) - 2, 200)
    moment = max(r.u_moment_mean * WIGNER_N / r.n for r in combined.u_moments)
    spread = max(r.ratio for r in combined.variances())
    print(f"[OK] wigner N={WIGNER_N}: law={law:.4f} moment={moment:.4f} variance={spread:.4f}")
    return {
        "wigner_law_ratio": law,
        "wigner_moment_constant": max(moment, 0.0),
        "wigner_variance_ratio": spread,
    }


def main():
    logging.basicConfig(level=logging.WARNING)
    observed = {}
    observed.update(envelope_constants())
    observed.update(sharpness())
    ks, witnesses = constants()
    observed.update(ks)
    observed.update(wigner())
    report = {
        "observed": {k: float(np.round(v, 6)) for k, v in observed.items()},
        "witnesses": witnesses,
    }
    REPORT.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"[OK] wrote {REPORT.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
