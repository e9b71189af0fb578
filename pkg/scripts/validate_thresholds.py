#!/usr/bin/env python3
"""Fail if any observed value in calibration-report.json exceeds its frozen threshold."""
import json
import sys
from pathlib import Path

import yaml

ROOT = Path(__file__).resolve().parent.parent
REPORT = ROOT / "calibration-report.json"
DEFAULTS = ROOT / "cmsdisc" / "defaults.yml"


def frozen_values(defaults):
    values = dict(defaults.get("thresholds", {}))
    values.update(defaults.get("calibrated", {}))
    return values


def main():
    if not REPORT.exists():
        print(f"Validation failed: {REPORT.name} not found; run scripts/calibrate_thresholds.py first")
        sys.exit(1)
    with REPORT.open("r", encoding="utf-8") as f:
        observed = json.load(f).get("observed", {})
    with DEFAULTS.open("r", encoding="utf-8") as f:
        frozen = frozen_values(yaml.safe_load(f) or {})

    violations = [
        (name, value, frozen[name])
        for name, value in sorted(observed.items())
        if name in frozen and value > float(frozen[name])
    ]
    unchecked = sorted(set(observed) - set(frozen))

    if violations:
        print("Validation failed: observed values above their frozen thresholds\n")
        for name, value, limit in violations:
            print(f"- {name}: observed {value:.6g} > frozen {limit:.6g}")
        sys.exit(1)

    for name in unchecked:
        print(f"[WARN] {name} has no frozen threshold")
    print(f"Threshold validation passed: {len(observed) - len(unchecked)} values within limits.")


if __name__ == "__main__":
    main()
