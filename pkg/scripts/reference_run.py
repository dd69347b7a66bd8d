"""Regenerate tests/data/reference_run.json (the pinned end-to-end reference)."""
import json
import sys
from pathlib import Path

from crcondense.benchmark import FAMILIES, PRESET_ORDER, run_benchmark

out = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests/data/reference_run.json")
runs = []
for family in FAMILIES:
    for preset in PRESET_ORDER:
        r = run_benchmark(family, preset)
        r.pop("seconds")
        runs.append(r)
        print(f"{family:8s} {preset:9s} m={r['m']:3d} purity={r['best_purity']:.4f} "
              f"crc={r['nearest_crc_test_accuracy']:.4f} cond={r['mlp_condensed_test_accuracy']:.4f} "
              f"raw={r['mlp_raw_test_accuracy']:.4f} gap={r['accuracy_gap']:+.4f}")
out.write_text(json.dumps({"runs": runs}, indent=2, sort_keys=True) + "\n")
