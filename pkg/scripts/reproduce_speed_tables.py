"""Print relative training-cost tables for the shipped run configs.

Each block compares multi-scale samplers against the single-scale baseline of
the same model family using the closed-form expected cost model, matching what
`scaleplan simulate --baseline` prints. Runs in a few seconds.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from scaleplan.costmodel import compare, simulate
from scaleplan.io import format_relative_table, load_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")

FAMILIES = {
    "resnet @ 224 (classification)": (
        "resnet_sscfbs.json",
        ["resnet_mscfbs.json", "resnet_mscvbs.json"],
    ),
    "resnet @ 160 with curriculum (classification)": (
        "resnet_mscvbswc_baseline.json",
        ["resnet_mscvbswc.json"],
    ),
    "efficientnet @ 300 (classification)": (
        "efficientnet_sscfbs.json",
        ["efficientnet_mscvbs.json"],
    ),
    "detector @ 1024 (detection)": (
        "detection_sscfbs.json",
        ["detection_mscfbs.json", "detection_mscvbs.json"],
    ),
}


def load(name: str):
    return load_config(os.path.join(CONFIG_DIR, name))


def main() -> None:
    for title, (base_name, cand_names) in FAMILIES.items():
        base_run = load(base_name)
        base = simulate(base_run.sampler, base_run.profile, mode="expected")
        rows = [(base_name.removesuffix(".json"), compare(base, base))]
        for cand_name in cand_names:
            cand_run = load(cand_name)
            cand = simulate(cand_run.sampler, cand_run.profile, mode="expected")
            rows.append((cand_name.removesuffix(".json"), compare(cand, base)))
        print(f"== {title} ==")
        print(format_relative_table(rows))
        print()


if __name__ == "__main__":
    main()
