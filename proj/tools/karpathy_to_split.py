#!/usr/bin/env python3
"""Convert a Karpathy-style dataset_coco.json into a capbias split file.

Images tagged "restval" go to train.
"""

import argparse
import json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("karpathy_json")
    ap.add_argument("out")
    args = ap.parse_args()

    with open(args.karpathy_json) as f:
        data = json.load(f)
    split = {"train": [], "val": [], "test": []}
    for img in data["images"]:
        name = "train" if img["split"] == "restval" else img["split"]
        split[name].append(img["cocoid"])
    for ids in split.values():
        ids.sort()
    with open(args.out, "w") as f:
        json.dump(split, f)


if __name__ == "__main__":
    main()
