#!/usr/bin/env python3
# Regenerates tests/data/coco_rle_fixtures.json with pycocotools.
import json
import sys

import numpy as np
from pycocotools import mask as mask_utils


def shapes(rng):
    yield np.zeros((4, 5), np.uint8)
    yield np.ones((3, 7), np.uint8)
    yield np.array([[0, 1, 0], [1, 1, 0]], np.uint8)
    m = np.zeros((1, 1), np.uint8); m[0, 0] = 1
    yield m
    m = np.zeros((40, 60), np.uint8); m[10:30, 20:25] = 1
    yield m
    m = np.zeros((64, 64), np.uint8)
    for i in range(64):
        m[i, max(0, i - 2):i + 2] = 1
    yield m
    m = np.zeros((300, 200), np.uint8); m[:, 0] = 1; m[-1, :] = 1
    yield m
    m = np.zeros((512, 512), np.uint8); m[100:412, 250:255] = 1
    yield m
    while True:
        h, w = rng.integers(1, 120, size=2)
        p = rng.choice([0.02, 0.2, 0.5, 0.9])
        yield (rng.random((h, w)) < p).astype(np.uint8)


def main(path):
    rng = np.random.default_rng(20260101)
    out = []
    for idx, m in enumerate(shapes(rng)):
        if idx == 20:
            break
        enc = mask_utils.encode(np.asfortranarray(m))
        counts = enc["counts"].decode("ascii")
        dec = mask_utils.decode({"size": enc["size"], "counts": counts})
        assert (dec == m).all()
        out.append({
            "size": [int(v) for v in enc["size"]],
            "counts": counts,
            "area": int(mask_utils.area(enc)),
            "rows": ["".join(str(int(v)) for v in row) for row in dec],
        })
    with open(path, "w") as f:
        json.dump(out, f)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/coco_rle_fixtures.json")
