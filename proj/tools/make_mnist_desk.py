#!/usr/bin/env python3
# Copyright 2026 The DeepClean Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the desk-scale MNIST subset shipped in data/mnist-desk.

Input is the digits/ directory of the `mnist` npm package (10,000 MNIST
digits stored as per-class JSON arrays of pixel/255 values rounded to three
decimals). Output is four gzip-compressed IDX files. The last 200 digits of
every class form the test set; the remaining 8,000 digits form the training
set. Both sets are shuffled with a fixed seed.

    npm pack mnist && tar xzf mnist-1.1.0.tgz
    python3 tools/make_mnist_desk.py package/src/digits data/mnist-desk
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path

SIDE = 28
PIXELS = SIDE * SIDE
TEST_PER_CLASS = 200


def write_idx(path, magic, dims, payload):
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in dims)
    # mtime=0 keeps the archives byte-reproducible.
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as out:
        out.write(header + payload)


def main(src, dst):
    src, dst = Path(src), Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    train, test = [], []
    for label in range(10):
        values = json.loads((src / f"{label}.json").read_text())["data"]
        count = len(values) // PIXELS
        for k in range(count):
            chunk = values[k * PIXELS:(k + 1) * PIXELS]
            image = bytes(min(255, max(0, round(v * 255))) for v in chunk)
            (test if k >= count - TEST_PER_CLASS else train).append((image, label))
    rng = random.Random(20231016)
    rng.shuffle(train)
    rng.shuffle(test)
    for name, rows in (("train", train), ("t10k", test)):
        write_idx(dst / f"{name}-images-idx3-ubyte.gz", 0x803, (len(rows), SIDE, SIDE),
                  b"".join(img for img, _ in rows))
        write_idx(dst / f"{name}-labels-idx1-ubyte.gz", 0x801, (len(rows),),
                  bytes(lbl for _, lbl in rows))
        print(f"{name}: {len(rows)} samples")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: make_mnist_desk.py DIGITS_DIR OUT_DIR")
    main(sys.argv[1], sys.argv[2])
