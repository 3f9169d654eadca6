#!/usr/bin/env python3
"""Write a class-balanced MNIST subset as IDX files.

Source: the 5000-row MNIST sample shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz: 784 pixel columns then the label).

    python3 tools/make_mnist_subset.py mnist_5k.csv.gz data/mnist1k --per-class 100
"""

import argparse
import gzip
import pathlib
import struct


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("source")
    ap.add_argument("out_dir")
    ap.add_argument("--per-class", type=int, default=100)
    args = ap.parse_args()

    counts = [0] * 10
    images, labels = [], []
    with gzip.open(args.source, "rt") as f:
        for line in f:
            cells = [int(float(v)) for v in line.strip().split(",")]
            pixels, label = cells[:784], cells[784]
            if counts[label] >= args.per_class:
                continue
            counts[label] += 1
            images.append(bytes(pixels))
            labels.append(label)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "images.idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(out / "labels.idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))
    print(f"wrote {len(labels)} examples, per class {counts}")


if __name__ == "__main__":
    main()
