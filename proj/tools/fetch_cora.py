#!/usr/bin/env python3
"""Download the Cora citation network and convert it to the TSV formats the
pipeline reads (features.tsv, edges.tsv, labels.tsv).

Needs network access; run on a connected machine and copy data/cora into the
repository if the training host is offline.

Usage: python3 tools/fetch_cora.py [--out data/cora] [--url URL]
"""

import argparse
import io
import sys
import tarfile
import urllib.request

DEFAULT_URL = "https://linqs-data.soe.ucsc.edu/public/lbc/cora.tgz"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/cora", help="output directory")
    ap.add_argument("--url", default=DEFAULT_URL, help="cora.tgz download URL")
    args = ap.parse_args()

    print(f"downloading {args.url} ...", file=sys.stderr)
    with urllib.request.urlopen(args.url, timeout=120) as resp:
        blob = resp.read()

    content = cites = None
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        for member in tar.getmembers():
            if member.name.endswith("cora.content"):
                content = tar.extractfile(member).read().decode()
            elif member.name.endswith("cora.cites"):
                cites = tar.extractfile(member).read().decode()
    if content is None or cites is None:
        print("archive did not contain cora.content / cora.cites", file=sys.stderr)
        return 1

    node_id = {}          # paper id -> dense index
    features = []         # list of feature strings
    labels = []           # list of class names
    class_id = {}
    for line in content.splitlines():
        parts = line.strip().split("\t")
        if len(parts) < 3:
            continue
        paper, feats, cls = parts[0], parts[1:-1], parts[-1]
        node_id[paper] = len(node_id)
        features.append(",".join(feats))
        labels.append(cls)
        class_id.setdefault(cls, len(class_id))

    edges = set()
    skipped = 0
    for line in cites.splitlines():
        parts = line.strip().split()
        if len(parts) != 2:
            continue
        a, b = parts
        if a not in node_id or b not in node_id:
            skipped += 1
            continue
        i, j = node_id[a], node_id[b]
        if i == j:
            continue
        edges.add((min(i, j), max(i, j)))

    import os

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "features.tsv"), "w") as f:
        for i, feats in enumerate(features):
            f.write(f"{i}\t{feats}\n")
    with open(os.path.join(args.out, "edges.tsv"), "w") as f:
        for i, j in sorted(edges):
            f.write(f"{i}\t{j}\n")
    with open(os.path.join(args.out, "labels.tsv"), "w") as f:
        for i, cls in enumerate(labels):
            f.write(f"{i}\t{class_id[cls]}\n")

    print(
        f"wrote {len(features)} nodes, {len(edges)} undirected edges, "
        f"{len(class_id)} classes to {args.out} (skipped {skipped} dangling citations)",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
