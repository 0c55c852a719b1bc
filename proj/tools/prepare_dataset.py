#!/usr/bin/env python3
"""Convert common raw graph-dataset formats into the directory layout the
library loads (features.txt / edges.txt / labels.txt). Stdlib only, fully
offline.

Supported raw formats:

  linqs     the classic citation-network release: a .content file
            (<id> <w1> ... <wD> <class>) plus a .cites file (<id> <id>)

                prepare_dataset.py linqs --content cora.content \
                    --cites cora.cites --out data/cora

  geomgcn   the WebKB/Wikipedia release: out1_node_feature_label.txt
            (<id>\t<f1,f2,...>\t<label>) plus out1_graph_edges.txt

                prepare_dataset.py geomgcn --features out1_node_feature_label.txt \
                    --edges out1_graph_edges.txt --out data/texas

Node ids are remapped to 0..N-1 in file order; class names become integer
labels in sorted-name order. Duplicate, reversed and self-loop edges are all
fine: the loader canonicalizes them.
"""
import argparse
import os
import sys


def write_dataset(out_dir, features, edges, labels):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "features.txt"), "w") as f:
        for row in features:
            f.write(" ".join(row) + "\n")
    with open(os.path.join(out_dir, "edges.txt"), "w") as f:
        for u, v in edges:
            f.write(f"{u} {v}\n")
    with open(os.path.join(out_dir, "labels.txt"), "w") as f:
        f.write("\n".join(str(y) for y in labels) + "\n")
    print(f"wrote {len(features)} nodes, {len(edges)} edge lines to {out_dir}")


def convert_linqs(args):
    node_index = {}
    features = []
    class_names = []
    with open(args.content) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            node_index[parts[0]] = len(features)
            features.append(parts[1:-1])
            class_names.append(parts[-1])
    class_ids = {name: i for i, name in enumerate(sorted(set(class_names)))}
    labels = [class_ids[name] for name in class_names]

    edges = []
    skipped = 0
    with open(args.cites) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            u, v = parts
            if u not in node_index or v not in node_index:
                skipped += 1
                continue
            edges.append((node_index[u], node_index[v]))
    if skipped:
        print(f"note: skipped {skipped} citation lines with unknown node ids", file=sys.stderr)
    write_dataset(args.out, features, edges, labels)


def convert_geomgcn(args):
    node_index = {}
    features = []
    labels = []
    with open(args.features) as f:
        header_skipped = False
        for line in f:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                continue
            if not header_skipped and not parts[0].isdigit():
                header_skipped = True
                continue
            node_index[parts[0]] = len(features)
            features.append(parts[1].split(","))
            labels.append(int(parts[2]))

    edges = []
    with open(args.edges) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2 or parts[0] not in node_index:
                continue
            edges.append((node_index[parts[0]], node_index[parts[1]]))
    write_dataset(args.out, features, edges, labels)


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="format", required=True)

    linqs = sub.add_parser("linqs", help="cora.content / cora.cites style")
    linqs.add_argument("--content", required=True)
    linqs.add_argument("--cites", required=True)
    linqs.add_argument("--out", required=True)
    linqs.set_defaults(run=convert_linqs)

    geomgcn = sub.add_parser("geomgcn", help="out1_node_feature_label / out1_graph_edges style")
    geomgcn.add_argument("--features", required=True)
    geomgcn.add_argument("--edges", required=True)
    geomgcn.add_argument("--out", required=True)
    geomgcn.set_defaults(run=convert_geomgcn)

    args = parser.parse_args()
    args.run(args)


if __name__ == "__main__":
    main()
