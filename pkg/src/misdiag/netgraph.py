"""Misclassification networks: thresholded directed graphs over classes."""

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MisclassNetwork:
    num_classes: int
    edges: tuple          # ((from_i, to_j, weight), ...) sorted by (i, j)
    theta: float
    model_id: str = ""

    def edge_set(self):
        return {(i, j) for i, j, _ in self.edges}


def build_network(v: np.ndarray, theta: float, model_id: str = "") -> MisclassNetwork:
    """Edge i->j iff v[i][j] >= theta, i != j and the rate is nonzero."""
    if not (0.0 <= theta <= 1.0):
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    c = v.shape[0]
    edges = []
    for i in range(c):
        for j in range(c):
            if i != j and v[i, j] > 0.0 and v[i, j] >= theta:
                edges.append((i, j, float(v[i, j])))
    return MisclassNetwork(num_classes=c, edges=tuple(edges), theta=theta,
                           model_id=model_id)


def in_degrees(network: MisclassNetwork) -> np.ndarray:
    """d_i: sum of incoming edge weights, i.e. the conditional rates of the
    thresholded misclassifications pointing into class i."""
    d = np.zeros(network.num_classes)
    for _, j, w in network.edges:
        d[j] += w
    return d


def symmetric_pairs(network: MisclassNetwork):
    """Unordered pairs with edges both ways, plus the remaining one-way edges."""
    present = network.edge_set()
    pairs = {tuple(sorted((i, j))) for (i, j) in present if (j, i) in present}
    asymmetric = tuple(sorted(e for e in present if (e[1], e[0]) not in present))
    return pairs, asymmetric


def consistent_edges(networks):
    """Edges (ignoring weight) present in every network, plus presence counts."""
    if not networks:
        raise ValueError("need at least one network")
    c = networks[0].num_classes
    for n in networks:
        if n.num_classes != c:
            raise ValueError(
                f"mismatched class counts: {n.num_classes} vs {c}")
    counts = {}
    for n in networks:
        for e in n.edge_set():
            counts[e] = counts.get(e, 0) + 1
    common = {e for e, k in counts.items() if k == len(networks)}
    return common, counts


def export_dot(network: MisclassNetwork, class_names=None) -> str:
    names = class_names if class_names else [str(i) for i in range(network.num_classes)]
    lines = ["digraph misclassification {"]
    for i in range(network.num_classes):
        lines.append(f'  n{i} [label="{names[i]}"];')
    for i, j, w in sorted(network.edges):
        lines.append(f'  n{i} -> n{j} [label="{w:.3f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def network_to_dict(network: MisclassNetwork):
    return {
        "nodes": list(range(network.num_classes)),
        "edges": [{"from": i, "to": j, "weight": w}
                  for i, j, w in sorted(network.edges)],
        "theta": network.theta,
        "model_id": network.model_id,
    }


def write_network_json(network: MisclassNetwork, path):
    with open(path, "w") as fh:
        json.dump(network_to_dict(network), fh, indent=2, sort_keys=True)
        fh.write("\n")
