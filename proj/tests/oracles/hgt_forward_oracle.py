"""Straight-line HGT forward pass: one layer, dense numpy, loops over nodes.

Writes tests/data/hgt_forward.json with X^0, every parameter tensor (named as
the C++ library names them) and the expected X^1.
"""
import json
import math
import pathlib

import numpy as np

N, D, H = 2, 4, 2
DK = D // H
TYPES = ["candidate", "query"]
RELS = ["cc", "qc", "cq"]

rng = np.random.default_rng(42)
x0 = rng.normal(size=(N + 1, D))
q_lin = {t: [rng.normal(size=(D, DK)) for _ in range(H)] for t in TYPES}
k_lin = {t: [rng.normal(size=(D, DK)) for _ in range(H)] for t in TYPES}
theta = {r: [rng.normal(size=(DK, DK)) for _ in range(H)] for r in RELS}
mu = rng.uniform(0.5, 1.5, size=3)
mlp_w = rng.normal(size=(D, D)) * 0.5
mlp_b = rng.normal(size=D) * 0.1


def node_type(v):
    return "query" if v == N else "candidate"


def in_neighbors(v):
    if v == N:
        return [(i, "cq") for i in range(N)]
    return [(i, "cc") for i in range(N) if i != v] + [(N, "qc")]


x1 = np.zeros_like(x0)
for j in range(N + 1):
    nbrs = in_neighbors(j)
    messages = []
    per_head_weights = []
    for h in range(H):
        q = x0[j] @ q_lin[node_type(j)][h]
        logits = []
        for i, r in nbrs:
            k = x0[i] @ k_lin[node_type(i)][h]
            s = q @ theta[r][h] @ k
            logits.append(s * mu[RELS.index(r)] / math.sqrt(D))
        logits = np.array(logits)
        w = np.exp(logits - logits.max())
        per_head_weights.append(w / w.sum())
    total = np.zeros(D)
    for slot, (i, r) in enumerate(nbrs):
        parts = []
        for h in range(H):
            k = x0[i] @ k_lin[node_type(i)][h]
            parts.append(per_head_weights[h][slot] * k)
        msg = np.concatenate(parts)
        total += msg @ mlp_w + mlp_b
    x1[j] = total / len(nbrs)

tensors = {}
for t in TYPES:
    for h in range(H):
        tensors[f"hgt.layer0.q_lin.{t}.head{h}"] = q_lin[t][h].ravel().tolist()
    for h in range(H):
        tensors[f"hgt.layer0.k_lin.{t}.head{h}"] = k_lin[t][h].ravel().tolist()
for r in RELS:
    for h in range(H):
        tensors[f"hgt.layer0.theta.{r}.head{h}"] = theta[r][h].ravel().tolist()
tensors["hgt.layer0.mu"] = mu.tolist()
tensors["hgt.layer0.mlp0.weight"] = mlp_w.ravel().tolist()
tensors["hgt.layer0.mlp0.bias"] = mlp_b.tolist()

out = {
    "num_candidates": N,
    "dim": D,
    "heads": H,
    "layers": 1,
    "x0": x0.ravel().tolist(),
    "tensors": tensors,
    "x1": x1.ravel().tolist(),
}
path = pathlib.Path(__file__).resolve().parents[1] / "data" / "hgt_forward.json"
path.write_text(json.dumps(out, indent=1) + "\n")
print("wrote", path)
