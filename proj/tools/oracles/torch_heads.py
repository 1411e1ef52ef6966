"""Freeze float64 head outputs computed with PyTorch into a C++ test header.

Parameters are filled deterministically in the C++ collection order, so the
test can reproduce them without reading any file:
    value[i] of the k-th parameter = 0.3 * sin(1.7 * i + 0.9 * k + 0.1)
Inputs: x[j] = sin(0.5 * j + 0.3) over the flattened (B, T, D) array.
"""

import math
import sys

import torch
from torch import nn

torch.set_default_dtype(torch.float64)


def fill(params):
    for k, p in enumerate(params):
        flat = torch.tensor([0.3 * math.sin(1.7 * i + 0.9 * k + 0.1) for i in range(p.numel())])
        with torch.no_grad():
            p.copy_(flat.reshape(p.shape))


def inputs(b, t, d):
    return torch.tensor([math.sin(0.5 * j + 0.3) for j in range(b * t * d)]).reshape(b, t, d)


def sinusoid(length, dim):
    pe = torch.zeros(length, dim)
    for pos in range(length):
        for i in range(0, dim, 2):
            angle = pos / (10000 ** (i / dim))
            pe[pos, i] = math.sin(angle)
            pe[pos, i + 1] = math.cos(angle)
    return pe


def gru_head(d, hidden, b, t):
    layers = [nn.GRU(d, hidden, batch_first=True), nn.GRU(hidden, hidden, batch_first=True)]
    classifier = nn.Linear(hidden, 7)
    params = []
    for g in layers:
        params += [g.weight_ih_l0, g.weight_hh_l0, g.bias_ih_l0, g.bias_hh_l0]
    params += [classifier.weight, classifier.bias]
    fill(params)
    h = inputs(b, t, d)
    for g in layers:
        h, _ = g(h)
    return classifier(h)


def transformer_head(d, model_dim, heads, ffn, n_layers, b, t):
    proj = nn.Linear(d, model_dim)
    layers = [
        nn.TransformerEncoderLayer(model_dim, heads, ffn, dropout=0.0, batch_first=True, norm_first=True)
        for _ in range(n_layers)
    ]
    final_norm = nn.LayerNorm(model_dim)
    classifier = nn.Linear(model_dim, 7)
    params = [proj.weight, proj.bias]
    for layer in layers:
        params += [layer.norm1.weight, layer.norm1.bias, layer.self_attn.in_proj_weight, layer.self_attn.in_proj_bias,
                   layer.self_attn.out_proj.weight, layer.self_attn.out_proj.bias, layer.norm2.weight,
                   layer.norm2.bias, layer.linear1.weight, layer.linear1.bias, layer.linear2.weight,
                   layer.linear2.bias]
    params += [final_norm.weight, final_norm.bias, classifier.weight, classifier.bias]
    fill(params)
    for layer in layers:
        layer.eval()
    h = proj(inputs(b, t, d)) + sinusoid(t, model_dim)
    for layer in layers:
        h = layer(h)
    return classifier(final_norm(h))


def emit(name, tensor):
    values = ", ".join(f"{v:.17g}" for v in tensor.detach().reshape(-1).tolist())
    return f"inline const std::vector<double> {name} = {{{values}}};\n"


def main(out_path):
    with torch.no_grad():
        gru = gru_head(4, 5, 2, 3)
        tf = transformer_head(4, 6, 2, 8, 2, 2, 5)
    with open(out_path, "w") as f:
        f.write("#pragma once\n// Generated by tools/oracles/torch_heads.py; do not edit.\n\n#include <vector>\n\n")
        f.write("namespace oracle {\n\n")
        f.write("// GRU head: D=4, hidden=5, 2 layers, B=2, T=3.\n")
        f.write(emit("kGruLogits", gru))
        f.write("\n// Transformer head: D=4, model=6, heads=2, ffn=8, 2 layers, B=2, T=5.\n")
        f.write(emit("kTransformerLogits", tf))
        f.write("\n}  // namespace oracle\n")


if __name__ == "__main__":
    main(sys.argv[1])
