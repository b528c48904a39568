"""Attention primitives."""

import math

import torch
import torch.nn as nn


def make_causal_mask(size):
    mask = torch.full((size, size), float("-inf"))
    return torch.triu(mask, diagonal=1)


class ScaledDotProduct(nn.Module):
    def __init__(self, scale=None):
        super().__init__()
        self.scale = scale

    def forward(self, q, k, v, causal=False):
        scale = self.scale or 1.0 / math.sqrt(q.size(-1))
        scores = q @ k.transpose(-2, -1) * scale
        if causal:
            scores = scores + make_causal_mask(scores.size(-1))
        return scores.softmax(dim=-1) @ v


class MultiHeadAttention(nn.Module):
    """Multi-head attention over a shared scaled-dot-product core."""

    def __init__(self, dim, heads=8):
        super().__init__()
        self.heads = heads
        self.qkv = nn.Linear(dim, dim * 3)
        self.proj = nn.Linear(dim, dim)
        self.inner = ScaledDotProduct()

    def forward(self, x, causal=False):
        b, n, d = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        out = self.inner(q, k, v, causal=causal)
        return self.proj(out.reshape(b, n, d))
