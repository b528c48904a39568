import torch.nn as nn

ELU_SHIFT = 1.0


class LinearAttention(nn.Module):
    """Attention with kernelized similarity, linear in sequence length."""

    def __init__(self, dim):
        super().__init__()
        self.to_qkv = nn.Linear(dim, dim * 3)

    def forward(self, x):
        q, k, v = self.to_qkv(x).chunk(3, dim=-1)
        q = nn.functional.elu(q) + ELU_SHIFT
        k = nn.functional.elu(k) + ELU_SHIFT
        context = k.transpose(-2, -1) @ v
        return q @ context / q.size(-1)
