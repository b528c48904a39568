import torch.nn as nn

from ..norm.layers import LayerScale, gelu_exact


class MiniBertLayer(nn.Module):
    def __init__(self, dim, hidden):
        super().__init__()
        self.dense_in = nn.Linear(dim, hidden)
        self.dense_out = nn.Linear(hidden, dim)
        self.scale = LayerScale(dim)

    def forward(self, x):
        h = gelu_exact(self.dense_in(x))
        return x + self.scale(self.dense_out(h))
