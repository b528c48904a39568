import torch.nn as nn

try:
    from fancy_ops import fused_gate as fast_op
except ImportError:
    def fast_op(x):
        return x * x.sigmoid()


class CondNet(nn.Module):
    def __init__(self, dim=8):
        super().__init__()
        self.fc = nn.Linear(dim, dim)

    def forward(self, x):
        return fast_op(self.fc(x))
