import numpy as np
import torch.nn as nn


class AliasNet(nn.Module):
    def __init__(self, dim=8):
        super().__init__()
        self.scale = float(np.sqrt(dim))
        self.fc = nn.Linear(dim, dim)

    def forward(self, x):
        return self.fc(x) / self.scale
