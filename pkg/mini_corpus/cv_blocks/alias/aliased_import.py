import torch.nn as nn

from .named import fancy_act as act


class ActAliasNet(nn.Module):
    def __init__(self, dim=8):
        super().__init__()
        self.fc = nn.Linear(dim, dim)

    def forward(self, x):
        return act(self.fc(x))
