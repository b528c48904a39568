import torch.nn as nn


class CrlfNet(nn.Module):
    def forward(self, x):
        return x
