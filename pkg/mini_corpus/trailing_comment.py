import torch.nn as nn


class TrailingNet(nn.Module):
    def forward(self, x):
        return x


# fixture notes:
# the trailing comment block belongs to the synthetic end node
