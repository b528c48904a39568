import torch
import torch.nn as nn

_CAT_DIM = 1


class GlobalMaxPool(nn.Module):
    def forward(self, x):
        return x.amax(dim=(2, 3))


class AdaptiveConcatPool(nn.Module):
    """Concatenated average and max pooling over spatial dims."""

    def __init__(self, output_size=1):
        super().__init__()
        self.avg = nn.AdaptiveAvgPool2d(output_size)
        self.max = nn.AdaptiveMaxPool2d(output_size)

    def forward(self, x):
        return torch.cat([self.avg(x), self.max(x)], dim=_CAT_DIM)
