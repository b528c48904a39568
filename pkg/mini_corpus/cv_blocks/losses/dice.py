import torch.nn as nn

from .focal import _reduce


class DiceLoss(nn.Module):
    def __init__(self, smooth=1.0, reduction="mean"):
        super().__init__()
        self.smooth = smooth
        self.reduction = reduction

    def forward(self, probs, target):
        num = 2 * (probs * target).sum(dim=-1) + self.smooth
        den = probs.sum(dim=-1) + target.sum(dim=-1) + self.smooth
        return _reduce(1 - num / den, self.reduction)
