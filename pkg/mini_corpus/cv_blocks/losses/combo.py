import torch.nn as nn

from cv_blocks.losses import FocalLoss


class ComboLoss(nn.Module):
    def __init__(self):
        super().__init__()
        self.focal = FocalLoss()

    def forward(self, logits, target):
        return self.focal(logits, target) + 0.1
