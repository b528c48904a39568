import torch.nn as nn

from .blocks import ConvBlock


class ResidualUnit(ConvBlock):
    def __init__(self, channels):
        super().__init__(channels, channels)

    def forward(self, x):
        return x + super().forward(x)
