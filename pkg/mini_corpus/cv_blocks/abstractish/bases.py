import abc

import torch.nn as nn


class AbstractBlock(nn.Module, abc.ABC):
    """Contract for trainable blocks."""

    @abc.abstractmethod
    def forward(self, x):
        ...

    def extra_repr(self):
        return "abstract"
