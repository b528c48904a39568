import torch.nn as nn

from .misc import to_2tuple


class PatchEmbed(nn.Module):
    def __init__(self, img_size=224, patch=16, dim=768):
        super().__init__()
        size = to_2tuple(img_size)
        self.grid = (size[0] // patch, size[1] // patch)
        self.proj = nn.Conv2d(3, dim, kernel_size=patch, stride=patch)

    def forward(self, x):
        return self.proj(x).flatten(2).transpose(1, 2)
