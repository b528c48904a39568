import torch.nn as nn

from .codec import encode_patches


def window_partition(x, size):
    b, h, w, c = x.shape
    x = x.view(b, h // size, size, w // size, size, c)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(-1, size, size, c)


def window_reverse(windows, size, h, w):
    b = windows.shape[0] // (h * w // size // size)
    x = windows.view(b, h // size, w // size, size, size, -1)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(b, h, w, -1)


class WindowBlock(nn.Module):
    """Windowed mixing over shifted patches."""

    def __init__(self, dim, window=7):
        super().__init__()
        self.window = window
        self.mix = nn.Linear(dim, dim)

    def forward(self, x):
        h, w = x.shape[1], x.shape[2]
        windows = window_partition(x, self.window)
        mixed = self.mix(encode_patches(windows))
        return window_reverse(mixed, self.window, h, w)
