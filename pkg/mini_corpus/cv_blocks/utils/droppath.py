import torch


def drop_path(x, prob=0.0, training=False):
    if prob == 0.0 or not training:
        return x
    keep = 1.0 - prob
    mask = torch.empty(x.shape[0], 1, 1, 1, device=x.device).bernoulli_(keep)
    return x / keep * mask


class DropPath(torch.nn.Module):
    """Per-sample residual-branch dropout."""

    def __init__(self, prob=0.1):
        super().__init__()
        self.prob = prob

    def forward(self, x):
        return drop_path(x, self.prob, self.training)
