import torch.nn as nn

DEFAULT_GAIN = 1.4142


def init_weights(module, gain=DEFAULT_GAIN):
    if isinstance(module, nn.Linear):
        nn.init.xavier_uniform_(module.weight, gain=gain)
        if module.bias is not None:
            nn.init.zeros_(module.bias)


def _internal_probe(module):
    return sum(p.numel() for p in module.parameters())
