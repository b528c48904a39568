import collections.abc


def to_2tuple(value):
    if isinstance(value, collections.abc.Iterable) and not isinstance(value, str):
        return tuple(value)
    return (value, value)


def trunc_normal_(tensor, std=0.02):
    return tensor.normal_(0.0, std).clamp_(-2 * std, 2 * std)
