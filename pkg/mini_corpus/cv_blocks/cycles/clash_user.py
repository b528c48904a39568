from .name_clash_a import ClashBase
from .name_clash_b import helper


class ClashNet(ClashBase):
    def apply_helper(self, x):
        return helper(x)
