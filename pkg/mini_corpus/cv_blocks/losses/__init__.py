from .focal import FocalLoss
from .dice import DiceLoss
