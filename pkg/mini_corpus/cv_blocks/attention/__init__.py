from .core import MultiHeadAttention, ScaledDotProduct
