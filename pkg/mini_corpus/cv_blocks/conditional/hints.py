TensorLike = object
