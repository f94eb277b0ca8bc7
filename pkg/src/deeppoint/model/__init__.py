"""DeepPoint generator and two-stream discriminator."""

from .blocks import deeppoint_block, mlp_shapes, point_features, with_global_feature
from .discriminator import discriminator_forward, discriminator_shapes, discriminator_tensor, global_dim
from .generator import BlockLayout, generator_forward, generator_layout, generator_shapes, generator_tensor
from .init import glorot_bound, init_model

__all__ = [
    "BlockLayout",
    "deeppoint_block",
    "discriminator_forward",
    "discriminator_shapes",
    "discriminator_tensor",
    "generator_forward",
    "generator_layout",
    "generator_shapes",
    "generator_tensor",
    "global_dim",
    "glorot_bound",
    "init_model",
    "mlp_shapes",
    "point_features",
    "with_global_feature",
]
