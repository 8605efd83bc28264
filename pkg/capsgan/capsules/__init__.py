"""Capsule primitives."""

from capsgan.capsules.routing import (
    DEFAULT_ITERATIONS,
    CapsuleBundle,
    RoutingState,
    dynamic_routing,
    predict_capsules,
    routing_softmax,
    squash,
)
from capsgan.capsules.layers import (
    CapsuleRouting,
    DigitCaps,
    GenerativeRouting,
    PrimaryCaps,
    capsules_to_feature_map,
    digit_caps,
    generative_routing,
    mask_by_norm,
    primary_caps,
)

__all__ = [
    "DEFAULT_ITERATIONS",
    "CapsuleBundle",
    "RoutingState",
    "dynamic_routing",
    "predict_capsules",
    "routing_softmax",
    "squash",
    "CapsuleRouting",
    "DigitCaps",
    "GenerativeRouting",
    "PrimaryCaps",
    "capsules_to_feature_map",
    "digit_caps",
    "generative_routing",
    "mask_by_norm",
    "primary_caps",
]
