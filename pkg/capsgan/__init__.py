"""Capsule GAN - capsule networks in both players of a generative adversarial network."""

__version__ = "1.0.0"
