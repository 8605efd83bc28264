"""Latent sampling, image generation and GAN checkpoints."""

from typing import Optional

import numpy as np
import orjson
from pydantic import ValidationError

from capsgan.data.checkpoint import ModelCheckpoint
from capsgan.networks import Gan, build_gan
from capsgan.schemas.network import NetworkSpec
from capsgan.tensor import no_grad
from capsgan.tensor.tensor import DTYPE, Tensor
from capsgan.utils.exceptions import CheckpointArchitectureError, MissingDigitCapsSourceError
from capsgan.utils.seeding import Stream, stream_rng

GAN_KIND = "gan"


def sample_latent(rng: np.random.Generator, batch: int, dim: int) -> Tensor:
    """z ~ N(0, 1), batch x dim."""
    return Tensor(rng.standard_normal((batch, dim)).astype(DTYPE))


def masked_digitcaps(gan: Gan, images: np.ndarray) -> Tensor:
    """Masked DigitCaps of the discriminator applied to `images`, without gradient."""
    with no_grad():
        return gan.discriminator(Tensor(images)).masked_digitcaps()


def generate_images(gan: Gan, n: int, seed: int, reference: Optional[np.ndarray] = None,
                    chunk: int = 100, action: str = "generate images") -> np.ndarray:
    """
    Generate `n` images in eval mode, `chunk` at a time.

    Latents come from the sample stream. capsgan2 pairs the i-th latent with
    the masked DigitCaps of reference image i (cycled when there are fewer).
    """
    if gan.spec.needs_digitcaps and (reference is None or len(reference) == 0):
        raise MissingDigitCapsSourceError(action)

    rng = stream_rng(seed, Stream.SAMPLE)
    z_all = rng.standard_normal((n, gan.spec.latent_dim)).astype(DTYPE)
    was_training = gan.generator.training
    gan.eval()
    out = []
    try:
        with no_grad():
            for start in range(0, n, chunk):
                z = Tensor(z_all[start:start + chunk])
                d = None
                if gan.spec.needs_digitcaps:
                    index = np.arange(start, start + z.shape[0]) % len(reference)
                    d = masked_digitcaps(gan, reference[index])
                out.append(gan.generator(z, d).data)
    finally:
        if was_training:
            gan.train()
    return np.concatenate(out, axis=0)


def spec_from_checkpoint(checkpoint: ModelCheckpoint) -> NetworkSpec:
    if checkpoint.attributes.get("kind") != GAN_KIND or "network_spec" not in checkpoint.attributes:
        raise CheckpointArchitectureError(
            "Checkpoint does not hold a GAN",
            {"kind": checkpoint.attributes.get("kind"), "architecture": checkpoint.architecture}
        )
    try:
        return NetworkSpec(**orjson.loads(checkpoint.attributes["network_spec"]))
    except (orjson.JSONDecodeError, ValidationError) as e:
        raise CheckpointArchitectureError(f"Stored network spec is invalid: {e}", {"architecture": checkpoint.architecture})


def gan_from_checkpoint(checkpoint: ModelCheckpoint) -> Gan:
    """Rebuild both networks with the stored widths and weights."""
    spec = spec_from_checkpoint(checkpoint)
    if spec.architecture.value != checkpoint.architecture:
        raise CheckpointArchitectureError(
            "Checkpoint architecture disagrees with its network spec",
            {"architecture": checkpoint.architecture, "spec": spec.architecture.value}
        )
    gan = build_gan(spec, checkpoint.seed)
    gan.discriminator.load_state_dict(checkpoint.subset("discriminator"))
    gan.generator.load_state_dict(checkpoint.subset("generator"))
    return gan
