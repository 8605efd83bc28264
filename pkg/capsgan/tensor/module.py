"""Parameter containers for networks built from tensor operations."""

from typing import Dict, Iterator, List, Tuple

import numpy as np

from capsgan.tensor.tensor import DTYPE, Tensor
from capsgan.utils.exceptions import CheckpointArchitectureError


class Module:
    """
    Base class for layers and networks.

    Trainable tensors are attributes holding `Tensor`s with requires_grad;
    non-trainable state (running statistics) lives in `_buffers`. Child modules
    are attributes or lists of modules. Names are dotted attribute paths.
    """

    def __init__(self) -> None:
        self.training = True
        self._buffers: Dict[str, np.ndarray] = {}

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def register_buffer(self, name: str, value: np.ndarray) -> None:
        self._buffers[name] = np.asarray(value, dtype=DTYPE)

    def _children(self) -> Iterator[Tuple[str, "Module"]]:
        for name, value in vars(self).items():
            if isinstance(value, Module):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{name}.{index}", item

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, value in vars(self).items():
            if isinstance(value, Tensor) and value.requires_grad:
                yield prefix + name, value
        for name, child in self._children():
            yield from child.named_parameters(f"{prefix}{name}.")

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        for name, value in self._buffers.items():
            yield prefix + name, value
        for name, child in self._children():
            yield from child.named_buffers(f"{prefix}{name}.")

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def train(self, mode: bool = True) -> "Module":
        self.training = mode
        for _, child in self._children():
            child.train(mode)
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Parameters then buffers, copied."""
        state = {name: p.data.copy() for name, p in self.named_parameters()}
        state.update({name: b.copy() for name, b in self.named_buffers()})
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """
        Replace every parameter and buffer with the stored value.

        Raises:
            CheckpointArchitectureError: names or shapes differ from this module
        """
        own = {**dict(self.named_parameters()), **dict(self.named_buffers())}
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise CheckpointArchitectureError(
                "Stored tensors do not match the network",
                {"missing": missing[:10], "unexpected": unexpected[:10]}
            )
        for name, target in own.items():
            value = np.asarray(state[name], dtype=DTYPE)
            current = target.data if isinstance(target, Tensor) else target
            if value.shape != current.shape:
                raise CheckpointArchitectureError(
                    f"Shape mismatch for {name}",
                    {"name": name, "stored": list(value.shape), "expected": list(current.shape)}
                )
            if isinstance(target, Tensor):
                target.data = value.copy()
            else:
                target[...] = value
