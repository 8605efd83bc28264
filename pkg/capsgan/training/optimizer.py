"""Adam optimizer over named parameters."""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from capsgan.tensor.tensor import DTYPE, Tensor
from capsgan.utils.exceptions import CheckpointArchitectureError, NumericalFailureError


@dataclass
class AdamState:
    """First and second moments per parameter name plus the step count."""

    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


class Adam:
    """
    Bias-corrected Adam.

    m = b1 m + (1 - b1) g, v = b2 v + (1 - b2) g^2,
    p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
    Parameters without a gradient keep their moments and value.
    """

    def __init__(self, named_parameters: List[Tuple[str, Tensor]], lr: float = 2e-4,
                 beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(named_parameters)
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
        for name, p in self.params:
            self.state.m[name] = np.zeros_like(p.data)
            self.state.v[name] = np.zeros_like(p.data)

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.zero_grad()

    def step(self) -> None:
        """
        Apply one update.

        Raises:
            NumericalFailureError: a gradient holds NaN or Inf; no parameter is changed
        """
        for name, p in self.params:
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise NumericalFailureError(f"non-finite gradient for {name}", details={"parameter": name})

        s = self.state
        s.t += 1
        correction1 = 1.0 - s.beta1 ** s.t
        correction2 = 1.0 - s.beta2 ** s.t
        for name, p in self.params:
            if p.grad is None:
                continue
            g = p.grad.astype(DTYPE, copy=False)
            m, v = s.m[name], s.v[name]
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * g * g
            update = s.lr * (m / correction1) / (np.sqrt(v / correction2) + s.eps)
            p.data = (p.data - update).astype(DTYPE)

    def state_tensors(self, prefix: str) -> Dict[str, np.ndarray]:
        """Moments named <prefix>/m/<param> and <prefix>/v/<param>."""
        tensors = {f"{prefix}/m/{name}": m.copy() for name, m in self.state.m.items()}
        tensors.update({f"{prefix}/v/{name}": v.copy() for name, v in self.state.v.items()})
        return tensors

    def load_state_tensors(self, prefix: str, tensors: Dict[str, np.ndarray], t: int) -> None:
        for kind, store in (("m", self.state.m), ("v", self.state.v)):
            for name in store:
                key = f"{prefix}/{kind}/{name}"
                if key not in tensors or tensors[key].shape != store[name].shape:
                    raise CheckpointArchitectureError(f"Optimizer state {key} is missing or misshapen", {"name": key})
                store[name] = np.array(tensors[key], dtype=DTYPE)
        self.state.t = t
