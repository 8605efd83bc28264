"""Central finite-difference checks of analytic gradients."""

from contextlib import nullcontext
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from capsgan.tensor.functional import mul, sum
from capsgan.tensor.tensor import Tensor, backward, float64_precision, no_grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / max(||a||, ||n||), zero when both vanish."""
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    scale = max(np.linalg.norm(a), np.linalg.norm(n))
    if scale < 1e-12:
        return 0.0
    return float(np.linalg.norm(a - n) / scale)


def check_gradients(
    fn: Callable[[], Tensor],
    inputs: Dict[str, Tensor],
    h: float = 1e-3,
    max_entries: Optional[int] = None,
    seed: int = 0,
    float64: bool = False,
) -> Dict[str, float]:
    """
    Compare backward against central differences for every tensor in `inputs`.

    `fn` recomputes the output from the current input values. Its output is
    contracted with a fixed random cotangent so every element contributes; the
    numeric side accumulates that contraction in float64.

    Args:
        fn: recomputes the output tensor
        inputs: named tensors with requires_grad
        h: finite-difference step
        max_entries: check at most this many randomly chosen entries per input
        seed: selects the cotangent and the checked entries
        float64: run forward and backward under `float64_precision`, for whole
            networks whose gradients sit below float32 difference resolution

    Returns:
        relative error per input name
    """
    with float64_precision(*inputs.values()) if float64 else nullcontext():
        return _check(fn, inputs, h, max_entries, np.random.default_rng(seed))


def _check(fn, inputs, h, max_entries, rng) -> Dict[str, float]:
    out = fn()
    cotangent = Tensor(rng.uniform(-1.0, 1.0, size=out.shape))
    cotangent64 = cotangent.data.astype(np.float64)

    for t in inputs.values():
        t.zero_grad()
    backward(sum(mul(out, cotangent)))

    def objective() -> float:
        with no_grad():
            return float(np.sum(fn().data.astype(np.float64) * cotangent64))

    errors: Dict[str, float] = {}
    for name, t in inputs.items():
        analytic = np.zeros(t.shape) if t.grad is None else t.grad.astype(np.float64)
        flat = t.data.reshape(-1)
        entries: Sequence[int] = range(flat.size)
        if max_entries is not None and flat.size > max_entries:
            entries = np.sort(rng.choice(flat.size, size=max_entries, replace=False))

        numeric = np.zeros(len(entries))
        for slot, index in enumerate(entries):
            original = flat[index]
            flat[index] = original + h
            high, plus = float(flat[index]), objective()
            flat[index] = original - h
            low, minus = float(flat[index]), objective()
            flat[index] = original
            numeric[slot] = (plus - minus) / (high - low)

        errors[name] = relative_error(analytic.reshape(-1)[list(entries)], numeric)

    return errors
