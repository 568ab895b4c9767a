"""Counter-based random streams for reproducible Monte-Carlo runs.

All randomness in this package flows through Philox(4x64) generators keyed
by ``(seed, stream id)``.  Philox streams with distinct keys are independent
and do not interact, so a sweep produces the same numbers no matter in which
order (or on how many threads) its trials execute.

Stream-id layout, per Monte-Carlo trial ``t``:

    16*t          channel draw for trial t (user placement + fading)
    16*t + 1 + s  scheme-internal draws for trial t, scheme ordinal s (0..4)

Ordinals follow :class:`starris.bcd.Scheme` declaration order.
"""

from __future__ import annotations

import numpy as np

_TRIAL_STRIDE = 16


def substream(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for (seed, stream id)."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative 64-bit integer")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def channel_stream(seed: int, trial: int) -> np.random.Generator:
    return substream(seed, _TRIAL_STRIDE * trial)


def scheme_stream(seed: int, trial: int, scheme_ordinal: int) -> np.random.Generator:
    if not 0 <= scheme_ordinal < _TRIAL_STRIDE - 1:
        raise ValueError(f"scheme ordinal {scheme_ordinal} out of range")
    return substream(seed, _TRIAL_STRIDE * trial + 1 + scheme_ordinal)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0,1) samples: unit-variance circularly symmetric complex Gaussians."""
    parts = rng.standard_normal(size=(*np.atleast_1d(shape), 2))
    return (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2.0)
