"""Token pooling: one vector per layer from a [tokens, dim] state."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

POOLINGS = ("class_token", "token_mean")


def pool(hidden: np.ndarray, pooling: str, has_class_token: bool) -> np.ndarray:
    """Reduce one layer's token states to a single feature vector.

    class_token selects the designated token's state (row 0) and is only
    valid for encoders that prepend one; token_mean is the arithmetic mean
    over every stored token row.
    """
    hidden = np.asarray(hidden, dtype=np.float64)
    if hidden.ndim != 2 or hidden.shape[0] < 1:
        raise ConfigError(f"expected a non-empty [tokens, dim] state, got shape {hidden.shape}")
    if pooling == "class_token":
        if not has_class_token:
            raise ConfigError("class_token pooling requires an encoder that exposes one")
        return hidden[0].copy()
    if pooling == "token_mean":
        return hidden.mean(axis=0)
    raise ConfigError(f"unknown pooling {pooling!r}; expected one of {POOLINGS}")
