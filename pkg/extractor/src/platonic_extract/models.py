"""Encoder registry.

The registered encoders are small deterministic networks whose weights are
derived from the model id, so extraction is reproducible bit-for-bit on any
machine with no weight downloads. They expose the same surface a wrapped
pretrained encoder would: per-layer token states (embedding layer included)
for a fixed-length sub-clip or a caption string. New encoders join by
calling register().
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ConfigError, ModelError

PATCH_GRID = 2  # frames are pooled to a PATCH_GRID x PATCH_GRID token grid
_TEXT_POSITIONS = 512


def _seed_from(*parts: str) -> int:
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class ToyEncoder:
    """Shared layer stack: residual tanh mixing with a mean-token channel."""

    def __init__(self, model_id: str, modality: str, dim: int, hidden_layers: int,
                 has_class_token: bool):
        self.model_id = model_id
        self.modality = modality
        self.dim = dim
        self.hidden_layers = hidden_layers
        self.has_class_token = has_class_token
        rng = np.random.default_rng(_seed_from("weights", model_id))
        scale = 1.0 / np.sqrt(dim)
        self._mix = [
            (
                rng.standard_normal((dim, dim)) * scale,
                rng.standard_normal((dim, dim)) * scale,
                rng.standard_normal(dim) * scale,
            )
            for _ in range(hidden_layers)
        ]
        self._class_vector = rng.standard_normal(dim)

    @property
    def layer_count(self) -> int:
        """Stored hidden states per item: the embedding layer plus each block."""
        return self.hidden_layers + 1

    def _run_layers(self, tokens: np.ndarray) -> list[np.ndarray]:
        if self.has_class_token:
            tokens = np.vstack([self._class_vector, tokens])
        states = [tokens]
        h = tokens
        for w, u, b in self._mix:
            h = h + np.tanh(h @ w + h.mean(axis=0) @ u + b)
            states.append(h)
        return states


class ToyVisionEncoder(ToyEncoder):
    """Patch-pooled frame tokens for sub-clips of exactly native_clip_len frames."""

    def __init__(self, model_id: str, dim: int, hidden_layers: int, native_clip_len: int,
                 has_class_token: bool):
        super().__init__(model_id, "vision", dim, hidden_layers, has_class_token)
        self.native_clip_len = native_clip_len
        rng = np.random.default_rng(_seed_from("vision-front", model_id))
        self._patch_proj = rng.standard_normal((3, dim))
        self._positions = rng.standard_normal(
            (native_clip_len * PATCH_GRID * PATCH_GRID, dim)
        ) / np.sqrt(dim)

    def _frame_tokens(self, frame: np.ndarray) -> np.ndarray:
        h, w = frame.shape[0], frame.shape[1]
        if h < PATCH_GRID or w < PATCH_GRID:
            raise ConfigError(f"frame {h}x{w} smaller than the {PATCH_GRID}x{PATCH_GRID} patch grid")
        rows = np.array_split(frame, PATCH_GRID, axis=0)
        patches = [p.mean(axis=(0, 1)) for row in rows for p in np.array_split(row, PATCH_GRID, axis=1)]
        return np.stack(patches).astype(np.float64) @ self._patch_proj

    def encode_clip(self, clip: np.ndarray) -> list[np.ndarray]:
        """Per-layer token states for one [n_o, H, W, 3] sub-clip."""
        clip = np.asarray(clip, dtype=np.float64)
        if clip.ndim != 4 or clip.shape[-1] != 3:
            raise ConfigError(f"expected a [n_o, H, W, 3] clip, got shape {clip.shape}")
        if clip.shape[0] != self.native_clip_len:
            raise ConfigError(
                f"{self.model_id} processes clips of {self.native_clip_len} frames, "
                f"got {clip.shape[0]}"
            )
        tokens = np.concatenate([self._frame_tokens(f) for f in clip])
        return self._run_layers(tokens + self._positions)


class ToyTextEncoder(ToyEncoder):
    """Hashed word embeddings plus positional offsets over whitespace tokens."""

    def __init__(self, model_id: str, dim: int, hidden_layers: int, has_class_token: bool):
        super().__init__(model_id, "text", dim, hidden_layers, has_class_token)
        rng = np.random.default_rng(_seed_from("text-front", model_id))
        self._positions = rng.standard_normal((_TEXT_POSITIONS, dim)) / np.sqrt(dim)

    def _word_vector(self, word: str) -> np.ndarray:
        rng = np.random.default_rng(_seed_from("word", self.model_id, word))
        return rng.standard_normal(self.dim)

    def encode_text(self, text: str) -> list[np.ndarray]:
        """Per-layer token states for one caption string."""
        words = text.split()
        if not words:
            raise ConfigError("cannot encode an empty caption")
        tokens = np.stack([
            self._word_vector(w) + self._positions[i % _TEXT_POSITIONS]
            for i, w in enumerate(words)
        ])
        return self._run_layers(tokens)


_REGISTRY = {}


def register(model_id: str, factory) -> None:
    if model_id in _REGISTRY:
        raise ModelError(f"model id {model_id!r} already registered")
    _REGISTRY[model_id] = factory


def list_models() -> list[str]:
    return sorted(_REGISTRY)


def load_model(model_id: str):
    try:
        factory = _REGISTRY[model_id]
    except KeyError:
        known = ", ".join(list_models())
        raise ModelError(f"unknown model id {model_id!r}; known: {known}") from None
    return factory(model_id)


register("toy/vision-tiny",
         lambda mid: ToyVisionEncoder(mid, dim=16, hidden_layers=3, native_clip_len=2,
                                      has_class_token=True))
register("toy/vision-image",
         lambda mid: ToyVisionEncoder(mid, dim=12, hidden_layers=2, native_clip_len=1,
                                      has_class_token=False))
register("toy/text-tiny",
         lambda mid: ToyTextEncoder(mid, dim=16, hidden_layers=3, has_class_token=False))
register("toy/text-cls",
         lambda mid: ToyTextEncoder(mid, dim=8, hidden_layers=2, has_class_token=True))
