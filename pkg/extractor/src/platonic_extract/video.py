"""Frame decoding and frame-budget planning.

Clips are stored as ``.npy`` stacks shaped [T, H, W, 3] (or a list of
single-frame [H, W, 3] files); real container formats are out of scope and
would slot in here. Frame selection for a budget of n_f frames is uniform
linear interpolation over the clip's native frame indices, with exact
integer round-half-up so plans are reproducible across platforms.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import DatasetItem
from .errors import ConfigError, DecodeError


def frame_indices(total_frames: int, n_f: int) -> list[int]:
    """Indices of n_f frames spread uniformly over [0, total_frames - 1]."""
    if not isinstance(total_frames, int) or total_frames < 1:
        raise ConfigError(f"total_frames must be a positive int, got {total_frames!r}")
    if not isinstance(n_f, int) or n_f < 1:
        raise ConfigError(f"n_f must be a positive int, got {n_f!r}")
    if n_f == 1:
        return [0]
    span, step = total_frames - 1, n_f - 1
    # round(j * span / step) with half-up ties, in exact integer arithmetic
    return [(2 * j * span + step) // (2 * step) for j in range(n_f)]


def _load_frame_array(path: str) -> np.ndarray:
    try:
        array = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    return np.asarray(array, dtype=np.float32)


def decode_item(item: DatasetItem) -> np.ndarray:
    """Decode an item's visual source to a float32 [T, H, W, 3] stack."""
    if item.video_path is not None:
        stack = _load_frame_array(item.video_path)
        if stack.ndim != 4 or stack.shape[-1] != 3 or stack.shape[0] < 1:
            raise DecodeError(
                f"{item.video_path}: expected a [T, H, W, 3] stack, got shape {stack.shape}"
            )
        return stack
    frames = []
    for path in item.frames:
        frame = _load_frame_array(path)
        if frame.ndim != 3 or frame.shape[-1] != 3:
            raise DecodeError(f"{path}: expected a [H, W, 3] frame, got shape {frame.shape}")
        frames.append(frame)
    if len({f.shape for f in frames}) != 1:
        raise DecodeError(f"item {item.item_id!r}: frame shapes differ")
    return np.stack(frames)


def plan_segments(stack: np.ndarray, n_f: int, n_o: int) -> np.ndarray:
    """Select n_f frames uniformly and split them into n_f / n_o sub-clips.

    Returns a [S, n_o, H, W, 3] array with S = n_f / n_o; n_f must be a
    positive multiple of n_o. Consecutive runs of n_o selected frames form
    one sub-clip, so using the first s segments downstream reads a temporal
    prefix of the selection.
    """
    if not isinstance(n_o, int) or n_o < 1:
        raise ConfigError(f"n_o must be a positive int, got {n_o!r}")
    if n_f % n_o != 0:
        raise ConfigError(f"n_f = {n_f} is not a multiple of the clip length n_o = {n_o}")
    selected = stack[frame_indices(stack.shape[0], n_f)]
    segments = n_f // n_o
    return selected.reshape(segments, n_o, *stack.shape[1:])


def write_frame_stack(path: str | Path, stack: np.ndarray) -> None:
    """Persist a [T, H, W, 3] float32 stack; the decoder's inverse."""
    stack = np.asarray(stack, dtype=np.float32)
    if stack.ndim != 4 or stack.shape[-1] != 3:
        raise ConfigError(f"expected a [T, H, W, 3] stack, got shape {stack.shape}")
    np.save(path, stack, allow_pickle=False)
