"""Test-time data-scaling mechanics: frame selection and sub-clip averaging.

A stored archive keeps per-segment features unaveraged; analysis chooses how
many frames worth of signal to use by averaging the first s segments. Frame
selection for extraction uses uniform linear interpolation over [0, T-1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from platonic_align.archive import SegmentedMatrix
from platonic_align.errors import ParameterError


@dataclass(frozen=True)
class AggregationSpec:
    """How many frames a side uses: n_f frames over an n_o-frame encoder.

    ``segments_used`` is n_f / n_o when n_f is a multiple of n_o; archives
    must hold at least that many segments.
    """

    native_clip_len: int
    n_f: int
    segments_used: int

    def __post_init__(self) -> None:
        for name in ("native_clip_len", "n_f", "segments_used"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {value!r}")

    @classmethod
    def for_frames(cls, n_f: int, native_clip_len: int = 16) -> "AggregationSpec":
        """Spec for n_f frames; n_f must be a positive multiple of n_o."""
        if not isinstance(n_f, int) or n_f < 1:
            raise ParameterError(f"n_f must be an integer >= 1, got {n_f!r}")
        if not isinstance(native_clip_len, int) or native_clip_len < 1:
            raise ParameterError(f"native_clip_len must be >= 1, got {native_clip_len!r}")
        if n_f % native_clip_len:
            raise ParameterError(
                f"n_f = {n_f} is not a multiple of native_clip_len = {native_clip_len}"
            )
        return cls(
            native_clip_len=native_clip_len, n_f=n_f, segments_used=n_f // native_clip_len
        )


def frame_indices(total_frames: int, n_f: int) -> list[int]:
    """Uniformly spaced frame indices in [0, T).

    n_f = 1 picks frame 0. Otherwise index_j = round(j * (T-1) / (n_f-1))
    with round-half-up, done in exact integer arithmetic; indices are
    non-decreasing, start at 0, end at T-1, and repeat when n_f > T.
    """
    if not isinstance(total_frames, int) or total_frames < 1:
        raise ParameterError(f"total_frames must be an integer >= 1, got {total_frames!r}")
    if not isinstance(n_f, int) or n_f < 1:
        raise ParameterError(f"n_f must be an integer >= 1, got {n_f!r}")
    if n_f == 1:
        return [0]
    span = total_frames - 1
    step = n_f - 1
    # round-half-up(j*span/step) == floor(j*span/step + 1/2), kept exact.
    return [(2 * j * span + step) // (2 * step) for j in range(n_f)]


def mean_segments(m: SegmentedMatrix | np.ndarray, s: int) -> np.ndarray:
    """Average the first s segments: [N, S, D] -> [N, D] in float64."""
    data = m.data if isinstance(m, SegmentedMatrix) else np.asarray(m)
    if data.ndim != 3:
        raise ParameterError(f"expected [N, S, D] segments, got shape {data.shape}")
    total = data.shape[1]
    if not isinstance(s, (int, np.integer)) or isinstance(s, bool) or not 1 <= s <= total:
        raise ParameterError(f"s must satisfy 1 <= s <= S = {total}, got {s!r}")
    if s == 1:
        return data[:, 0, :].astype(np.float64)
    return np.mean(data[:, :s, :], axis=1, dtype=np.float64)
