"""Shared fixtures: synthetic archive builders used across the test suite."""

import numpy as np
import pytest

from platonic_align.archive import ArchiveManifest, open_archive, write_archive


def build_archive(
    path,
    tensor,
    model_id="toy-encoder",
    modality="vision",
    item_ids=None,
    variant=None,
):
    """Write a [L, N, S, D] tensor as an archive directory and reopen it."""
    tensor = np.asarray(tensor, dtype=np.float32)
    layers, n, segments, dim = tensor.shape
    if item_ids is None:
        item_ids = [f"item-{i:04d}" for i in range(n)]
    manifest = ArchiveManifest(
        model_id=model_id,
        modality=modality,
        item_count=n,
        layer_count=layers,
        dim=dim,
        segment_count=segments,
        item_ids=list(item_ids),
        variant=dict(variant or {}),
    )
    write_archive(manifest, tensor, path)
    return open_archive(path)


def random_archive(path, rng, n=6, layers=2, segments=1, dim=4, **kwargs):
    tensor = rng.standard_normal((layers, n, segments, dim)).astype(np.float32)
    return build_archive(path, tensor, **kwargs)


@pytest.fixture
def archive_factory(tmp_path):
    """Callable writing archives under unique tmp subdirectories."""
    counter = {"n": 0}

    def factory(tensor=None, rng=None, **kwargs):
        counter["n"] += 1
        path = tmp_path / f"archive-{counter['n']:03d}"
        if tensor is not None:
            return build_archive(path, tensor, **kwargs)
        return random_archive(path, rng or np.random.default_rng(0), **kwargs)

    return factory
