import numpy as np
import pytest

from platonic_extract.errors import ConfigError, ModelError
from platonic_extract.models import list_models, load_model, register
from platonic_extract.pooling import pool


def sample_clip(rng, n_o, size=4):
    return rng.uniform(0.0, 1.0, size=(n_o, size, size, 3))


class TestRegistry:
    def test_known_models_listed(self):
        listed = list_models()
        for model_id in ("toy/vision-tiny", "toy/vision-image", "toy/text-tiny", "toy/text-cls"):
            assert model_id in listed

    def test_unknown_model_names_known_ids(self):
        with pytest.raises(ModelError, match="toy/vision-tiny"):
            load_model("toy/nope")

    def test_duplicate_registration_rejected(self):
        with pytest.raises(ModelError, match="already registered"):
            register("toy/vision-tiny", lambda mid: None)


class TestVisionEncoder:
    def test_deterministic_across_instances(self):
        rng = np.random.default_rng(42)
        clip = sample_clip(rng, 2)
        a = load_model("toy/vision-tiny").encode_clip(clip)
        b = load_model("toy/vision-tiny").encode_clip(clip)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_layer_count_includes_embedding(self):
        model = load_model("toy/vision-tiny")
        states = model.encode_clip(sample_clip(np.random.default_rng(42), 2))
        assert len(states) == model.layer_count == model.hidden_layers + 1

    def test_class_token_prepended(self):
        rng = np.random.default_rng(42)
        model = load_model("toy/vision-tiny")
        states = model.encode_clip(sample_clip(rng, 2))
        tokens_per_clip = 2 * 4  # n_o frames x 2x2 patch grid
        assert all(s.shape == (tokens_per_clip + 1, model.dim) for s in states)
        classless = load_model("toy/vision-image")
        states = classless.encode_clip(sample_clip(rng, 1))
        assert all(s.shape == (4, classless.dim) for s in states)

    def test_content_changes_every_layer(self):
        rng = np.random.default_rng(42)
        model = load_model("toy/vision-tiny")
        a = model.encode_clip(sample_clip(rng, 2))
        b = model.encode_clip(sample_clip(rng, 2))
        for x, y in zip(a, b):
            assert not np.allclose(x, y)

    def test_wrong_clip_length_rejected(self):
        model = load_model("toy/vision-tiny")
        with pytest.raises(ConfigError, match="2 frames"):
            model.encode_clip(sample_clip(np.random.default_rng(42), 3))

    def test_tiny_frames_rejected(self):
        model = load_model("toy/vision-image")
        with pytest.raises(ConfigError, match="patch grid"):
            model.encode_clip(np.zeros((1, 1, 1, 3)))


class TestTextEncoder:
    def test_deterministic_across_instances(self):
        a = load_model("toy/text-tiny").encode_text("a dog runs")
        b = load_model("toy/text-tiny").encode_text("a dog runs")
        for x, y in zip(a, b):
            assert np.array_equal(x, y)

    def test_word_order_changes_states(self):
        """Positional offsets make token order observable."""
        model = load_model("toy/text-tiny")
        forward = model.encode_text("dog bites man")[-1]
        reverse = model.encode_text("man bites dog")[-1]
        assert not np.allclose(forward.mean(axis=0), reverse.mean(axis=0))

    def test_one_token_per_word(self):
        model = load_model("toy/text-tiny")
        states = model.encode_text("three word caption")
        assert all(s.shape == (3, model.dim) for s in states)

    def test_empty_caption_rejected(self):
        with pytest.raises(ConfigError, match="empty caption"):
            load_model("toy/text-tiny").encode_text("   ")


class TestPooling:
    def test_class_token_is_row_zero(self):
        rng = np.random.default_rng(42)
        hidden = rng.standard_normal((5, 8))
        assert np.array_equal(pool(hidden, "class_token", True), hidden[0])

    def test_token_mean_is_arithmetic_mean(self):
        rng = np.random.default_rng(42)
        hidden = rng.standard_normal((7, 4))
        np.testing.assert_array_equal(pool(hidden, "token_mean", False), hidden.mean(axis=0))

    def test_token_mean_of_single_token_is_that_state(self):
        model = load_model("toy/text-tiny")
        states = model.encode_text("solo")
        for hidden in states:
            assert np.array_equal(pool(hidden, "token_mean", False), hidden[0])

    def test_class_pooling_requires_class_token(self):
        with pytest.raises(ConfigError, match="class_token pooling requires"):
            pool(np.zeros((3, 4)), "class_token", False)

    def test_unknown_pooling_rejected(self):
        with pytest.raises(ConfigError, match="unknown pooling"):
            pool(np.zeros((3, 4)), "max", False)
