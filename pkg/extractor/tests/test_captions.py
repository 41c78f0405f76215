import json

import pytest

from platonic_extract.captions import (
    SYNTHESIS_PROMPT,
    parse_caption_lines,
    select_captions,
    synthesize_captions,
)
from platonic_extract.dataset import DatasetItem
from platonic_extract.errors import CaptionClientError, CaptionSynthesisError, ConfigError

TEN = [f"caption number {i}" for i in range(10)]


class ScriptedClient:
    """Returns queued responses in order; raises entries that are exceptions."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def complete(self, prompt):
        self.calls += 1
        assert prompt.startswith(SYNTHESIS_PROMPT)
        head = self.responses.pop(0)
        if isinstance(head, Exception):
            raise head
        return head


def item_with(n_captions, item_id="a"):
    return DatasetItem(item_id, tuple(f"cap {i}" for i in range(n_captions)),
                       video_path="a.npy")


class TestSelectCaptions:
    def test_single_draw_within_set_and_stable(self):
        item = item_with(10)
        first = select_captions(item, 1, seed=0)
        assert first == select_captions(item, 1, seed=0)
        assert len(first) == 1 and first[0] in item.captions

    def test_single_draw_independent_of_other_items(self):
        """The draw hangs off (seed, item_id), not dataset position."""
        assert select_captions(item_with(10, "x"), 1, 0) == \
            select_captions(item_with(10, "x"), 1, 0)
        draws = {select_captions(item_with(10, f"item-{i}"), 1, 0)[0] for i in range(12)}
        assert len(draws) > 1

    def test_prefix_taken_in_annotator_order(self):
        item = item_with(5)
        assert select_captions(item, 3, seed=0) == ["cap 0", "cap 1", "cap 2"]
        assert select_captions(item, 5, seed=0) == list(item.captions)

    def test_budget_above_available_rejected(self):
        with pytest.raises(Exception, match="need n_c = 6"):
            select_captions(item_with(5), 6, seed=0)


class TestParseCaptionLines:
    def test_exactly_ten_lines(self):
        assert parse_caption_lines("\n".join(TEN)) == TEN

    def test_blank_lines_ignored(self):
        assert parse_caption_lines("\n\n" + "\n\n".join(TEN) + "\n") == TEN

    def test_preamble_line_stripped(self):
        text = "Here are the ten captions:\n" + "\n".join(TEN)
        assert parse_caption_lines(text) == TEN

    def test_numbered_markers_stripped(self):
        text = "\n".join(f"{i + 1}. {c}" for i, c in enumerate(TEN))
        assert parse_caption_lines(text) == TEN

    def test_bullet_markers_stripped(self):
        text = "\n".join(f"- {c}" for c in TEN)
        assert parse_caption_lines(text) == TEN

    def test_wrong_count_is_unusable(self):
        assert parse_caption_lines("\n".join(TEN[:9])) is None
        assert parse_caption_lines("\n".join(TEN + ["x", "y"])) is None


class TestSynthesizeCaptions:
    def test_happy_path(self):
        client = ScriptedClient(["\n".join(TEN)])
        assert synthesize_captions("a long detailed caption", client) == TEN
        assert client.calls == 1

    def test_malformed_then_good_retries(self):
        client = ScriptedClient(["too\nfew\nlines", "\n".join(TEN)])
        assert synthesize_captions("caption", client) == TEN
        assert client.calls == 2

    def test_backend_error_then_good_retries(self):
        client = ScriptedClient([CaptionClientError("http 500"), "\n".join(TEN)])
        assert synthesize_captions("caption", client) == TEN
        assert client.calls == 2

    def test_persistent_failure_gives_up_after_retries(self):
        client = ScriptedClient(["bad"] * 10)
        with pytest.raises(CaptionSynthesisError, match="4 attempts"):
            synthesize_captions("caption", client, retries=3)
        assert client.calls == 4

    def test_empty_caption_rejected(self):
        with pytest.raises(ConfigError, match="non-empty"):
            synthesize_captions("   ", ScriptedClient([]))

    def test_cache_short_circuits_second_run(self, tmp_path):
        first = ScriptedClient(["\n".join(TEN)])
        assert synthesize_captions("caption", first, cache_dir=tmp_path) == TEN
        second = ScriptedClient([])
        assert synthesize_captions("caption", second, cache_dir=tmp_path) == TEN
        assert second.calls == 0

    def test_cache_keyed_by_caption(self, tmp_path):
        synthesize_captions("caption one", ScriptedClient(["\n".join(TEN)]),
                            cache_dir=tmp_path)
        other = ScriptedClient(["\n".join(reversed(TEN))])
        assert synthesize_captions("caption two", other, cache_dir=tmp_path) == TEN[::-1]
        assert other.calls == 1
        assert len(list(tmp_path.glob("*.json"))) == 2

    def test_cache_file_is_readable_json(self, tmp_path):
        synthesize_captions("caption", ScriptedClient(["\n".join(TEN)]), cache_dir=tmp_path)
        cached = json.loads(next(tmp_path.glob("*.json")).read_text())
        assert cached == TEN
