"""platonic-extract: encode datasets into layer-major embedding archives."""

from .captions import (
    SYNTHESIS_PROMPT,
    HttpLLMClient,
    parse_caption_lines,
    select_captions,
    synthesize_captions,
)
from .dataset import DatasetItem, load_items
from .errors import (
    CaptionClientError,
    CaptionSynthesisError,
    ConfigError,
    DatasetError,
    DecodeError,
    ExtractError,
    ModelError,
)
from .extract import ExtractionConfig, ExtractionResult, extract_text, extract_vision
from .models import list_models, load_model, register
from .pooling import POOLINGS, pool
from .video import decode_item, frame_indices, plan_segments, write_frame_stack
from .writer import write_archive

__version__ = "0.1.0"

__all__ = [
    "CaptionClientError",
    "CaptionSynthesisError",
    "ConfigError",
    "DatasetError",
    "DatasetItem",
    "DecodeError",
    "ExtractError",
    "ExtractionConfig",
    "ExtractionResult",
    "HttpLLMClient",
    "ModelError",
    "POOLINGS",
    "SYNTHESIS_PROMPT",
    "__version__",
    "decode_item",
    "extract_text",
    "extract_vision",
    "frame_indices",
    "list_models",
    "load_items",
    "load_model",
    "parse_caption_lines",
    "plan_segments",
    "pool",
    "register",
    "select_captions",
    "synthesize_captions",
    "write_archive",
    "write_frame_stack",
]
