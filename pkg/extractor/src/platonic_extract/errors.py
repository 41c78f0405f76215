"""Exception hierarchy for the extractor."""


class ExtractError(Exception):
    """Base class for all extractor failures."""


class ConfigError(ExtractError, ValueError):
    """An extraction configuration is internally inconsistent or unsupported."""


class DatasetError(ExtractError, ValueError):
    """A dataset manifest violates its invariants."""


class DecodeError(ExtractError):
    """A video or frame file could not be decoded."""


class ModelError(ExtractError, ValueError):
    """An unknown model id or a model/config mismatch."""


class CaptionClientError(ExtractError):
    """A caption-synthesis backend call failed; safe to retry."""


class CaptionSynthesisError(ExtractError):
    """Caption synthesis kept producing unusable output after all retries."""
