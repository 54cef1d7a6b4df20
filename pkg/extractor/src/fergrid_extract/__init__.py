"""Embedding extraction pipeline: images -> scheduled blur -> .embs stores."""

from .blur import blur_image, load_image
from .encoders import DEFAULT_ENCODER, get_encoder
from .errors import ConfigError, DataError, EncoderError, ExtractError
from .manifest import EXPRESSIONS, ImageManifest, ManifestRow, load_manifest
from .store import extract_store, write_embs

__all__ = [
    "DEFAULT_ENCODER",
    "EXPRESSIONS",
    "ConfigError",
    "DataError",
    "EncoderError",
    "ExtractError",
    "ImageManifest",
    "ManifestRow",
    "blur_image",
    "extract_store",
    "get_encoder",
    "load_image",
    "load_manifest",
    "write_embs",
]
