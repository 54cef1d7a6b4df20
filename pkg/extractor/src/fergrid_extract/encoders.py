"""Image encoders, selected by id string.

Two families are built in:

- ``grid:<D>``: a dependency-free reference encoder. The image is reduced
  to per-channel cell means over a square grid and the first D values are
  kept. It carries enough spatial signal to respond to blur and is exactly
  reproducible, which makes it the encoder of choice for format and
  pipeline tests. It is not a semantic face model.
- ``clip:<model-id>``: a frozen pretrained vision-language image encoder
  loaded through `transformers`. Determinism pinning: weights are loaded
  from a fixed local snapshot, the model runs on CPU in eval mode under
  `no_grad` with a single torch thread, so repeated invocations produce
  identical float32 outputs.

The embedding dimension is discovered from the encoder, never configured.
"""

from __future__ import annotations

import numpy as np

from .errors import EncoderError

DEFAULT_ENCODER = "clip:openai/clip-vit-base-patch32"


class GridMeanEncoder:
    """Per-channel cell means over an m x m grid, truncated to `dim` values."""

    def __init__(self, dim: int):
        if dim < 1 or dim > 4096:
            raise EncoderError(f"grid encoder dim must be in 1..4096, got {dim}")
        self.name = f"grid:{dim}"
        self.dim = dim
        self._m = int(np.ceil(np.sqrt(dim / 3.0)))

    def encode(self, image: np.ndarray) -> np.ndarray:
        h, w = image.shape[:2]
        m = self._m
        if h < m or w < m:
            raise EncoderError(
                f"image {w}x{h} too small for {self.name} (needs {m}x{m})")
        ye = np.linspace(0, h, m + 1).astype(int)
        xe = np.linspace(0, w, m + 1).astype(int)
        sums = np.add.reduceat(np.add.reduceat(image, ye[:-1], axis=0),
                               xe[:-1], axis=1)
        areas = np.outer(np.diff(ye), np.diff(xe)).astype(np.float64)
        means = sums / areas[:, :, None]
        return means.reshape(-1)[: self.dim].astype(np.float32)


class ClipEncoder:
    """Frozen CLIP-family image tower; requires torch + transformers + weights."""

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import CLIPImageProcessor, CLIPVisionModelWithProjection
        except ImportError as exc:
            raise EncoderError(
                f"encoder clip:{model_id} needs torch and transformers: {exc}"
            ) from exc
        try:
            self._processor = CLIPImageProcessor.from_pretrained(model_id)
            self._model = CLIPVisionModelWithProjection.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderError(
                f"cannot load encoder weights for {model_id!r} "
                f"(needs a local snapshot or hub access): {exc}") from exc
        torch.set_num_threads(1)
        self._torch = torch
        self._model.eval()
        self.name = f"clip:{model_id}"
        self.dim = int(self._model.config.projection_dim)

    def encode(self, image: np.ndarray) -> np.ndarray:
        pixels = (np.clip(image, 0.0, 1.0) * 255.0).round().astype(np.uint8)
        inputs = self._processor(images=pixels, return_tensors="pt")
        with self._torch.no_grad():
            out = self._model(**inputs)
        return out.image_embeds[0].cpu().numpy().astype(np.float32)


def get_encoder(encoder_id: str):
    """Resolve an encoder id of the form `family:arg`."""
    family, sep, arg = encoder_id.partition(":")
    if not sep:
        raise EncoderError(f"bad encoder id {encoder_id!r}, expected family:arg")
    if family == "grid":
        try:
            return GridMeanEncoder(int(arg))
        except ValueError:
            raise EncoderError(f"bad grid encoder dim {arg!r}") from None
    if family == "clip":
        return ClipEncoder(arg)
    raise EncoderError(f"unknown encoder family {family!r} in {encoder_id!r}")
