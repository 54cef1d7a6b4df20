"""Image loading and isotropic Gaussian blur at native resolution."""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy.ndimage import gaussian_filter

from .errors import DataError


def load_image(path: str) -> np.ndarray:
    """Read an image file into an HxWx3 float32 array in [0, 1]."""
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float32) / 255.0
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"unreadable image {path}: {exc}") from exc
    return arr


def blur_image(image: np.ndarray, sigma: float) -> np.ndarray:
    """Isotropic Gaussian blur with standard deviation sigma in pixels.

    sigma=0 returns the input unchanged. Blur is applied per channel with
    edge replication, so image brightness is preserved at the borders.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if image.ndim != 3 or image.shape[2] != 3:
        raise DataError(f"expected an HxWx3 image array, got shape {image.shape}")
    if sigma == 0:
        return image
    out = np.empty_like(image)
    for c in range(3):
        gaussian_filter(image[:, :, c], sigma=sigma, mode="nearest",
                        output=out[:, :, c])
    return out
