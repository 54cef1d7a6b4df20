"""The .embs store writer and the manifest-to-store extraction pipeline.

File layout: one UTF-8 JSON header line terminated by 0x0A, then
`record_count` fixed-size records of
`<group u8, identity u16 LE, expression u8, sigma u8, instance u8, 2 pad
bytes, dim float32 LE>` in canonical (group, identity, expression, sigma,
instance) order.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .blur import blur_image, load_image
from .encoders import get_encoder
from .errors import ConfigError, DataError
from .manifest import EXPRESSIONS, ImageManifest

_RECORD_PREFIX = struct.Struct("<BHBBB")


def check_sigma_levels(sigma_levels) -> tuple[int, ...]:
    levels = tuple(sigma_levels)
    if not levels or list(levels) != sorted(set(levels)):
        raise ConfigError("sigma levels must be non-empty and strictly increasing")
    if any(not isinstance(s, int) or s < 0 or s > 255 for s in levels):
        raise ConfigError("sigma levels must be integers in 0..255")
    return levels


def write_embs(out_path: str, dim: int, sigma_levels, groups,
               identities_per_group, records: dict) -> int:
    """Write a complete store atomically; returns the record count.

    `records` maps (group, identity, expression, sigma) to the list of
    instance vectors for that cell. The file appears at `out_path` only
    after it is fully written (temp file + rename), so readers never see
    a partial store.
    """
    total = sum(len(v) for v in records.values())
    header = {
        "version": 1,
        "dim": dim,
        "sigma_levels": list(sigma_levels),
        "groups": list(groups),
        "identities_per_group": list(identities_per_group),
        "expressions": list(EXPRESSIONS),
        "record_count": total,
    }
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".embs.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
            fh.write(b"\n")
            for key in sorted(records):
                g, i, e, s = key
                for inst, vec in enumerate(records[key]):
                    arr = np.ascontiguousarray(vec, dtype="<f4")
                    if arr.shape != (dim,):
                        raise DataError(
                            f"vector at {key} has shape {arr.shape}, expected ({dim},)")
                    fh.write(_RECORD_PREFIX.pack(g, i, e, s, inst))
                    fh.write(b"\x00\x00")
                    fh.write(arr.tobytes())
        os.replace(tmp_path, out_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return total


def extract_store(manifest: ImageManifest, sigma_levels, encoder_id: str,
                  out_path: str) -> int:
    """Blur, encode, and serialize every manifest row at every sigma level.

    Each image is loaded once; blur runs at native resolution before any
    encoder-side preprocessing. Instance indices within a (group, identity,
    expression) cell follow manifest row order. Returns the record count.
    """
    levels = check_sigma_levels(sigma_levels)
    encoder = get_encoder(encoder_id)
    records: dict[tuple[int, int, int, int], list[np.ndarray]] = {}
    for row in manifest.rows:
        image = load_image(row.path)
        for sigma in levels:
            vec = encoder.encode(blur_image(image, sigma))
            key = (row.group, row.identity, row.expression, sigma)
            records.setdefault(key, []).append(vec)
    return write_embs(out_path, encoder.dim, levels, manifest.groups,
                      manifest.identities_per_group, records)
