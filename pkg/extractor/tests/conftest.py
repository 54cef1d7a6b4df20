"""Shared fixtures: a deterministic stand-in image corpus plus its manifest."""

import csv

import numpy as np
import pytest
from PIL import Image

from fergrid_extract.manifest import EXPRESSIONS

GROUPS = ("kdef", "jaffe")
IDENTITIES = ("id-a", "id-b")


def synth_image(group: int, identity: int, expression: int,
                size: int = 48) -> np.ndarray:
    """A reproducible uint8 RGB test image with plenty of edge energy."""
    rng = np.random.default_rng((group, identity, expression))
    noise = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    ramp = np.linspace(0, 255, size, dtype=np.uint8)
    base = np.stack(np.broadcast_arrays(ramp[:, None], ramp[None, :],
                                        np.uint8(40 * expression)), axis=-1)
    return ((noise.astype(np.uint16) + base.astype(np.uint16)) // 2).astype(np.uint8)


def write_corpus(root, groups=GROUPS, identities=IDENTITIES,
                 expressions=EXPRESSIONS):
    """Render PNGs for every cell and return manifest rows with relative paths."""
    rows = []
    for g, gname in enumerate(groups):
        for i, iname in enumerate(identities):
            for e, ename in enumerate(expressions):
                rel = f"{gname}/{iname}/{ename}.png"
                path = root / rel
                path.parent.mkdir(parents=True, exist_ok=True)
                Image.fromarray(synth_image(g, i, e)).save(path)
                rows.append((gname, iname, ename, rel))
    return rows


def write_manifest(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "identity", "expression", "path"])
        writer.writerows(rows)
    return str(path)


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("images")
    rows = write_corpus(root)
    write_manifest(root / "manifest.csv", rows)
    return root
