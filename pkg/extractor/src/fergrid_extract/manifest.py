"""Image manifest: CSV rows mapping face images to (group, identity, expression).

The manifest is the only description of a dataset the extractor sees. Integer
indices are derived from name order of first appearance, so the same CSV
always yields the same store layout.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from .errors import DataError

# Canonical label set of the .embs format, in index order.
EXPRESSIONS = ("neutral", "happy", "sad", "anger", "disgust", "fear", "surprise")

_COLUMNS = ("group", "identity", "expression", "path")


@dataclass(frozen=True)
class ManifestRow:
    group: int
    identity: int
    expression: int
    path: str


@dataclass(frozen=True)
class ImageManifest:
    groups: tuple[str, ...]
    identities: tuple[tuple[str, ...], ...]  # names per group, index order
    rows: tuple[ManifestRow, ...]

    @property
    def identities_per_group(self) -> tuple[int, ...]:
        return tuple(len(names) for names in self.identities)


def load_manifest(path: str) -> ImageManifest:
    """Parse and validate a manifest CSV.

    Relative image paths are resolved against the CSV's own directory.
    Every referenced file must exist; expression names must be canonical
    (case-insensitive).
    """
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DataError(f"{path}: empty manifest")
            if tuple(reader.fieldnames) != _COLUMNS:
                raise DataError(
                    f"{path}: header must be {','.join(_COLUMNS)}, "
                    f"got {','.join(reader.fieldnames)}")
            raw = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    if not raw:
        raise DataError(f"{path}: manifest has no rows")

    base = os.path.dirname(os.path.abspath(path))
    groups: list[str] = []
    identities: list[list[str]] = []
    rows: list[ManifestRow] = []
    for lineno, rec in enumerate(raw, start=2):
        if any(rec.get(c) in (None, "") for c in _COLUMNS):
            raise DataError(f"{path}:{lineno}: incomplete row")
        gname, iname = rec["group"], rec["identity"]
        ename = rec["expression"].lower()
        if ename not in EXPRESSIONS:
            raise DataError(
                f"{path}:{lineno}: unknown expression {rec['expression']!r}, "
                f"expected one of {', '.join(EXPRESSIONS)}")
        if gname not in groups:
            groups.append(gname)
            identities.append([])
        g = groups.index(gname)
        if iname not in identities[g]:
            identities[g].append(iname)
        img_path = rec["path"]
        if not os.path.isabs(img_path):
            img_path = os.path.join(base, img_path)
        if not os.path.isfile(img_path):
            raise DataError(f"{path}:{lineno}: image not found: {img_path}")
        rows.append(ManifestRow(
            group=g,
            identity=identities[g].index(iname),
            expression=EXPRESSIONS.index(ename),
            path=img_path,
        ))

    return ImageManifest(
        groups=tuple(groups),
        identities=tuple(tuple(names) for names in identities),
        rows=tuple(rows),
    )
