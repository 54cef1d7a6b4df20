"""Embedding sample space: the `.embs` binary store and the synthetic corpus generator.

A store holds frozen D-dimensional float32 vectors keyed by
(group, identity, expression, sigma, instance). Degradation is a total
function of sigma: every (group, identity, expression) present in a store
must carry records at every declared sigma level.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DataError, FormatError, IncompleteStoreError, IoError
from .labels import EXPRESSION_NAMES, N_CLASSES, CultureGroup, Expression

FORMAT_VERSION = 1
_RECORD_PREFIX = struct.Struct("<BHBBB")  # group u8, identity u16, expr u8, sigma u8, instance u8
_RECORD_PAD = b"\x00\x00"
_PREFIX_SIZE = _RECORD_PREFIX.size + len(_RECORD_PAD)  # 8 bytes


class SampleKey(NamedTuple):
    group: int
    identity: int
    expression: int
    sigma: int
    instance: int


@dataclass
class EmbeddingStore:
    """Immutable-after-validation collection of embedding vectors.

    `vectors` maps a key prefix (group, identity, expression, sigma) to a
    float32 array of shape (n_instances, dim); the row index is the
    instance index.
    """

    dim: int
    sigma_levels: tuple[int, ...]
    groups: tuple[str, ...]
    identities_per_group: tuple[int, ...]
    vectors: dict[tuple[int, int, int, int], np.ndarray] = field(repr=False)

    def __post_init__(self):
        self.sigma_levels = tuple(int(s) for s in self.sigma_levels)
        self.groups = tuple(self.groups)
        self.identities_per_group = tuple(int(n) for n in self.identities_per_group)

    # -- lookup helpers -------------------------------------------------

    def culture_groups(self) -> list[CultureGroup]:
        return [CultureGroup(name, i) for i, name in enumerate(self.groups)]

    def group_index(self, name: str) -> int:
        try:
            return self.groups.index(name)
        except ValueError:
            raise KeyError(f"group {name!r} not in store") from None

    def expression_set(self, group: int, identity: int) -> tuple[int, ...]:
        """Expressions available for an identity, in canonical index order."""
        sigma0 = self.sigma_levels[0]
        return tuple(
            e for e in range(N_CLASSES) if (group, identity, e, sigma0) in self.vectors
        )

    def instances(self, group: int, identity: int, expression: int, sigma: int) -> int:
        key = (group, identity, expression, sigma)
        if key not in self.vectors:
            raise KeyError(f"no record for {key}")
        return self.vectors[key].shape[0]

    def get(self, key: SampleKey) -> np.ndarray:
        prefix = (key.group, key.identity, key.expression, key.sigma)
        try:
            block = self.vectors[prefix]
        except KeyError:
            raise KeyError(f"no record for {prefix}") from None
        if not 0 <= key.instance < block.shape[0]:
            raise KeyError(f"instance {key.instance} out of range for {prefix}")
        return block[key.instance]

    def record_count(self) -> int:
        return sum(block.shape[0] for block in self.vectors.values())

    def iter_records(self):
        """Yield (SampleKey, vector) in canonical sort order."""
        for prefix in sorted(self.vectors):
            block = self.vectors[prefix]
            for inst in range(block.shape[0]):
                yield SampleKey(*prefix, inst), block[inst]

    # -- validation ------------------------------------------------------

    def validate(self) -> None:
        """Check all store invariants; raise on the first violation."""
        if self.dim < 1:
            raise FormatError(f"dim must be >= 1, got {self.dim}")
        if not 1 <= len(self.groups) <= 255:
            raise FormatError(f"store must have 1..255 groups, got {len(self.groups)}")
        if len(set(self.groups)) != len(self.groups):
            raise FormatError("group names must be unique")
        if len(self.identities_per_group) != len(self.groups):
            raise FormatError("identities_per_group length must match groups")
        if list(self.sigma_levels) != sorted(set(self.sigma_levels)):
            raise FormatError("sigma_levels must be strictly increasing")
        if not self.sigma_levels:
            raise FormatError("sigma_levels must be non-empty")
        if any(s < 0 or s > 255 for s in self.sigma_levels):
            raise FormatError("sigma levels must fit in u8")

        sigma_set = set(self.sigma_levels)
        seen_identity: set[tuple[int, int]] = set()
        for (g, i, e, s), block in self.vectors.items():
            if not 0 <= g < len(self.groups):
                raise FormatError(f"group index {g} out of range")
            if not 0 <= i < self.identities_per_group[g]:
                raise FormatError(f"identity index {i} out of range for group {g}")
            if not 0 <= e < N_CLASSES:
                raise FormatError(f"expression index {e} out of range")
            if s not in sigma_set:
                raise FormatError(f"sigma {s} not among declared levels {self.sigma_levels}")
            if block.ndim != 2 or block.shape[1] != self.dim or block.shape[0] < 1:
                raise FormatError(f"bad vector block shape {block.shape} for {(g, i, e, s)}")
            if not np.isfinite(block).all():
                raise DataError(f"non-finite embedding values at {(g, i, e, s)}")
            seen_identity.add((g, i))

        # Degradation must be a total function of sigma, with matching multiplicity.
        for (g, i, e, s), block in self.vectors.items():
            for other in self.sigma_levels:
                peer = self.vectors.get((g, i, e, other))
                if peer is None:
                    raise IncompleteStoreError(
                        f"({self.groups[g]}, id={i}, {EXPRESSION_NAMES[e]}) present at "
                        f"sigma={s} but missing at sigma={other}"
                    )

        # Every declared identity needs a non-empty expression set.
        for g, count in enumerate(self.identities_per_group):
            for i in range(count):
                if (g, i) not in seen_identity:
                    raise IncompleteStoreError(
                        f"identity {i} of group {self.groups[g]} has no records"
                    )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        if (
            self.dim != other.dim
            or self.sigma_levels != other.sigma_levels
            or self.groups != other.groups
            or self.identities_per_group != other.identities_per_group
            or set(self.vectors) != set(other.vectors)
        ):
            return False
        return all(np.array_equal(self.vectors[k], other.vectors[k]) for k in self.vectors)


# -- binary I/O -----------------------------------------------------------


def _header_bytes(store: EmbeddingStore) -> bytes:
    header = {
        "version": FORMAT_VERSION,
        "dim": store.dim,
        "sigma_levels": list(store.sigma_levels),
        "groups": list(store.groups),
        "identities_per_group": list(store.identities_per_group),
        "expressions": list(EXPRESSION_NAMES),
        "record_count": store.record_count(),
    }
    return json.dumps(header, separators=(",", ":")).encode("utf-8") + b"\n"


def write_store(store: EmbeddingStore, path) -> None:
    """Serialize a validated store; byte-exactly determined by its contents."""
    store.validate()
    try:
        with open(path, "wb") as fh:
            fh.write(_header_bytes(store))
            for key, vec in store.iter_records():
                fh.write(_RECORD_PREFIX.pack(*key))
                fh.write(_RECORD_PAD)
                fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write store to {path}: {exc}") from exc


def load_store(path) -> EmbeddingStore:
    """Parse and fully validate a `.embs` file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read store from {path}: {exc}") from exc

    newline = raw.find(b"\n")
    if newline < 0:
        raise FormatError("missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unparsable header: {exc}") from exc
    if not isinstance(header, dict):
        raise FormatError("header must be a JSON object")

    required = {
        "version",
        "dim",
        "sigma_levels",
        "groups",
        "identities_per_group",
        "expressions",
        "record_count",
    }
    missing = required - header.keys()
    if missing:
        raise FormatError(f"header missing fields: {sorted(missing)}")
    if header["version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {header['version']}")
    if list(header["expressions"]) != list(EXPRESSION_NAMES):
        raise FormatError("header expression names do not match the canonical order")
    dim = header["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"bad dim {dim!r}")
    record_count = header["record_count"]
    if not isinstance(record_count, int) or record_count < 0:
        raise FormatError(f"bad record_count {record_count!r}")

    body = raw[newline + 1 :]
    record_size = _PREFIX_SIZE + 4 * dim
    if len(body) != record_count * record_size:
        raise FormatError(
            f"body holds {len(body)} bytes but header declares {record_count} "
            f"records of {record_size} bytes"
        )

    vectors: dict[tuple[int, int, int, int], list[np.ndarray]] = {}
    prev_key: SampleKey | None = None
    offset = 0
    for _ in range(record_count):
        prefix = body[offset : offset + _PREFIX_SIZE]
        g, ident, e, s, inst = _RECORD_PREFIX.unpack(prefix[: _RECORD_PREFIX.size])
        if prefix[_RECORD_PREFIX.size :] != _RECORD_PAD:
            raise FormatError(f"nonzero pad bytes in record at offset {offset}")
        key = SampleKey(g, ident, e, s, inst)
        if prev_key is not None and key <= prev_key:
            raise FormatError(f"records out of canonical order at {key}")
        kp = key[:4]
        expect = len(vectors[kp]) if kp in vectors else 0
        if inst != expect:
            raise FormatError(f"non-contiguous instance index at {key} (expected {expect})")
        vec = np.frombuffer(
            body, dtype="<f4", count=dim, offset=offset + _PREFIX_SIZE
        ).astype(np.float32)
        vectors.setdefault(kp, []).append(vec)
        prev_key = key
        offset += record_size

    store = EmbeddingStore(
        dim=dim,
        sigma_levels=tuple(header["sigma_levels"]),
        groups=tuple(header["groups"]),
        identities_per_group=tuple(header["identities_per_group"]),
        vectors={k: np.vstack(v) for k, v in vectors.items()},
    )
    store.validate()
    if store.record_count() != record_count:
        raise FormatError("record count mismatch after parse")
    return store


# -- display sampling -----------------------------------------------------


def sample_display(
    store: EmbeddingStore,
    group: int,
    identity: int,
    expression: int,
    sigma: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one instance vector uniformly for the given key prefix.

    Consumes exactly one rng draw regardless of instance multiplicity.
    """
    key = (group, identity, expression, sigma)
    try:
        block = store.vectors[key]
    except KeyError:
        raise KeyError(f"no record for {key}") from None
    inst = int(rng.integers(block.shape[0]))
    return block[inst]


# -- synthetic corpus ------------------------------------------------------


@dataclass(frozen=True)
class SyntheticGroupSpec:
    """Generation parameters for one cultural group.

    `class_spread` scales the 7 expression centers, `identity_scale` the
    per-identity offset, `noise_scale` the within-class sample noise.
    `collapse_rate` (alpha, per sigma step) pulls degraded samples toward
    the group mean; `degradation_noise` (beta) scales additive noise with
    sigma.
    """

    name: str
    class_spread: float = 1.0
    identity_scale: float = 1.2
    noise_scale: float = 2.8
    collapse_rate: float = 0.25
    degradation_noise: float = 0.10

    def validate(self) -> None:
        if not self.name:
            raise ValueError("group name must be non-empty")
        for attr in ("class_spread", "identity_scale", "noise_scale", "degradation_noise"):
            if getattr(self, attr) < 0:
                raise ValueError(f"{attr} must be >= 0")
        if not 0.0 <= self.collapse_rate <= 1.0:
            raise ValueError("collapse_rate must lie in [0, 1]")


@dataclass(frozen=True)
class SyntheticCorpusSpec:
    dim: int = 64
    identities_per_group: int = 10
    instances: int = 4
    seed: int = 0
    sigma_levels: tuple[int, ...] = (0, 1, 2, 3, 4)
    groups: tuple[SyntheticGroupSpec, ...] = (
        SyntheticGroupSpec("western", 1.0, 1.2, 2.8, 0.25, 0.10),
        SyntheticGroupSpec("asian", 0.8, 1.2, 2.8, 0.35, 0.12),
    )

    def validate(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.identities_per_group < 1:
            raise ValueError("identities_per_group must be >= 1")
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if list(self.sigma_levels) != sorted(set(self.sigma_levels)) or not self.sigma_levels:
            raise ValueError("sigma_levels must be non-empty and strictly increasing")
        if any(s < 0 for s in self.sigma_levels):
            raise ValueError("sigma levels must be >= 0")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names) or not names:
            raise ValueError("group names must be unique and non-empty")
        for g in self.groups:
            g.validate()


def default_synthetic_spec(seed: int = 0) -> SyntheticCorpusSpec:
    """The stock two-group corpus: group B is harder and degrades faster."""
    return SyntheticCorpusSpec(seed=seed)


def generate_synthetic(spec: SyntheticCorpusSpec) -> EmbeddingStore:
    """Build a complete store from the generative model; pure in `spec`.

    Clean samples are class center + identity offset + noise. A sample at
    blur sigma is the clean sample shrunk toward the group mean (the mean
    of the 7 class centers) by (1-alpha)**sigma, plus noise of scale
    beta*sigma. All draws come from one seeded generator in a fixed order.
    """
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    vectors: dict[tuple[int, int, int, int], np.ndarray] = {}
    dim = spec.dim

    for g, gspec in enumerate(spec.groups):
        centers = rng.normal(0.0, gspec.class_spread, size=(N_CLASSES, dim))
        group_mean = centers.mean(axis=0)
        for ident in range(spec.identities_per_group):
            offset = rng.normal(0.0, gspec.identity_scale, size=dim)
            for expr in range(N_CLASSES):
                clean = (
                    centers[expr]
                    + offset
                    + rng.normal(0.0, gspec.noise_scale, size=(spec.instances, dim))
                )
                for sigma in spec.sigma_levels:
                    if sigma == 0:
                        block = clean
                    else:
                        keep = (1.0 - gspec.collapse_rate) ** sigma
                        noise = rng.normal(
                            0.0, gspec.degradation_noise * sigma, size=(spec.instances, dim)
                        )
                        block = keep * clean + (1.0 - keep) * group_mean + noise
                    vectors[(g, ident, expr, sigma)] = block.astype(np.float32)

    store = EmbeddingStore(
        dim=dim,
        sigma_levels=tuple(spec.sigma_levels),
        groups=tuple(gs.name for gs in spec.groups),
        identities_per_group=(spec.identities_per_group,) * len(spec.groups),
        vectors=vectors,
    )
    store.validate()
    return store
