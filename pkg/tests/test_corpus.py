"""Embedding store format, validation, and the synthetic generator."""

import dataclasses
import json

import numpy as np
import pytest

from fergrid.corpus import (
    EmbeddingStore,
    SampleKey,
    SyntheticCorpusSpec,
    SyntheticGroupSpec,
    default_synthetic_spec,
    generate_synthetic,
    load_store,
    sample_display,
    write_store,
)
from fergrid.errors import (
    DataError,
    FormatError,
    IncompleteStoreError,
    IoError,
)
from fergrid.labels import EXPRESSION_NAMES, N_CLASSES


def small_store(dim=4, ids=2, inst=3, sigmas=(0, 1)):
    spec = SyntheticCorpusSpec(
        dim=dim, identities_per_group=ids, instances=inst, seed=3,
        sigma_levels=sigmas,
        groups=(SyntheticGroupSpec("western", 1.0, 0.5, 0.3, 0.25, 0.1),
                SyntheticGroupSpec("asian", 0.8, 0.5, 0.3, 0.35, 0.12)),
    )
    return generate_synthetic(spec)


def test_round_trip_preserves_everything(tmp_path, tiny_store):
    path = tmp_path / "corpus.embs"
    write_store(tiny_store, path)
    loaded = load_store(path)
    assert loaded == tiny_store
    assert loaded.vectors[(0, 0, 0, 0)].dtype == np.float32


def test_write_is_byte_deterministic(tmp_path, tiny_store):
    a, b = tmp_path / "a.embs", tmp_path / "b.embs"
    write_store(tiny_store, a)
    write_store(tiny_store, b)
    assert a.read_bytes() == b.read_bytes()


def test_header_line_and_record_layout(tmp_path):
    store = small_store()
    path = tmp_path / "s.embs"
    write_store(store, path)
    raw = path.read_bytes()
    newline = raw.index(b"\n")
    header = json.loads(raw[:newline])
    assert header["version"] == 1
    assert header["dim"] == 4
    assert header["groups"] == ["western", "asian"]
    assert header["expressions"] == list(EXPRESSION_NAMES)
    record_size = 8 + 4 * header["dim"]
    assert len(raw) - newline - 1 == header["record_count"] * record_size


def corrupt(tmp_path, mutate):
    store = small_store()
    path = tmp_path / "bad.embs"
    write_store(store, path)
    raw = bytearray(path.read_bytes())
    mutate(raw)
    path.write_bytes(bytes(raw))
    return path


def test_load_rejects_truncated_body(tmp_path):
    path = corrupt(tmp_path, lambda raw: raw.__delitem__(slice(-5, None)))
    with pytest.raises(FormatError):
        load_store(path)


def test_load_rejects_garbage_header(tmp_path):
    path = corrupt(tmp_path, lambda raw: raw.__setitem__(slice(0, 2), b"{x"))
    with pytest.raises(FormatError):
        load_store(path)


def test_load_rejects_version_bump(tmp_path):
    def mutate(raw):
        newline = raw.index(b"\n")
        head = json.loads(bytes(raw[:newline]))
        head["version"] = 9
        raw[:newline] = json.dumps(head, separators=(",", ":")).encode()
    path = corrupt(tmp_path, mutate)
    with pytest.raises(FormatError):
        load_store(path)


def test_load_rejects_missing_header_field(tmp_path):
    def mutate(raw):
        newline = raw.index(b"\n")
        head = json.loads(bytes(raw[:newline]))
        del head["record_count"]
        body = bytes(raw[newline:])
        raw[:] = json.dumps(head, separators=(",", ":")).encode() + body
    path = corrupt(tmp_path, mutate)
    with pytest.raises(FormatError):
        load_store(path)


def test_load_rejects_out_of_order_records(tmp_path):
    def mutate(raw):
        newline = raw.index(b"\n")
        record_size = 8 + 4 * 4
        start = newline + 1
        first = bytes(raw[start : start + record_size])
        second = bytes(raw[start + record_size : start + 2 * record_size])
        raw[start : start + record_size] = second
        raw[start + record_size : start + 2 * record_size] = first
    path = corrupt(tmp_path, mutate)
    with pytest.raises(FormatError):
        load_store(path)


def test_load_rejects_nonzero_padding(tmp_path):
    def mutate(raw):
        newline = raw.index(b"\n")
        raw[newline + 7] = 0xFF  # pad byte of the first record
    path = corrupt(tmp_path, mutate)
    with pytest.raises(FormatError):
        load_store(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(IoError):
        load_store(tmp_path / "nope.embs")


def test_validate_catches_missing_sigma_level():
    store = small_store(sigmas=(0, 1))
    broken = dict(store.vectors)
    del broken[(0, 0, 0, 1)]
    clone = EmbeddingStore(store.dim, store.sigma_levels, store.groups,
                           store.identities_per_group, broken)
    with pytest.raises(IncompleteStoreError):
        clone.validate()


def test_validate_catches_identity_without_records():
    store = small_store()
    broken = {k: v for k, v in store.vectors.items() if not (k[0] == 1 and k[1] == 1)}
    clone = EmbeddingStore(store.dim, store.sigma_levels, store.groups,
                           store.identities_per_group, broken)
    with pytest.raises(IncompleteStoreError):
        clone.validate()


def test_validate_catches_non_finite_vectors():
    store = small_store()
    broken = dict(store.vectors)
    bad = broken[(0, 0, 0, 0)].copy()
    bad[0, 0] = np.inf
    broken[(0, 0, 0, 0)] = bad
    clone = EmbeddingStore(store.dim, store.sigma_levels, store.groups,
                           store.identities_per_group, broken)
    with pytest.raises(DataError):
        clone.validate()


def test_validate_catches_duplicate_group_names():
    store = small_store()
    clone = EmbeddingStore(store.dim, store.sigma_levels, ("western", "western"),
                           store.identities_per_group, dict(store.vectors))
    with pytest.raises(FormatError):
        clone.validate()


def test_store_lookup_helpers(tiny_store):
    assert tiny_store.group_index("asian") == 1
    with pytest.raises(KeyError):
        tiny_store.group_index("martian")
    assert tiny_store.expression_set(0, 0) == tuple(range(N_CLASSES))
    assert tiny_store.instances(0, 0, 0, 0) == 2
    vec = tiny_store.get(SampleKey(0, 0, 0, 0, 1))
    assert vec.shape == (tiny_store.dim,)
    with pytest.raises(KeyError):
        tiny_store.get(SampleKey(0, 0, 0, 9, 0))
    with pytest.raises(KeyError):
        tiny_store.get(SampleKey(0, 0, 0, 0, 2))


def test_iter_records_in_canonical_order(tiny_store):
    keys = [k for k, _ in tiny_store.iter_records()]
    assert keys == sorted(keys)
    assert len(keys) == tiny_store.record_count()


def test_generator_is_deterministic():
    spec = default_synthetic_spec(seed=12)
    assert generate_synthetic(spec) == generate_synthetic(spec)
    other = generate_synthetic(default_synthetic_spec(seed=13))
    assert generate_synthetic(spec) != other


def test_generator_covers_the_declared_grid():
    store = small_store(dim=4, ids=2, inst=3, sigmas=(0, 1))
    assert store.record_count() == 2 * 2 * N_CLASSES * 2 * 3
    for key in store.vectors:
        assert store.vectors[key].shape == (3, 4)
    store.validate()


def test_degradation_collapses_toward_group_mean():
    # with beta=0 the blend is exact: e(s+1)-e(s) scales by (1-alpha) each step
    spec = SyntheticCorpusSpec(
        dim=16, identities_per_group=2, instances=2, seed=7,
        sigma_levels=(0, 1, 2),
        groups=(SyntheticGroupSpec("western", 1.0, 0.5, 0.3, 0.25, 0.0),
                SyntheticGroupSpec("asian", 0.8, 0.5, 0.3, 0.40, 0.0)),
    )
    store = generate_synthetic(spec)
    for g, alpha in ((0, 0.25), (1, 0.40)):
        v0 = store.vectors[(g, 0, 3, 0)].astype(np.float64)
        v1 = store.vectors[(g, 0, 3, 1)].astype(np.float64)
        v2 = store.vectors[(g, 0, 3, 2)].astype(np.float64)
        assert np.allclose(v2 - v1, (1.0 - alpha) * (v1 - v0), atol=1e-5)


def test_identity_offset_is_common_mode():
    # zero noise: the difference between two expressions is identity-free
    spec = SyntheticCorpusSpec(
        dim=8, identities_per_group=3, instances=1, seed=5, sigma_levels=(0,),
        groups=(SyntheticGroupSpec("western", 1.0, 2.0, 0.0, 0.25, 0.1),),
    )
    store = generate_synthetic(spec)
    diff_id0 = store.vectors[(0, 0, 1, 0)] - store.vectors[(0, 0, 4, 0)]
    diff_id2 = store.vectors[(0, 2, 1, 0)] - store.vectors[(0, 2, 4, 0)]
    assert np.allclose(diff_id0, diff_id2, atol=1e-5)


def test_zero_noise_makes_instances_identical():
    spec = SyntheticCorpusSpec(
        dim=8, identities_per_group=1, instances=3, seed=2, sigma_levels=(0,),
        groups=(SyntheticGroupSpec("western", 1.0, 0.5, 0.0, 0.25, 0.1),),
    )
    block = generate_synthetic(spec).vectors[(0, 0, 0, 0)]
    assert np.array_equal(block[0], block[1])
    assert np.array_equal(block[0], block[2])


def test_sample_display_consumes_exactly_one_draw(tiny_store):
    seed = np.random.SeedSequence(42)
    rng_a = np.random.Generator(np.random.PCG64(seed))
    rng_b = np.random.Generator(np.random.PCG64(seed))
    vec = sample_display(tiny_store, 0, 1, 2, 0, rng_a)
    inst = int(rng_b.integers(tiny_store.instances(0, 1, 2, 0)))
    assert np.array_equal(vec, tiny_store.vectors[(0, 1, 2, 0)][inst])
    assert rng_a.integers(1 << 30) == rng_b.integers(1 << 30)


def test_sample_display_unknown_key(tiny_store):
    rng = np.random.default_rng(0)
    with pytest.raises(KeyError):
        sample_display(tiny_store, 0, 0, 0, 9, rng)


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticCorpusSpec(dim=0).validate()
    with pytest.raises(ValueError):
        SyntheticCorpusSpec(sigma_levels=(1, 0)).validate()
    with pytest.raises(ValueError):
        SyntheticCorpusSpec(groups=()).validate()
    with pytest.raises(ValueError):
        SyntheticGroupSpec("", 1.0).validate()
    with pytest.raises(ValueError):
        SyntheticGroupSpec("g", collapse_rate=1.5).validate()
    with pytest.raises(ValueError):
        SyntheticGroupSpec("g", noise_scale=-0.1).validate()
    bad_groups = dataclasses.replace(
        default_synthetic_spec(),
        groups=(SyntheticGroupSpec("same"), SyntheticGroupSpec("same")))
    with pytest.raises(ValueError):
        bad_groups.validate()
