"""Shared fixtures: a small corpus and fast experiment configs."""

import pytest

from fergrid.adapter import TrainingConfig
from fergrid.config import ExperimentConfig
from fergrid.corpus import SyntheticCorpusSpec, SyntheticGroupSpec, generate_synthetic

TINY_SPEC = SyntheticCorpusSpec(
    dim=8,
    identities_per_group=3,
    instances=2,
    seed=99,
    sigma_levels=(0, 1, 2),
    groups=(
        SyntheticGroupSpec("western", 1.0, 0.4, 0.3, 0.25, 0.10),
        SyntheticGroupSpec("asian", 0.8, 0.4, 0.3, 0.35, 0.12),
    ),
)


@pytest.fixture(scope="session")
def tiny_spec():
    return TINY_SPEC


@pytest.fixture(scope="session")
def tiny_store():
    return generate_synthetic(TINY_SPEC)


def _make_fast_cfg(default_out, overrides):
    kwargs = dict(
        grid_width=4,
        grid_height=4,
        cohort={"western": 2, "asian": 2},
        t_learn=12,
        t_block=4,
        sigma_levels=(0, 1, 2),
        adapter=TrainingConfig(hidden=16),
        synthetic=TINY_SPEC,
        seed=5,
        out_dir=default_out,
    )
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


@pytest.fixture
def fast_cfg(tmp_path):
    """Factory for a config that finishes a run in well under a second."""
    return lambda **overrides: _make_fast_cfg(str(tmp_path / "run"), overrides)


@pytest.fixture(scope="module")
def fast_cfg_module(tmp_path_factory):
    """Module-scoped twin of fast_cfg for fixtures shared across tests."""
    root = tmp_path_factory.mktemp("shared")
    return lambda **overrides: _make_fast_cfg(str(root / "run"), overrides)
