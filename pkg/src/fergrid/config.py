"""Experiment configuration: flat key=value files, defaults, manifests.

The on-disk format is one `key = value` pair per line. Blank lines and
lines starting with `#` are ignored; values run to the end of the line
(no inline comments). Dotted keys stay flat: `cohort.western = 8`,
`adapter.learning_rate = 0.0003`. Unknown keys are rejected so typos
fail loudly. `serialize_config` emits every field in canonical order,
which doubles as the run manifest format: parsing a manifest yields a
config that reproduces the run exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .adapter import TrainingConfig
from .corpus import SyntheticCorpusSpec, SyntheticGroupSpec, default_synthetic_spec
from .errors import ConfigError, IoError

CONFIG_FORMAT_VERSION = 1

_GROUP_FIELDS = ("class_spread", "identity_scale", "noise_scale",
                 "collapse_rate", "degradation_noise")


@dataclass
class ExperimentConfig:
    grid_width: int = 5
    grid_height: int = 5
    cohort: dict[str, int] = field(default_factory=lambda: {"western": 5, "asian": 5})
    t_learn: int = 1000
    t_block: int = 200
    sigma_levels: tuple[int, ...] = (0, 1, 2, 3, 4)
    adapter: TrainingConfig = field(default_factory=TrainingConfig)
    peer_threshold: float = 0.40
    move_prob: float = 0.7
    valence_threshold: int = 2
    valence_basis: str = "predicted"
    trust_lambda: float = 0.1
    ece_bins: int = 10
    source: str = "synthetic"  # "synthetic" or "file"
    store_path: str | None = None
    synthetic: SyntheticCorpusSpec | None = None
    seed: int = 0
    out_dir: str = "runs/default"
    snapshot_stride: int | None = None  # None: every tick for t<10, then every 50
    relative_degradation: bool = True

    def validate(self) -> None:
        if self.grid_width < 1 or self.grid_height < 1:
            raise ConfigError("grid dimensions must be >= 1")
        if not self.cohort:
            raise ConfigError("cohort must name at least one group")
        for name, count in self.cohort.items():
            if count < 0:
                raise ConfigError(f"cohort.{name} must be >= 0, got {count}")
        total = sum(self.cohort.values())
        capacity = self.grid_width * self.grid_height
        if total > capacity:
            raise ConfigError(
                f"cohort of {total} agents exceeds grid capacity {capacity}")
        if total == 0:
            raise ConfigError("cohort is empty")
        if self.t_learn < 0:
            raise ConfigError("t_learn must be >= 0")
        if self.t_block < 1:
            raise ConfigError("t_block must be >= 1")
        if not self.sigma_levels:
            raise ConfigError("sigma_levels must be non-empty")
        if list(self.sigma_levels) != sorted(set(self.sigma_levels)):
            raise ConfigError("sigma_levels must be strictly increasing")
        if any(s < 0 or s > 255 for s in self.sigma_levels):
            raise ConfigError("sigma levels must be in [0, 255]")
        self.adapter.validate()
        if not 0.0 < self.peer_threshold <= 1.0:
            raise ConfigError("peer_threshold must be in (0, 1]")
        if not 0.0 <= self.move_prob <= 1.0:
            raise ConfigError("move_prob must be in [0, 1]")
        if self.valence_threshold < 0:
            raise ConfigError("valence_threshold must be >= 0")
        if self.valence_basis not in ("predicted", "true"):
            raise ConfigError("valence_basis must be 'predicted' or 'true'")
        if not 0.0 <= self.trust_lambda <= 1.0:
            raise ConfigError("trust_lambda must be in [0, 1]")
        if self.ece_bins < 1:
            raise ConfigError("ece_bins must be >= 1")
        if self.source not in ("synthetic", "file"):
            raise ConfigError("source must be 'synthetic' or 'file'")
        if self.source == "file" and not self.store_path:
            raise ConfigError("store_path is required when source = file")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.synthetic is not None:
            try:
                self.synthetic.validate()
            except ValueError as exc:
                raise ConfigError(f"synthetic spec: {exc}") from exc
        if self.snapshot_stride is not None and self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")

    def resolved(self) -> "ExperimentConfig":
        """Copy with every optional source field made explicit.

        A synthetic config without a spec gets the default spec seeded by
        the run seed, so sweeps draw a fresh corpus per seed. Serializing
        a resolved config yields a self-contained manifest.
        """
        cfg = dataclasses.replace(self)
        cfg.cohort = dict(self.cohort)
        if cfg.source == "synthetic" and cfg.synthetic is None:
            base = default_synthetic_spec(seed=cfg.seed)
            needed = tuple(sorted({0, *cfg.sigma_levels}))
            cfg.synthetic = dataclasses.replace(base, sigma_levels=needed)
        return cfg

    def run_id(self) -> str:
        label = "-".join(f"{name}{count}" for name, count in self.cohort.items())
        return f"{label}-seed{self.seed}"

    def cohort_label(self) -> str:
        return "/".join(str(count) for count in self.cohort.values())


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    raise ConfigError(f"{key}: expected true or false, got {raw!r}")


def _parse_int_list(key: str, raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(part.strip()) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from None


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the flat key=value format into a validated ExperimentConfig."""
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if value:
            pairs[key] = value
    return _build_config(pairs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def _build_config(pairs: dict[str, str]) -> ExperimentConfig:
    cfg = ExperimentConfig(cohort={})
    adapter_kwargs: dict[str, object] = {}
    synthetic_kwargs: dict[str, object] = {}
    group_kwargs: dict[str, dict[str, float]] = {}
    group_order: list[str] | None = None

    version = pairs.pop("format_version", None)
    if version is not None and _parse_int("format_version", version) != CONFIG_FORMAT_VERSION:
        raise ConfigError(f"unsupported config format_version {version}")

    for key, raw in pairs.items():
        if key == "grid_width":
            cfg.grid_width = _parse_int(key, raw)
        elif key == "grid_height":
            cfg.grid_height = _parse_int(key, raw)
        elif key.startswith("cohort."):
            cfg.cohort[key[len("cohort."):]] = _parse_int(key, raw)
        elif key == "t_learn":
            cfg.t_learn = _parse_int(key, raw)
        elif key == "t_block":
            cfg.t_block = _parse_int(key, raw)
        elif key == "sigma_levels":
            cfg.sigma_levels = _parse_int_list(key, raw)
        elif key.startswith("adapter."):
            name = key[len("adapter."):]
            if name in ("hidden",):
                adapter_kwargs[name] = _parse_int(key, raw)
            elif name in ("learning_rate", "weight_decay", "label_smoothing",
                          "dropout", "adam_beta1", "adam_beta2", "adam_eps",
                          "ln_eps"):
                adapter_kwargs[name] = _parse_float(key, raw)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        elif key == "peer_threshold":
            cfg.peer_threshold = _parse_float(key, raw)
        elif key == "move_prob":
            cfg.move_prob = _parse_float(key, raw)
        elif key == "valence_threshold":
            cfg.valence_threshold = _parse_int(key, raw)
        elif key == "valence_basis":
            cfg.valence_basis = raw
        elif key == "trust_lambda":
            cfg.trust_lambda = _parse_float(key, raw)
        elif key == "ece_bins":
            cfg.ece_bins = _parse_int(key, raw)
        elif key == "source":
            cfg.source = raw
        elif key == "store_path":
            cfg.store_path = raw
        elif key == "synthetic.dim":
            synthetic_kwargs["dim"] = _parse_int(key, raw)
        elif key == "synthetic.identities_per_group":
            synthetic_kwargs["identities_per_group"] = _parse_int(key, raw)
        elif key == "synthetic.instances":
            synthetic_kwargs["instances"] = _parse_int(key, raw)
        elif key == "synthetic.seed":
            synthetic_kwargs["seed"] = _parse_int(key, raw)
        elif key == "synthetic.sigma_levels":
            synthetic_kwargs["sigma_levels"] = _parse_int_list(key, raw)
        elif key == "synthetic.groups":
            group_order = [part.strip() for part in raw.split(",") if part.strip()]
        elif key.startswith("synthetic.group."):
            rest = key[len("synthetic.group."):]
            name, dot, attr = rest.rpartition(".")
            if not dot or attr not in _GROUP_FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            group_kwargs.setdefault(name, {})[attr] = _parse_float(key, raw)
        elif key == "seed":
            cfg.seed = _parse_int(key, raw)
        elif key == "out_dir":
            cfg.out_dir = raw
        elif key == "snapshot_stride":
            cfg.snapshot_stride = _parse_int(key, raw)
        elif key == "relative_degradation":
            cfg.relative_degradation = _parse_bool(key, raw)
        else:
            raise ConfigError(f"unknown config key {key!r}")

    if not cfg.cohort:
        cfg.cohort = {"western": 5, "asian": 5}

    if synthetic_kwargs or group_kwargs or group_order is not None:
        base = default_synthetic_spec(seed=synthetic_kwargs.get("seed", cfg.seed))
        if group_order is None:
            group_order = [g.name for g in base.groups]
        defaults = {g.name: g for g in base.groups}
        groups = []
        for name in group_order:
            ref = defaults.get(name, SyntheticGroupSpec(name=name))
            overrides = group_kwargs.pop(name, {})
            groups.append(dataclasses.replace(ref, name=name, **overrides))
        if group_kwargs:
            stray = ", ".join(sorted(group_kwargs))
            raise ConfigError(
                f"synthetic.group.* keys for groups not in synthetic.groups: {stray}")
        synthetic_kwargs.setdefault("seed", cfg.seed)
        synthetic_kwargs.setdefault(
            "sigma_levels", tuple(sorted({0, *cfg.sigma_levels})))
        cfg.synthetic = dataclasses.replace(
            base, groups=tuple(groups), **synthetic_kwargs)

    if adapter_kwargs:
        cfg.adapter = dataclasses.replace(TrainingConfig(), **adapter_kwargs)

    cfg.validate()
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render a config as the flat key=value document, fully resolved.

    Float fields are written with repr so a parse round trip is exact.
    """
    cfg = cfg.resolved()
    cfg.validate()
    lines = [f"format_version = {CONFIG_FORMAT_VERSION}"]
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"out_dir = {cfg.out_dir}")
    lines.append(f"grid_width = {cfg.grid_width}")
    lines.append(f"grid_height = {cfg.grid_height}")
    for name, count in cfg.cohort.items():
        lines.append(f"cohort.{name} = {count}")
    lines.append(f"t_learn = {cfg.t_learn}")
    lines.append(f"t_block = {cfg.t_block}")
    lines.append("sigma_levels = " + ",".join(str(s) for s in cfg.sigma_levels))
    ad = cfg.adapter
    lines.append(f"adapter.hidden = {ad.hidden}")
    lines.append(f"adapter.learning_rate = {ad.learning_rate!r}")
    lines.append(f"adapter.weight_decay = {ad.weight_decay!r}")
    lines.append(f"adapter.label_smoothing = {ad.label_smoothing!r}")
    lines.append(f"adapter.dropout = {ad.dropout!r}")
    lines.append(f"adapter.adam_beta1 = {ad.adam_beta1!r}")
    lines.append(f"adapter.adam_beta2 = {ad.adam_beta2!r}")
    lines.append(f"adapter.adam_eps = {ad.adam_eps!r}")
    lines.append(f"adapter.ln_eps = {ad.ln_eps!r}")
    lines.append(f"peer_threshold = {cfg.peer_threshold!r}")
    lines.append(f"move_prob = {cfg.move_prob!r}")
    lines.append(f"valence_threshold = {cfg.valence_threshold}")
    lines.append(f"valence_basis = {cfg.valence_basis}")
    lines.append(f"trust_lambda = {cfg.trust_lambda!r}")
    lines.append(f"ece_bins = {cfg.ece_bins}")
    lines.append(f"relative_degradation = {'true' if cfg.relative_degradation else 'false'}")
    if cfg.snapshot_stride is not None:
        lines.append(f"snapshot_stride = {cfg.snapshot_stride}")
    lines.append(f"source = {cfg.source}")
    if cfg.source == "file":
        lines.append(f"store_path = {cfg.store_path}")
    else:
        spec = cfg.synthetic
        lines.append(f"synthetic.dim = {spec.dim}")
        lines.append(f"synthetic.identities_per_group = {spec.identities_per_group}")
        lines.append(f"synthetic.instances = {spec.instances}")
        lines.append(f"synthetic.seed = {spec.seed}")
        lines.append("synthetic.sigma_levels = "
                     + ",".join(str(s) for s in spec.sigma_levels))
        lines.append("synthetic.groups = " + ",".join(g.name for g in spec.groups))
        for g in spec.groups:
            prefix = f"synthetic.group.{g.name}"
            lines.append(f"{prefix}.class_spread = {g.class_spread!r}")
            lines.append(f"{prefix}.identity_scale = {g.identity_scale!r}")
            lines.append(f"{prefix}.noise_scale = {g.noise_scale!r}")
            lines.append(f"{prefix}.collapse_rate = {g.collapse_rate!r}")
            lines.append(f"{prefix}.degradation_noise = {g.degradation_noise!r}")
    return "\n".join(lines) + "\n"
