"""Training and model configuration.

One flat dataclass covers model dimensions, optimization knobs, and the
ablation switches. Values can come from a ``key = value`` text file, from
CLI flags, or from the built-in defaults; precedence is flag > file >
default and is resolved by the CLI layer.
"""

from dataclasses import dataclass, fields, replace


@dataclass
class TrainConfig:
    token_emb_dim: int = 300
    label_emb_dim: int = 50
    char_emb_dim: int = 30
    char_filters: int = 50
    char_kernel: int = 3
    encoder_hidden: int = 256
    decoder_hidden: int = 512
    layers: int = 2
    dropout: float = 0.4
    l2: float = 1e-6
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float = 5.0
    batch_size: int = 16
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0
    min_count: int = 1
    char_cnn: bool = True
    decoder: str = "lstm"
    use_phrase: bool = True
    use_label: bool = True
    embeddings_path: str | None = None

    def validate(self):
        dims = (
            self.token_emb_dim,
            self.label_emb_dim,
            self.char_emb_dim,
            self.char_filters,
            self.encoder_hidden,
            self.decoder_hidden,
            self.layers,
        )
        problems = []
        if any(d < 1 for d in dims):
            problems.append("all dimensions and layer counts must be positive")
        if not (0.0 <= self.dropout < 1.0):
            problems.append(f"dropout must be in [0, 1), got {self.dropout}")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.char_kernel % 2 != 1 or self.char_kernel < 1:
            problems.append(f"char_kernel must be a positive odd width, got {self.char_kernel}")
        if self.decoder not in ("lstm", "mlp"):
            problems.append(f"decoder must be 'lstm' or 'mlp', got {self.decoder!r}")
        if not (self.use_phrase or self.use_label):
            problems.append("use_phrase and use_label cannot both be off")
        if self.max_epochs < 1:
            problems.append(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience < 0:
            problems.append(f"patience must be >= 0, got {self.patience}")
        if problems:
            raise ValueError("invalid configuration: " + "; ".join(problems))
        return self

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, values: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**values).validate()

    def replace(self, **changes) -> "TrainConfig":
        return replace(self, **changes).validate()


def _parse_value(field_type, raw: str):
    if field_type == "bool":
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if field_type == "int":
        return int(raw)
    if field_type == "float":
        return float(raw)
    if raw.lower() == "none":
        return None
    return raw


def _type_name(tp) -> str:
    if tp is bool or tp == "bool":
        return "bool"
    if tp is int or tp == "int":
        return "int"
    if tp is float or tp == "float":
        return "float"
    return "str"


_FIELD_TYPES = {f.name: _type_name(f.type) for f in fields(TrainConfig)}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, blanks are skipped."""
    values: dict = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}: line {lineno}: unknown key {key!r}")
            try:
                values[key] = _parse_value(_FIELD_TYPES[key], raw)
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return values


def write_config_file(path, config: TrainConfig):
    with open(path, "w", encoding="utf-8") as handle:
        for key, value in config.to_dict().items():
            handle.write(f"{key} = {value}\n")
