from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .errors import ArgumentError
from .mmd import DEFAULT_SCALES, ESTIMATORS


@dataclass(frozen=True)
class TrainConfig:
    """Knobs shared by multi-label training and transfer fine-tuning.

    ``freeze_depth`` and ``mmd_layers`` of None mean "use the model-dependent
    default" (half the trunk, and the last trunk layer plus both hidden head
    layers, respectively).
    """

    seed: int = 0
    learning_rate: float = 0.05
    batch_size: int = 64
    epochs: int = 30
    alpha: float = 1.0
    freeze_depth: int | None = None
    mmd_layers: tuple[int, ...] | None = None
    mmd_multipliers: tuple[float, ...] | None = None
    kernel_scales: tuple[float, ...] = DEFAULT_SCALES
    estimator: str = "biased"
    trunk_dims: tuple[int, ...] = (32, 32)
    head_dims: tuple[int, ...] = (32, 16)

    def __post_init__(self):
        for name in ("mmd_layers", "mmd_multipliers", "kernel_scales", "trunk_dims", "head_dims"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        self.validate()

    def validate(self) -> None:
        for name in ("seed", "batch_size", "epochs"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise ArgumentError(f"{name} must be an integer")
        for name in ("learning_rate", "alpha"):
            if not isinstance(getattr(self, name), (int, float)) or isinstance(getattr(self, name), bool):
                raise ArgumentError(f"{name} must be a number")
        if self.freeze_depth is not None and not isinstance(self.freeze_depth, int):
            raise ArgumentError("freeze_depth must be an integer")
        if self.learning_rate < 0 or self.learning_rate != self.learning_rate:
            raise ArgumentError("learning_rate must be a nonnegative number")
        if self.batch_size < 1:
            raise ArgumentError("batch_size must be positive")
        if self.epochs < 0:
            raise ArgumentError("epochs must be nonnegative")
        if self.alpha < 0:
            raise ArgumentError("alpha must be nonnegative")
        if self.freeze_depth is not None and self.freeze_depth < 0:
            raise ArgumentError("freeze_depth must be nonnegative")
        if self.estimator not in ESTIMATORS:
            raise ArgumentError(f"estimator must be one of {ESTIMATORS}")
        if not self.kernel_scales or any(s <= 0 for s in self.kernel_scales):
            raise ArgumentError("kernel_scales must be positive")
        if self.mmd_multipliers is not None and any(m < 0 for m in self.mmd_multipliers):
            raise ArgumentError("mmd_multipliers must be nonnegative")
        if (self.mmd_layers is not None and self.mmd_multipliers is not None
                and len(self.mmd_layers) != len(self.mmd_multipliers)):
            raise ArgumentError("mmd_multipliers needs one entry per MMD layer")
        if not self.trunk_dims or any(d < 1 for d in self.trunk_dims):
            raise ArgumentError("trunk_dims must be positive")
        if any(d < 1 for d in self.head_dims):
            raise ArgumentError("head_dims must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ArgumentError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
