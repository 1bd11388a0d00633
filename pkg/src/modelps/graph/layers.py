"""Layer node definitions and per-kind attribute schemas."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SchemaViolation

# Attribute names per layer kind, in canonical serialization order.
KIND_ATTRS: dict[str, tuple[str, ...]] = {
    "dense": ("in_features", "out_features", "bias"),
    "relu": (),
    "softmax": (),
    "flatten": (),
    "dropout": ("p",),
    "conv2d": ("in_channels", "out_channels", "kernel", "stride", "padding"),
    "maxpool2d": ("kernel", "stride"),
    "identity": (),
}

LAYER_KINDS = tuple(KIND_ATTRS)

# Kinds carrying trainable parameters.
PARAMETERIZED_KINDS = ("dense", "conv2d")

# Kinds the native trainer can execute; anything else goes to the
# cost-model / simulated evaluation path.
EXECUTABLE_KINDS = ("dense", "relu", "softmax", "flatten", "dropout", "identity")

# Attrs that must be strictly positive integers.
_POSITIVE_INT_ATTRS = {
    "in_features", "out_features", "in_channels", "out_channels", "kernel", "stride",
}
# Attrs that are non-negative integers.
_NONNEG_INT_ATTRS = {"padding", "bias"}


def validate_attrs(kind: str, attrs: dict, path: str = "attrs") -> None:
    """Check that attrs carry exactly the keys required by ``kind`` with legal values."""
    if kind not in KIND_ATTRS:
        raise SchemaViolation(path, f"unknown layer kind {kind!r}")
    required = KIND_ATTRS[kind]
    missing = [k for k in required if k not in attrs]
    if missing:
        raise SchemaViolation(f"{path}/{missing[0]}", "required attribute missing")
    extra = [k for k in attrs if k not in required]
    if extra:
        raise SchemaViolation(f"{path}/{extra[0]}", f"attribute not allowed for kind {kind!r}")
    for key, value in attrs.items():
        if key == "p":
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 <= value <= 1.0:
                raise SchemaViolation(f"{path}/p", "p must lie in [0, 1]")
        elif key in _POSITIVE_INT_ATTRS:
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise SchemaViolation(f"{path}/{key}", "must be a positive integer")
        elif key in _NONNEG_INT_ATTRS:
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise SchemaViolation(f"{path}/{key}", "must be a non-negative integer")
            if key == "bias" and value not in (0, 1):
                raise SchemaViolation(f"{path}/bias", "bias must be 0 or 1")


@dataclass(frozen=True)
class LayerNode:
    """One layer of a model graph.

    ``frozen`` excludes the layer from gradient updates; ``reinit`` marks a
    head swapped by an edit so the trainer starts it from fresh weights
    instead of the published ones.
    """

    id: str
    name: str
    kind: str
    attrs: dict = field(default_factory=dict)
    frozen: bool = False
    reinit: bool = False

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise SchemaViolation("id", "node id must be a non-empty string")
        validate_attrs(self.kind, self.attrs)

    @property
    def parameterized(self) -> bool:
        return self.kind in PARAMETERIZED_KINDS

    def with_attrs(self, **changes) -> "LayerNode":
        attrs = dict(self.attrs)
        attrs.update(changes)
        return LayerNode(self.id, self.name, self.kind, attrs, self.frozen, self.reinit)

    def param_count(self) -> int:
        if self.kind == "dense":
            n = self.attrs["in_features"] * self.attrs["out_features"]
            if self.attrs["bias"]:
                n += self.attrs["out_features"]
            return n
        if self.kind == "conv2d":
            a = self.attrs
            return a["in_channels"] * a["out_channels"] * a["kernel"] ** 2 + a["out_channels"]
        return 0
