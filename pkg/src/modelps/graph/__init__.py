"""Framework-neutral model graph: structure, shape inference, edits, drafts."""

from .draft import Draft, parse_draft, serialize_draft
from .edits import (
    EditAction,
    InsertNode,
    RemoveNode,
    ReplaceHead,
    SetAttr,
    SetFrozenPrefix,
    apply_edit,
)
from .layers import EXECUTABLE_KINDS, LAYER_KINDS, PARAMETERIZED_KINDS, LayerNode
from .model import ModelGraph, ShapeMap, count_params, infer_shapes

__all__ = [
    "Draft",
    "EditAction",
    "EXECUTABLE_KINDS",
    "InsertNode",
    "LAYER_KINDS",
    "LayerNode",
    "ModelGraph",
    "PARAMETERIZED_KINDS",
    "RemoveNode",
    "ReplaceHead",
    "SetAttr",
    "SetFrozenPrefix",
    "ShapeMap",
    "apply_edit",
    "count_params",
    "infer_shapes",
    "parse_draft",
    "serialize_draft",
]
