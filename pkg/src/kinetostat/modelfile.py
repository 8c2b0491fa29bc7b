"""Model document parsing and canonical serialization (schema kinetostat/1).

Documents are JSON trees. Parsing validates the whole document first and
reports every violation with its path; serialization emits a canonical
form (fixed key order, defaults materialized) so that parse/serialize is
idempotent and independent of the input key order.
"""

from __future__ import annotations

import json

import numpy as np

from .chain import (
    JOINT_KINDS,
    MOTIONS,
    TASK_DIMS,
    ChainModel,
    JointModel,
    ManipulatorModel,
    Transform,
)
from .errors import ModelError
from .springs import BRANCHES, SpringLaw

SCHEMA_VERSION = "kinetostat/1"

_TOP_KEYS = {"version", "task_dim", "name", "units", "workspace", "chains"}
_CHAIN_KEYS = {"name", "base", "tool", "ik_seed", "elements"}
_TRANSFORM_KEYS = {"translation", "rpy"}
_ELEMENT_KEYS = {"link", "joint"}
_JOINT_KEYS = {"kind", "motion", "axis", "stiffness", "spring"}
_SPRING_KEYS = {"k", "offset", "branch"}


class _Collector:
    def __init__(self):
        self.problems: list[str] = []

    def add(self, path, message):
        self.problems.append(f"{path}: {message}")

    def raise_if_any(self):
        if self.problems:
            raise ModelError("invalid model document\n" + "\n".join(self.problems))


def _check_keys(obj, allowed, path, errs):
    for key in obj:
        if key not in allowed:
            errs.add(f"{path}.{key}", "unknown key")


def _number(value, path, errs):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errs.add(path, f"expected a number, got {type(value).__name__}")
        return 0.0
    return float(value)


def _vector(value, length, path, errs):
    if not isinstance(value, list) or len(value) != length:
        errs.add(path, f"expected a list of {length} numbers")
        return (0.0,) * length
    return tuple(_number(v, f"{path}[{i}]", errs) for i, v in enumerate(value))


def _transform(value, path, errs) -> Transform:
    if value is None:
        return Transform.identity()
    if not isinstance(value, dict):
        errs.add(path, "expected an object")
        return Transform.identity()
    _check_keys(value, _TRANSFORM_KEYS, path, errs)
    translation = (0.0, 0.0, 0.0)
    rpy = (0.0, 0.0, 0.0)
    if "translation" in value:
        translation = _vector(value["translation"], 3, f"{path}.translation", errs)
    if "rpy" in value:
        rpy = _vector(value["rpy"], 3, f"{path}.rpy", errs)
    return Transform(translation=translation, rpy=rpy)


def _spring(value, path, errs) -> SpringLaw | None:
    if not isinstance(value, dict):
        errs.add(path, "expected an object")
        return None
    _check_keys(value, _SPRING_KEYS, path, errs)
    k = _number(value.get("k", 0.0), f"{path}.k", errs)
    offset = _number(value.get("offset", 0.0), f"{path}.offset", errs)
    branch = value.get("branch", "linear")
    if branch not in BRANCHES:
        errs.add(f"{path}.branch", f"expected one of {sorted(BRANCHES)}")
        return None
    if k < 0.0:
        errs.add(f"{path}.k", "spring stiffness must be >= 0")
        return None
    return SpringLaw(k=k, preload_offset=offset, branch=branch)


def _joint(value, path, errs) -> JointModel | None:
    if not isinstance(value, dict):
        errs.add(path, "expected an object")
        return None
    _check_keys(value, _JOINT_KEYS, path, errs)
    kind = value.get("kind")
    if kind not in JOINT_KINDS:
        errs.add(f"{path}.kind", f"expected one of {sorted(JOINT_KINDS)}")
        return None
    motion = value.get("motion")
    if motion not in MOTIONS:
        errs.add(f"{path}.motion", f"expected one of {sorted(MOTIONS)}")
        return None
    axis = _vector(value.get("axis"), 3, f"{path}.axis", errs)
    norm = float(np.linalg.norm(axis))
    if abs(norm - 1.0) > 1e-12:
        errs.add(f"{path}.axis", f"axis must have unit norm, |axis| = {norm!r}")
        return None

    stiffness = None
    if kind == "virtual_elastic":
        if "stiffness" not in value:
            errs.add(f"{path}.stiffness", "virtual_elastic joint needs a stiffness")
            return None
        stiffness = _number(value["stiffness"], f"{path}.stiffness", errs)
        if stiffness <= 0.0:
            errs.add(f"{path}.stiffness", "stiffness must be > 0")
            return None
    elif "stiffness" in value:
        errs.add(f"{path}.stiffness", f"not allowed on a {kind} joint")
        return None

    spring = None
    if kind == "preloaded_passive":
        if "spring" not in value:
            errs.add(f"{path}.spring", "preloaded_passive joint needs a spring")
            return None
        spring = _spring(value["spring"], f"{path}.spring", errs)
        if spring is None:
            return None
    elif "spring" in value:
        errs.add(f"{path}.spring", f"not allowed on a {kind} joint")
        return None
    return JointModel(kind=kind, motion=motion, axis=axis, spring=spring, stiffness=stiffness)


def parse_document(tree) -> ManipulatorModel:
    errs = _Collector()
    if not isinstance(tree, dict):
        raise ModelError("invalid model document\n$: expected a top-level object")
    _check_keys(tree, _TOP_KEYS, "$", errs)

    version = tree.get("version")
    if version != SCHEMA_VERSION:
        errs.add("$.version", f"expected {SCHEMA_VERSION!r}, got {version!r}")
    task_dim = tree.get("task_dim")
    if task_dim not in TASK_DIMS:
        errs.add("$.task_dim", f"expected one of {TASK_DIMS}")
        errs.raise_if_any()
    name = tree.get("name", "")
    if not isinstance(name, str):
        errs.add("$.name", "expected a string")
        name = ""

    units = tree.get("units", {})
    if not isinstance(units, dict) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in units.items()
    ):
        errs.add("$.units", "expected a string-to-string map")
        units = {}

    workspace = None
    if tree.get("workspace") is not None:
        ws = tree["workspace"]
        n_pos = 2 if task_dim in (2, 3) else 3
        if not isinstance(ws, dict):
            errs.add("$.workspace", "expected an object")
        else:
            _check_keys(ws, {"min", "max"}, "$.workspace", errs)
            lo = _vector(ws.get("min"), n_pos, "$.workspace.min", errs)
            hi = _vector(ws.get("max"), n_pos, "$.workspace.max", errs)
            if all(l < h for l, h in zip(lo, hi)):
                workspace = (lo, hi)
            else:
                errs.add("$.workspace", "min must be strictly below max per axis")

    chains_doc = tree.get("chains")
    chains: list[ChainModel] = []
    if not isinstance(chains_doc, list) or not chains_doc:
        errs.add("$.chains", "expected a nonempty list")
    else:
        for ci, cdoc in enumerate(chains_doc):
            cpath = f"$.chains[{ci}]"
            if not isinstance(cdoc, dict):
                errs.add(cpath, "expected an object")
                continue
            _check_keys(cdoc, _CHAIN_KEYS, cpath, errs)
            base = _transform(cdoc.get("base"), f"{cpath}.base", errs)
            tool = _transform(cdoc.get("tool"), f"{cpath}.tool", errs)
            cname = cdoc.get("name", "")
            if not isinstance(cname, str):
                errs.add(f"{cpath}.name", "expected a string")
                cname = ""
            edocs = cdoc.get("elements")
            elements = []
            broken = False
            if not isinstance(edocs, list) or not edocs:
                errs.add(f"{cpath}.elements", "expected a nonempty list")
                continue
            for ei, edoc in enumerate(edocs):
                epath = f"{cpath}.elements[{ei}]"
                if not isinstance(edoc, dict):
                    errs.add(epath, "expected an object")
                    broken = True
                    continue
                _check_keys(edoc, _ELEMENT_KEYS, epath, errs)
                link = _transform(edoc.get("link"), f"{epath}.link", errs)
                if "joint" not in edoc:
                    errs.add(f"{epath}.joint", "missing joint")
                    broken = True
                    continue
                joint = _joint(edoc["joint"], f"{epath}.joint", errs)
                if joint is None:
                    broken = True
                    continue
                elements.append((link, joint))
            if broken:
                continue
            if not any(j.kind == "virtual_elastic" for _, j in elements):
                errs.add(f"{cpath}.elements", "chain needs at least one virtual_elastic joint")
                continue
            ik_seed = None
            if cdoc.get("ik_seed") is not None:
                seed_doc = cdoc["ik_seed"]
                n_rigid = sum(
                    1 for _, j in elements if j.kind in ("actuated", "perfect_passive", "preloaded_passive")
                )
                if not isinstance(seed_doc, list) or len(seed_doc) != n_rigid:
                    errs.add(
                        f"{cpath}.ik_seed",
                        f"expected a list of {n_rigid} numbers (one per rigid coordinate)",
                    )
                else:
                    ik_seed = [
                        _number(v, f"{cpath}.ik_seed[{i}]", errs) for i, v in enumerate(seed_doc)
                    ]
            chains.append(
                ChainModel(
                    task_dim=task_dim,
                    base_pose=base,
                    elements=elements,
                    tool_transform=tool,
                    ik_seed=None if ik_seed is None else np.array(ik_seed),
                    name=cname,
                )
            )
    errs.raise_if_any()
    return ManipulatorModel(
        task_dim=task_dim, chains=chains, units=dict(units), workspace=workspace, name=name
    )


def parse_model(text: str) -> ManipulatorModel:
    """Parse and validate a model document; raises ModelError with every
    violation and its document path."""
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelError(f"model document syntax error: {err}") from err
    return parse_document(tree)


def _transform_doc(tr: Transform) -> dict:
    return {
        "translation": [float(v) for v in tr.translation],
        "rpy": [float(v) for v in tr.rpy],
    }


def document_tree(model: ManipulatorModel) -> dict:
    """Canonical (fully materialized, fixed key order) document tree."""
    chains = []
    for chain in model.chains:
        elements = []
        for link, joint in chain.elements:
            jdoc = {
                "kind": joint.kind,
                "motion": joint.motion,
                "axis": [float(v) for v in joint.axis],
            }
            if joint.stiffness is not None:
                jdoc["stiffness"] = float(joint.stiffness)
            if joint.spring is not None:
                jdoc["spring"] = {
                    "k": float(joint.spring.k),
                    "offset": float(joint.spring.preload_offset),
                    "branch": joint.spring.branch,
                }
            elements.append({"link": _transform_doc(link), "joint": jdoc})
        chains.append(
            {
                "name": chain.name,
                "base": _transform_doc(chain.base_pose),
                "tool": _transform_doc(chain.tool_transform),
                "ik_seed": None if chain.ik_seed is None else [float(v) for v in chain.ik_seed],
                "elements": elements,
            }
        )
    workspace = None
    if model.workspace is not None:
        lo, hi = model.workspace
        workspace = {"min": [float(v) for v in lo], "max": [float(v) for v in hi]}
    return {
        "version": SCHEMA_VERSION,
        "task_dim": model.task_dim,
        "name": model.name,
        "units": dict(sorted(model.units.items())),
        "workspace": workspace,
        "chains": chains,
    }


def serialize_model(model: ManipulatorModel) -> str:
    return json.dumps(document_tree(model), indent=2) + "\n"
