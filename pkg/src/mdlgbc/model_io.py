"""JSON model file: save, load and validate a trained ball representation."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .coding import CodingConstants
from .dataset import NormalizationParams
from .trainer import FORMAT_VERSION, StableBall, TrainedModel

_WEIGHT_TOL = 1e-12
_PRIOR_TOL = 1e-12


class ModelFormatError(ValueError):
    """The model file is unreadable, of an unknown version, or violates its invariants."""


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def model_to_dict(model: TrainedModel, feature_names: list[str] | None = None,
                  label_column: str | None = None) -> dict:
    doc = {
        "format_version": model.format_version,
        "unit": model.unit,
        "seed": model.seed,
        "rng": model.rng,
        "normalization": {"mins": model.normalization.mins.tolist(),
                          "maxs": model.normalization.maxs.tolist()},
        "labels": list(model.label_names),
        "priors": model.priors.tolist(),
        "constants": model.constants.to_dict(),
        "floors": {"r0": model.r0, "eta": model.eta.tolist()},
        "classes": [
            {"label": label,
             "balls": [{"center": b.center.tolist(), "variance": b.variances.tolist(),
                        "radius": b.radius, "n": b.n,
                        "avg_boundary_risk": b.avg_boundary_risk, "weight": b.weight,
                        "center_neg_dist": b.center_neg_dist} for b in balls]}
            for label, balls in zip(model.label_names, model.classes)
        ],
    }
    if feature_names is not None:
        doc["feature_names"] = list(feature_names)
    if label_column is not None:
        doc["label_column"] = label_column
    return doc


def dumps(model: TrainedModel, **kwargs) -> str:
    # json writes floats with repr(), which round-trips float64 exactly
    return json.dumps(model_to_dict(model, **kwargs), indent=1, allow_nan=False) + "\n"


def save_model(model: TrainedModel, path: str | Path, **kwargs) -> None:
    atomic_write_text(path, dumps(model, **kwargs))


def _vector(value, d: int | None, what: str) -> np.ndarray:
    if not isinstance(value, list) or (d is not None and len(value) != d):
        raise ModelFormatError(f"{what}: expected a list of {d} numbers")
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"{what}: non-finite or malformed entries")
    return arr


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ModelFormatError(f"{what}: expected a finite number")
    return float(value)


def model_from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must hold a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    required = ("unit", "seed", "normalization", "labels", "priors", "constants", "floors", "classes")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ModelFormatError(f"missing keys: {', '.join(missing)}")
    if doc["unit"] != "nats":
        raise ModelFormatError(f"unsupported unit {doc['unit']!r}")
    try:
        mins = _vector(doc["normalization"]["mins"], None, "normalization.mins")
        d = mins.size
        maxs = _vector(doc["normalization"]["maxs"], d, "normalization.maxs")
        labels = [str(x) for x in doc["labels"]]
        C = len(labels)
        priors = _vector(doc["priors"], C, "priors")
        k = doc["constants"]
        constants = CodingConstants(*(_number(k[name], f"constants.{name}")
                                      for name in ("eps_r", "eps_v", "eps_num", "eps_mdl")))
        r0 = _number(doc["floors"]["r0"], "floors.r0")
        eta = _vector(doc["floors"]["eta"], d, "floors.eta")
        if not isinstance(doc["classes"], list) or len(doc["classes"]) != C:
            raise ModelFormatError(f"expected {C} class sections")
        classes = []
        for c, section in enumerate(doc["classes"]):
            if str(section["label"]) != labels[c]:
                raise ModelFormatError(f"class section {c} label does not match labels[{c}]")
            balls = []
            for i, rec in enumerate(section["balls"]):
                where = f"class {labels[c]!r} ball {i}"
                n = rec["n"]
                if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                    raise ModelFormatError(f"{where}: n must be a positive integer")
                rho = _number(rec["avg_boundary_risk"], f"{where}.avg_boundary_risk")
                if not 0.0 <= rho <= 1.0:
                    raise ModelFormatError(f"{where}: avg_boundary_risk outside [0, 1]")
                weight = _number(rec["weight"], f"{where}.weight")
                if not 0.0 < weight <= 1.0:
                    raise ModelFormatError(f"{where}: weight outside (0, 1]")
                cnd = rec.get("center_neg_dist")
                balls.append(StableBall(
                    _vector(rec["center"], d, f"{where}.center"),
                    _vector(rec["variance"], d, f"{where}.variance"),
                    _number(rec["radius"], f"{where}.radius"), n, rho, weight,
                    None if cnd is None else _number(cnd, f"{where}.center_neg_dist")))
            if not balls:
                raise ModelFormatError(f"class {labels[c]!r} has no balls")
            total = math.fsum(b.weight for b in balls)
            if abs(total - 1.0) > _WEIGHT_TOL:
                raise ModelFormatError(f"class {labels[c]!r}: weights sum to {total!r}, not 1")
            classes.append(balls)
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc!r}") from None
    if not np.all(maxs >= mins):
        raise ModelFormatError("normalization maxs below mins")
    if np.any(priors <= 0) or abs(math.fsum(priors) - 1.0) > _PRIOR_TOL:
        raise ModelFormatError("priors must be positive and sum to 1")
    return TrainedModel(NormalizationParams(mins, maxs), labels, priors, classes, r0, eta,
                        constants, int(doc["seed"]), format_version=version,
                        rng=str(doc.get("rng", "splitmix64")))


def loads(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from None
    return model_from_dict(doc)


def load_model(path: str | Path) -> tuple[TrainedModel, dict]:
    """Load a model file; also returns the raw document for the optional extra fields."""
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"{path}: model file not found")
    text = path.read_text()
    return loads(text), json.loads(text)
