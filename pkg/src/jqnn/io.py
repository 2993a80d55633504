"""JSON/CSV (de)serialization of polynomials, parameters, models and curves.

Floats are written with Python's shortest round-trip ``repr`` (at most 17
significant digits), so ``dump -> load -> dump`` is byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from jqnn.pipeline import ErrorCurve, MultiQnnModel, UniQnnModel
from jqnn.qnn_params import QnnParams
from jqnn.qsim import BlockSpec
from jqnn.trig_core import TrigPoly1D, TrigPolyND

__all__ = [
    "ModelFormatError",
    "poly_to_dict",
    "poly_from_dict",
    "model_to_dict",
    "model_from_dict",
    "dumps",
    "loads_model",
    "write_atomic",
]


class ModelFormatError(ValueError):
    """A dump is malformed; ``offset`` is the byte position when known."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------------ polynomials


def poly_to_dict(p: TrigPoly1D | TrigPolyND) -> dict:
    if isinstance(p, TrigPoly1D):
        degrees, flat = [p.degree], p.coeffs
    else:
        degrees, flat = list(p.degrees), p.coeffs.reshape(-1)
    return {
        "dims": len(degrees),
        "degrees": degrees,
        "coeffs": [[float(c.real), float(c.imag)] for c in flat],
    }


def poly_from_dict(data: dict) -> TrigPoly1D | TrigPolyND:
    try:
        d = int(data["dims"])
        degrees = [int(v) for v in data["degrees"]]
        raw = np.asarray(data["coeffs"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad polynomial record: {exc}") from exc
    if len(degrees) != d or any(v < 0 for v in degrees):
        raise ModelFormatError(f"degrees {degrees} inconsistent with dims={d}")
    shape = [2 * v + 1 for v in degrees]
    if raw.ndim != 2 or raw.shape != (int(np.prod(shape)), 2):
        raise ModelFormatError(f"expected {int(np.prod(shape))} [re, im] pairs, got shape {raw.shape}")
    coeffs = (raw[:, 0] + 1j * raw[:, 1]).reshape(shape)
    if d == 1:
        return TrigPoly1D(coeffs)
    return TrigPolyND(coeffs)


# ----------------------------------------------------------------------- models


def model_to_dict(model: UniQnnModel | MultiQnnModel) -> dict:
    if isinstance(model, UniQnnModel):
        p = model.params
        return {
            "kind": "uni",
            "K": model.K,
            "N": model.N,
            "L": model.L,
            "c": model.c,
            "depth": p.depth,
            "theta": p.theta.tolist(),
            "phi": p.phi.tolist(),
            "residual": model.residual,
        }
    spec = model.spec
    return {
        "kind": "multi",
        "K": list(model.K),
        "N": list(model.N),
        "L": list(model.L),
        "c": model.c,
        "q": model.q,
        "d": model.d,
        "n_blocks": model.n_blocks,
        "ordering": [list(n) for n in spec.ordering],
        "blocks": [[pj.to_dict() for pj in blk] for blk in spec.blocks],
        "residual": model.residual,
    }


def model_from_dict(data: dict) -> UniQnnModel | MultiQnnModel:
    try:
        kind = data["kind"]
        if kind == "uni":
            params = QnnParams(int(data["depth"]), data["theta"], data["phi"])
            return UniQnnModel(
                int(data["K"]), int(data["N"]), int(data["L"]), float(data["c"]), params,
                float(data.get("residual", 0.0)),
            )
        if kind == "multi":
            ordering = tuple(tuple(int(v) for v in n) for n in data["ordering"])
            blocks = tuple(tuple(QnnParams.from_dict(pj) for pj in blk) for blk in data["blocks"])
            spec = BlockSpec(ordering, blocks, int(data["d"]))
            model = MultiQnnModel(
                tuple(data["K"]), tuple(data["N"]), tuple(data["L"]), float(data["c"]), spec,
                float(data.get("residual", 0.0)),
            )
            if model.q != int(data["q"]) or model.n_blocks != int(data["n_blocks"]):
                raise ModelFormatError("stored q / n_blocks disagree with the block list")
            return model
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad model record: {exc}") from exc
    raise ModelFormatError(f"unknown model kind {kind!r}")


def loads_model(text: str) -> UniQnnModel | MultiQnnModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc.msg}", len(text[: exc.pos].encode())) from exc
    return model_from_dict(data)


def load_curve(text: str, name: str = "") -> ErrorCurve:
    return ErrorCurve.from_csv(text, name)
