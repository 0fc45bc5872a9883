"""JSON records for matrices, vectors, channels, candidates and results.

Complex numbers are ``[re, im]`` pairs.  Matrices are row-major:

    {"rows": r, "cols": c, "entries": [[re, im], ...]}
    {"dim": n, "entries": [[re, im], ...]}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channel import CHOI_CONVENTION, ChoiMatrix, KrausChannel, RankOneKrausFamily
from .linalg import as_matrix, as_vector
from .mub import MubFamily
from .sic import Fiducial, SicCandidate


class FormatError(ValueError):
    """A JSON record does not match the expected schema."""


def _pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _complex(entries) -> np.ndarray:
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FormatError("entries must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": _pairs(m.reshape(-1))}


def matrix_from_json(rec: dict) -> np.ndarray:
    try:
        rows, cols = int(rec["rows"]), int(rec["cols"])
        values = _complex(rec["entries"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad matrix record: {exc}") from exc
    if values.shape[0] != rows * cols:
        raise FormatError(f"matrix record has {values.shape[0]} entries, expected {rows * cols}")
    try:
        return as_matrix(values.reshape(rows, cols))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def vector_to_json(v) -> dict:
    v = as_vector(v)
    return {"dim": v.shape[0], "entries": _pairs(v)}


def vector_from_json(rec: dict) -> np.ndarray:
    try:
        dim = int(rec["dim"])
        values = _complex(rec["entries"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad vector record: {exc}") from exc
    if values.shape[0] != dim:
        raise FormatError(f"vector record has {values.shape[0]} entries, expected {dim}")
    try:
        return as_vector(values)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def channel_to_json(ch: KrausChannel) -> dict:
    return {"d_in": ch.d_in, "d_out": ch.d_out, "kraus": [matrix_to_json(r) for r in ch.kraus]}


def channel_from_json(rec: dict) -> KrausChannel:
    try:
        ops = tuple(matrix_from_json(m) for m in rec["kraus"])
        return KrausChannel(int(rec["d_in"]), int(rec["d_out"]), ops)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad channel record: {exc}") from exc
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def choi_to_json(c: ChoiMatrix) -> dict:
    return {"type": "choi", "convention": c.convention, "d_in": c.d_in, "d_out": c.d_out,
            "matrix": matrix_to_json(c.matrix)}


def choi_from_json(rec: dict) -> ChoiMatrix:
    try:
        if rec.get("type") != "choi":
            raise FormatError("record is not tagged as a Choi matrix")
        return ChoiMatrix(int(rec["d_in"]), int(rec["d_out"]), matrix_from_json(rec["matrix"]),
                          rec.get("convention", CHOI_CONVENTION))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad Choi record: {exc}") from exc
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def family_to_json(fam: RankOneKrausFamily) -> dict:
    return {"d": fam.d, "pairs": [{"x": vector_to_json(x), "y": vector_to_json(y)} for x, y in fam.pairs]}


def family_from_json(rec: dict) -> RankOneKrausFamily:
    try:
        pairs = tuple((vector_from_json(p["x"]), vector_from_json(p["y"])) for p in rec["pairs"])
        return RankOneKrausFamily(int(rec["d"]), pairs)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad rank-one family record: {exc}") from exc
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def fiducial_to_json(f: Fiducial) -> dict:
    return {"d": f.d, "fiducial": vector_to_json(f.w)}


def candidate_to_json(c: SicCandidate) -> dict:
    return {"d": c.d, "vectors": [vector_to_json(v) for v in c.vectors]}


def sic_input_from_json(rec: dict) -> tuple[str, np.ndarray]:
    """Parse ``{"fiducial": vector}`` or ``{"vectors": [vector, ...]}``.

    Returns ``("fiducial", w)`` or ``("vectors", array)``.  Norms are not
    checked here: a slightly non-unit input is a verification failure, not
    a malformed file.  An optional ``d`` field must agree with the data.
    """
    if not isinstance(rec, dict):
        raise FormatError("SIC input must be a JSON object")
    if "fiducial" in rec:
        kind, data = "fiducial", vector_from_json(rec["fiducial"])
        dim = data.shape[0]
    elif "vectors" in rec:
        vs = rec["vectors"]
        if not isinstance(vs, list) or not vs:
            raise FormatError("'vectors' must be a non-empty list")
        rows = [vector_from_json(v) for v in vs]
        dim = rows[0].shape[0]
        if any(r.shape[0] != dim for r in rows):
            raise FormatError("vectors have different dimensions")
        kind, data = "vectors", np.array(rows)
    else:
        raise FormatError("SIC input needs a 'fiducial' or 'vectors' field")
    if "d" in rec and int(rec["d"]) != dim:
        raise FormatError(f"d={rec['d']} does not match vector dimension {dim}")
    return kind, data


def mub_to_json(f: MubFamily) -> dict:
    return {
        "d": f.d,
        "bases": [{"index": i, "vectors": [vector_to_json(v) for v in b]} for i, b in enumerate(f.bases)],
    }


def mub_from_json(rec: dict) -> MubFamily:
    try:
        bases = sorted(rec["bases"], key=lambda b: int(b["index"]))
        return MubFamily(int(rec["d"]), tuple([vector_from_json(v) for v in b["vectors"]] for b in bases))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad MUB record: {exc}") from exc
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def load_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(obj, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
