"""CSV data, JSON model files and trace files.

Model file layout (``format_version`` 1)::

    {
      "format_version": 1,
      "dim": d,
      "k": K,
      "weights": [K floats],
      "components": [{"mean": [d floats], "covariance": [d*d floats, row-major]}, ...]
    }

Covariances are stored as full symmetric matrices rebuilt from the Cholesky
factor; loading re-factorizes and re-validates them.
"""
import csv
import json
import math
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import EmptyFile, NotPositiveDefinite, NotSymmetric, ParseError, RaggedRows, SchemaError
from .fitter import FitTrace
from .gaussian import GaussianComponent
from .linalg import cholesky
from .mixture import WEIGHT_SUM_TOL, DataSet, MixtureModel

FORMAT_VERSION = 1
PathLike = Union[str, Path]


def fmt(v: float) -> str:
    """17 significant digits: exact round-trip for float64."""
    return format(float(v), ".17g")


def load_csv(path: PathLike, has_header: bool = False) -> DataSet:
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            if has_header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            try:
                vals = [float(f) for f in fields]
            except ValueError:
                raise ParseError(f"cannot parse {fields!r} as numbers", lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite value", lineno)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise RaggedRows(f"expected {width} fields, found {len(vals)}", lineno)
            rows.append(vals)
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return DataSet(np.array(rows, dtype=np.float64))


def write_csv(path: PathLike, rows, header: Iterable[str] = None) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        if header is not None:
            out.writerow(list(header))
        for row in np.atleast_2d(np.asarray(rows, dtype=np.float64)):
            out.writerow([fmt(v) for v in row])


def write_labels(path: PathLike, labels) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{int(z)}\n" for z in labels)


def model_to_dict(m: MixtureModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "dim": m.dim,
        "k": m.k,
        "weights": [float(w) for w in m.weights],
        "components": [
            {
                "mean": [float(v) for v in c.mean],
                "covariance": [float(v) for v in c.cov.to_matrix().reshape(-1)],
            }
            for c in m.components
        ],
    }


def model_from_dict(doc: dict) -> MixtureModel:
    if not isinstance(doc, dict):
        raise SchemaError("model file must hold a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        d, k = int(doc["dim"]), int(doc["k"])
        weights = np.asarray(doc["weights"], dtype=np.float64)
        comps_doc = doc["components"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model file: {exc}") from None
    if d < 1 or k < 1 or weights.shape != (k,) or len(comps_doc) != k:
        raise SchemaError(f"expected {k} weights and components of dimension {d}")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
        raise SchemaError("weights must be finite and positive")
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise SchemaError(f"weights sum to {weights.sum()!r}, not 1")
    comps = []
    for j, c in enumerate(comps_doc):
        try:
            mean = np.asarray(c["mean"], dtype=np.float64)
            cov = np.asarray(c["covariance"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"component {j}: {exc}") from None
        if mean.shape != (d,) or cov.shape != (d * d,):
            raise SchemaError(f"component {j}: wrong mean or covariance length")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise SchemaError(f"component {j}: non-finite values")
        try:
            spd = cholesky(cov.reshape(d, d))
        except NotSymmetric as exc:
            raise SchemaError(f"component {j}: {exc}") from None
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(f"component {j}: {exc}") from None
        comps.append(GaussianComponent(mean, spd))
    try:
        return MixtureModel(weights, comps)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def save_model(m: MixtureModel, path: PathLike) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2) + "\n")


def load_model(path: PathLike) -> MixtureModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)


def write_trace(trace: FitTrace, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["iteration", "loglik", "delta", "rescued"])
        for t, (ll, dl, r) in enumerate(zip(trace.loglik, trace.deltas(), trace.rescued)):
            out.writerow([t, fmt(ll), fmt(dl), int(r)])
