"""CSV matrix files, dataset directories and model JSON."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .core import MultiViewData, PliableCoefs, Preprocessing, TwoSourceModel

FILES = ("x1", "x2", "z", "y")


class CsvFormatError(ValueError):
    """Malformed CSV input; the message names file, row and column."""


def _fmt(v):
    return repr(float(v))


def write_matrix(path, M, names):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in M:
            w.writerow([_fmt(v) for v in row])


def read_table(path):
    """Header and raw string cells of a rectangular CSV file."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(f"{path}: empty file (a header row is required)")
    header, body = rows[0], rows[1:]
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise CsvFormatError(
                f"{path}: row {i} has {len(row)} cells, header has {len(header)}")
    return header, body


def _to_float(path, body, header, cols):
    out = np.empty((len(body), len(cols)))
    for i, row in enumerate(body):
        for o, c in enumerate(cols):
            cell = row[c].strip()
            if cell == "":
                raise CsvFormatError(
                    f"{path}: missing value at row {i + 2}, column {c + 1} ({header[c]!r})")
            try:
                out[i, o] = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: non-numeric value {cell!r} at row {i + 2}, "
                    f"column {c + 1} ({header[c]!r})") from None
            if not np.isfinite(out[i, o]):
                raise CsvFormatError(
                    f"{path}: non-finite value at row {i + 2}, column {c + 1} ({header[c]!r})")
    return out


def read_matrix(path):
    header, body = read_table(path)
    return header, _to_float(path, body, header, range(len(header)))


def _expand_categorical(path, header, body, categorical, reference_coding):
    """Numeric columns plus indicator columns for the categorical ones."""
    cat = set(categorical)
    unknown = cat - set(header)
    if unknown:
        raise CsvFormatError(f"{path}: no column named {sorted(unknown)[0]!r}")
    names, blocks = [], []
    for c, name in enumerate(header):
        if name not in cat:
            names.append(name)
            blocks.append(_to_float(path, body, header, [c]))
            continue
        cells = [row[c].strip() for row in body]
        for i, v in enumerate(cells):
            if v == "":
                raise CsvFormatError(
                    f"{path}: missing value at row {i + 2}, column {c + 1} ({name!r})")
        levels = sorted(set(cells), key=_level_key)
        if reference_coding:
            levels = levels[1:]
        for lv in levels:
            names.append(f"{name}={lv}")
            blocks.append(np.array([[1.0 if v == lv else 0.0] for v in cells]))
    M = np.hstack(blocks) if blocks else np.empty((len(body), 0))
    return names, M


def _level_key(v):
    try:
        return (0, float(v), v)
    except ValueError:
        return (1, 0.0, v)


def _locate(directory, name):
    d = Path(directory)
    p = d / f"{name}.csv"
    if not p.exists():
        raise FileNotFoundError(f"{p} not found")
    return p


def ingest_csv(directory, categorical=(), reference_coding=False):
    """Read ``x1.csv``, ``x2.csv``, ``z.csv`` and ``y.csv`` from a directory.

    Parameters
    ----------
    categorical : iterable of str
        Columns of ``z.csv`` to expand into indicator columns (one per level;
        with ``reference_coding`` the first level is dropped).
    """
    mats = {}
    counts = {}
    for name in FILES:
        path = _locate(directory, name)
        if name == "z" and categorical:
            header, body = read_table(path)
            _, M = _expand_categorical(path, header, body, categorical, reference_coding)
        else:
            _, M = read_matrix(path)
        mats[name] = M
        counts[name] = M.shape[0]
    if len(set(counts.values())) != 1:
        detail = ", ".join(f"{k}.csv: {v}" for k, v in counts.items())
        raise CsvFormatError(f"{directory}: row counts differ ({detail})")
    if mats["y"].shape[1] != 1:
        raise CsvFormatError(f"{directory}/y.csv: expected one column")
    return MultiViewData(mats["x1"], mats["x2"], mats["z"], mats["y"][:, 0])


def read_groups(directory):
    """Group ids from an optional ``groups.csv`` (first column), else None."""
    p = Path(directory) / "groups.csv"
    if not p.exists():
        return None
    header, body = read_table(p)
    return np.array([row[0].strip() for row in body])


def write_dataset(directory, data):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "x1.csv", data.X1, [f"x1_{j + 1}" for j in range(data.p1)])
    write_matrix(d / "x2.csv", data.X2, [f"x2_{j + 1}" for j in range(data.p2)])
    write_matrix(d / "z.csv", data.Z, [f"z_{k + 1}" for k in range(data.K)])
    write_matrix(d / "y.csv", data.y, ["y"])


def prediction_hash(pred):
    """SHA-256 of the little-endian float64 bytes of a prediction vector."""
    return hashlib.sha256(np.asarray(pred, dtype="<f8").tobytes()).hexdigest()


def model_to_dict(method, model, rho=None, lam=None, alpha=None, cv_surface=None, extra=None):
    out = {
        "method": method,
        "alpha": alpha,
        "rho": rho,
        "lambda": lam,
        "beta1": model.coefs1.beta.tolist(),
        "theta1": model.coefs1.theta.tolist(),
        "beta2": model.coefs2.beta.tolist(),
        "theta2": model.coefs2.theta.tolist(),
        "weights": list(model.weights),
        "preprocessing": model.preprocessing.to_dict(),
        "cv_surface": cv_surface or {},
    }
    if extra:
        out.update(extra)
    return out


def model_from_dict(d):
    K = len(d["preprocessing"]["z_center"])

    def coefs(b, t):
        b = np.asarray(b, dtype=np.float64)
        return PliableCoefs(b, np.asarray(t, dtype=np.float64).reshape(len(b), K))

    return TwoSourceModel(coefs(d["beta1"], d["theta1"]), coefs(d["beta2"], d["theta2"]),
                          Preprocessing.from_dict(d["preprocessing"]),
                          tuple(float(w) for w in d.get("weights", (1.0, 1.0))))


def save_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False, allow_nan=True)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        d = json.load(fh)
    return model_from_dict(d), d
