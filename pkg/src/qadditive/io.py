"""Dataset and model files, and figure tables.

Dataset CSV::

    # d: 3
    # fidelity: 0.9
    N,E_total
    6,1
    36,18.648

Lines starting with ``#`` before the header are ``key: value`` metadata.
The first non-comment line must be exactly ``N,E_total``.  ``N`` is a
positive integer, strictly increasing; ``E_total`` is a non-negative real.

Model files are JSON objects (schema version 1)::

    {"schema": "qadditive-model", "version": 1, "base": 6, "q": 3,
     "exponents": [1.0, 0.5, 0.0], "evector": [0.0, 1.0, 18.648],
     "notes": []}

with exactly one of ``exponents`` or ``closure``.  Exact rationals are
written as strings ``"p/q"``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DataWarning, DatasetError, QAdditiveError
from .model import ScalingModel, closed_form_eval

SCHEMA = "qadditive-model"
SCHEMA_VERSION = 1
DEFAULT_PRECISION = 6
MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class DatasetFile:
    N: tuple
    E_total: tuple
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def per_copy(self) -> tuple:
        return tuple(e / n for n, e in zip(self.N, self.E_total))

    def as_dict(self) -> dict:
        return dict(zip(self.N, self.E_total))


def _parse_meta(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def parse_dataset(text: str) -> DatasetFile:
    meta, rows = {}, []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not header_seen:
                body = line[1:].strip()
                if ":" in body:
                    key, value = body.split(":", 1)
                    meta[key.strip()] = _parse_meta(value.strip())
            continue
        if not header_seen:
            if [c.strip() for c in line.split(",")] != ["N", "E_total"]:
                raise DatasetError(f"expected header 'N,E_total', got {line!r}", lineno)
            header_seen = True
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 2:
            raise DatasetError(f"expected 2 columns, got {len(cells)}", lineno)
        try:
            n = int(cells[0])
            e = float(cells[1])
        except ValueError:
            raise DatasetError(f"cannot parse row {line!r}", lineno) from None
        if n < 1:
            raise DatasetError(f"N must be a positive integer, got {n}", lineno)
        if not math.isfinite(e) or e < 0:
            raise DatasetError(f"E_total must be finite and non-negative, got {cells[1]}", lineno)
        if rows and n <= rows[-1][0]:
            raise DatasetError(f"N must be strictly increasing ({n} after {rows[-1][0]})", lineno)
        rows.append((n, e))
    if not rows:
        raise DatasetError("no data rows")
    for (n0, e0), (n1, e1) in zip(rows, rows[1:]):
        if e1 < e0 - MONOTONE_TOL * max(1.0, abs(e0)):
            warnings.warn(f"E_total decreases from N={n0} to N={n1}", DataWarning, stacklevel=3)
    return DatasetFile(tuple(r[0] for r in rows), tuple(r[1] for r in rows), meta)


def load_dataset(path) -> DatasetFile:
    """Read and validate a dataset CSV; decreasing data only warns."""
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def dump_dataset(dataset: DatasetFile) -> str:
    out = [f"# {k}: {v}" for k, v in dataset.metadata.items()]
    out.append("N,E_total")
    out.extend(f"{n},{e!r}" for n, e in zip(dataset.N, dataset.E_total))
    return "\n".join(out) + "\n"


def save_dataset(dataset: DatasetFile, path) -> None:
    Path(path).write_text(dump_dataset(dataset), encoding="utf-8")


def _encode(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (np.integer, np.floating)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        raise QAdditiveError("model values must be finite")
    return v


def _decode(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise QAdditiveError(f"bad numeric field {v!r}")
    return v


def model_to_dict(model: ScalingModel) -> dict:
    d = {"schema": SCHEMA, "version": SCHEMA_VERSION, "base": int(model.base), "q": model.q}
    if model.exponents is not None:
        d["exponents"] = [_encode(v) for v in model.exponents]
    else:
        d["closure"] = [_encode(v) for v in model.closure]
    d["evector"] = [_encode(v) for v in model.evector]
    if model.monotone:
        d["monotone"] = True
    d["notes"] = list(model.notes)
    return d


def model_from_dict(d: dict) -> ScalingModel:
    if d.get("schema") != SCHEMA or d.get("version") != SCHEMA_VERSION:
        raise QAdditiveError(f"unsupported model schema {d.get('schema')!r} v{d.get('version')!r}")
    if ("exponents" in d) == ("closure" in d):
        raise QAdditiveError("model file needs exactly one of 'exponents' or 'closure'")
    try:
        base = d["base"]
        evector = tuple(_decode(v) for v in d["evector"])
    except KeyError as exc:
        raise QAdditiveError(f"model file missing field {exc}") from None
    if isinstance(base, bool) or not isinstance(base, int):
        raise QAdditiveError("base must be an integer")
    kw = {}
    if "exponents" in d:
        kw["exponents"] = tuple(_decode(v) for v in d["exponents"])
    else:
        kw["closure"] = tuple(_decode(v) for v in d["closure"])
    model = ScalingModel(base, evector, monotone=bool(d.get("monotone", False)),
                         notes=tuple(d.get("notes", ())), **kw)
    if "q" in d and d["q"] != model.q:
        raise QAdditiveError(f"q={d['q']} disagrees with {model.q} components")
    return model


def dumps_model(model: ScalingModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def loads_model(text: str) -> ScalingModel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QAdditiveError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise QAdditiveError("model file must hold a JSON object")
    return model_from_dict(d)


def save_model(model: ScalingModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path) -> ScalingModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))


def default_precision() -> int:
    env = os.environ.get("QADD_PRECISION")
    if env is None:
        return DEFAULT_PRECISION
    try:
        p = int(env)
    except ValueError:
        raise QAdditiveError(f"QADD_PRECISION must be an integer, got {env!r}") from None
    if p < 1:
        raise QAdditiveError("QADD_PRECISION must be >= 1")
    return p


def format_number(x, precision: int | None = None) -> str:
    """Positional (never scientific) decimal with ``precision`` significant digits."""
    p = default_precision() if precision is None else precision
    x = float(x)
    if x == 0:
        return "0"
    return np.format_float_positional(x, precision=p, unique=False, fractional=False, trim="-")


def figure_rows(model: ScalingModel, dataset: DatasetFile | None, N_range) -> list:
    """``[(N, model E/N, data E/N or None), ...]`` for integer ``N`` in ``N_range``."""
    lo, hi = N_range
    Ns = np.arange(int(lo), int(hi) + 1)
    if Ns.size == 0 or Ns[0] < 1:
        raise QAdditiveError("N_range must cover copy counts >= 1")
    curve = closed_form_eval(model, Ns.astype(float)) / Ns
    data = dataset.as_dict() if dataset is not None else {}
    return [(int(n), float(c), (data[n] / n) if n in data else None) for n, c in zip(Ns, curve)]


def emit_figure_data(model: ScalingModel, dataset: DatasetFile | None, N_range,
                     precision: int | None = None) -> str:
    """CSV table ``N,model_per_copy,data_per_copy`` (blank where no data)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "model_per_copy", "data_per_copy"])
    for n, c, d in figure_rows(model, dataset, N_range):
        w.writerow([n, format_number(c, precision), "" if d is None else format_number(d, precision)])
    return buf.getvalue()
