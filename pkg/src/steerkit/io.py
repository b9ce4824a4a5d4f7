"""On-disk formats: state JSON, count CSV (+ JSON sidecar), steering CSV,
ensemble CSV. All writes are atomic (temp file + rename)."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .criteria import Ensemble
from .errors import ValidationError
from .expsim import OUTCOMES, CountTable, standard_settings
from .qstate import BASIS, check_state
from .steering_game import MeasurementSet, SteeringData

BASIS_GUARD = ",".join(BASIS)
COUNTS_HEADER = ["setting_a", "setting_b", "a", "b", "count"]
STEERING_HEADER = ["setting", "a", "b", "count"]
ENSEMBLE_HEADER = ["b_dot_x", "t_norm", "is_argmax"]


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def state_to_dict(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {
        "basis": BASIS_GUARD,
        "matrix": [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in rho],
    }


def state_from_dict(d: dict) -> np.ndarray:
    if d.get("basis") != BASIS_GUARD:
        raise ValidationError(f"state file basis must be {BASIS_GUARD!r}")
    try:
        m = np.array([[complex(e["re"], e["im"]) for e in row] for row in d["matrix"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed state matrix: {exc}") from exc
    return check_state(m)


def write_state(path, rho) -> None:
    atomic_write(path, dumps(state_to_dict(check_state(rho))))


def read_state(path) -> np.ndarray:
    return state_from_dict(_read_json(path))


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".json")


def counts_to_csv(table: CountTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_HEADER)
    for (i, j), cell in zip(table.pairs.tolist(), table.cells):
        for ia, a in enumerate(OUTCOMES):
            for ib, b in enumerate(OUTCOMES):
                if a == 0 and b == 0:
                    continue
                w.writerow([i, j, a, b, int(cell[ia, ib])])
    return buf.getvalue()


def write_counts(path, table: CountTable) -> None:
    atomic_write(path, counts_to_csv(table))
    side = {
        "settings_a": table.settings_a.to_list(),
        "settings_b": table.settings_b.to_list(),
        **table.meta,
    }
    atomic_write(sidecar_path(path), dumps(side))


def read_counts(path) -> CountTable:
    """Read a count CSV. Setting directions come from the sidecar; without one
    the standard layout (x, y, z, six icosahedral axes) is assumed."""
    rows = _read_csv(path, COUNTS_HEADER)
    side = sidecar_path(path)
    if side.exists():
        meta = _read_json(side)
        sa = MeasurementSet(np.array(meta.pop("settings_a"), dtype=float))
        sb = MeasurementSet(np.array(meta.pop("settings_b"), dtype=float))
    else:
        meta = {}
        sa = sb = standard_settings()
    index: dict[tuple[int, int], int] = {}
    cells: list[np.ndarray] = []
    for r in rows:
        i, j, a, b, n = (int(r[k]) for k in COUNTS_HEADER)
        if a not in OUTCOMES or b not in OUTCOMES or (a == 0 and b == 0):
            raise ValidationError(f"invalid outcome pair ({a}, {b})")
        if (i, j) not in index:
            index[(i, j)] = len(cells)
            cells.append(np.zeros((3, 3), dtype=np.int64))
        cells[index[(i, j)]][OUTCOMES.index(a), OUTCOMES.index(b)] += n
    if not cells:
        raise ValidationError(f"{path}: no count rows")
    return CountTable(sa, sb, np.array(list(index), dtype=np.int64), np.array(cells), meta)


def steering_to_csv(data: SteeringData) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STEERING_HEADER)
    for k, c in enumerate(data.counts):
        for ia, a in enumerate((1, -1)):
            for ib, b in enumerate((1, -1)):
                w.writerow([k, a, b, int(c[ia, ib])])
    return buf.getvalue()


def read_steering(path) -> SteeringData:
    rows = _read_csv(path, STEERING_HEADER)
    by_setting: dict[int, np.ndarray] = {}
    for r in rows:
        k, a, b, n = (int(r[c]) for c in STEERING_HEADER)
        if a not in (1, -1) or b not in (1, -1):
            raise ValidationError(f"invalid steering outcome ({a}, {b})")
        by_setting.setdefault(k, np.zeros((2, 2), dtype=np.int64))[(1 - a) // 2, (1 - b) // 2] += n
    if sorted(by_setting) != list(range(len(by_setting))):
        raise ValidationError("steering settings must be numbered 0..n-1")
    return SteeringData(np.array([by_setting[k] for k in range(len(by_setting))]))


def sniff_header(path) -> list[str]:
    with open(path, newline="") as fh:
        return next(csv.reader(fh), [])


def _read_csv(path, header: list[str]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != header:
            raise ValidationError(f"{path}: expected header {','.join(header)}, got {reader.fieldnames}")
        try:
            return list(reader)
        except csv.Error as exc:
            raise ValidationError(f"{path}: {exc}") from exc


ENSEMBLE_DECIMALS = 12


def _fixed(x: float) -> str:
    # round to the 1e-12 resolution of the ensemble; "+ 0.0" drops negative zero
    return repr(round(float(x), ENSEMBLE_DECIMALS) + 0.0)


def ensemble_to_csv(ens: Ensemble) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ENSEMBLE_HEADER)
    for p, q, flag in zip(ens.b_dot_x, ens.t_norm, ens.is_argmax):
        w.writerow([_fixed(p), _fixed(q), int(flag)])
    return buf.getvalue()
