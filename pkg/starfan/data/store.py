import json
import logging
import os
import re
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from starfan.core.fan import Fan, fan_from_dict, fan_to_dict
from starfan.data.models import Chamber, LabeledDataset, ParamVector, SweepEntry, TranslatedStar
from starfan.infra.errors import DataError, FanError, LabelError, ParseError

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1
FLOAT_FORMAT = "%.17g"


def read_csv(path: str) -> LabeledDataset:
    """
    Reads a `x1,...,xd,y` file. Rows in error messages are 1-based data rows
    (the header is row 0).
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError as e:
        raise DataError(f"Dataset file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        row = int(match.group(1)) - 1 if match else None
        raise ParseError(f"Malformed CSV {path}", row=row) from e

    columns = [c.strip() for c in df.columns]
    d = len(columns) - 1
    expected = [f"x{i + 1}" for i in range(d)] + ["y"]
    if d < 1 or columns != expected:
        raise ParseError(f"Header must be {','.join(expected) if d >= 1 else 'x1,...,xd,y'}, got {','.join(columns)}", row=0)
    df.columns = columns
    if df.empty:
        raise ParseError(f"{path} has a header but no data rows", row=1)

    for column in columns:
        parsed = pd.to_numeric(df[column].str.strip(), errors="coerce")
        bad = np.flatnonzero(parsed.isna().to_numpy() | ~np.isfinite(parsed.to_numpy(dtype=float)))
        if bad.size:
            row = int(bad[0])
            raise ParseError(f"Not a finite number: {df[column].iloc[row]!r}", row=row + 1, column=column)

    labels = pd.to_numeric(df["y"].str.strip()).to_numpy(dtype=float)
    for row, value in enumerate(labels):
        if value not in (0.0, 1.0):
            raise LabelError(row + 1, df["y"].iloc[row])

    points = df[expected[:-1]].apply(lambda col: col.str.strip()).astype(float).to_numpy()
    logger.info(f"Read {len(points)} points in R^{d} from {path}")
    return LabeledDataset(points, labels.astype(np.int8))


def write_csv(data: LabeledDataset, path: str) -> None:
    df = pd.DataFrame(data.points, columns=[f"x{i + 1}" for i in range(data.d)])
    df["y"] = data.labels.astype(int)
    _ensure_parent(path)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {data.m} points to {path}")


def load_fan(path: str) -> Fan:
    try:
        with open(path) as f:
            payload = json.load(f)
    except FileNotFoundError as e:
        raise FanError(f"Fan file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise FanError(f"{path} is not valid JSON: {e}") from e
    return fan_from_dict(payload, name=f"json:{path}")


def save_fan(fan: Fan, path: str) -> None:
    _write_text(path, json.dumps(fan_to_dict(fan), indent=2, sort_keys=True) + "\n")


def load_rays(path: str) -> np.ndarray:
    """A rays file is a JSON list of [x, y] pairs."""
    try:
        with open(path) as f:
            return np.asarray(json.load(f), dtype=float)
    except FileNotFoundError as e:
        raise FanError(f"Rays file not found: {path}") from e
    except (json.JSONDecodeError, ValueError) as e:
        raise FanError(f"{path} is not a JSON list of rays: {e}") from e


def load_params(path: str) -> Tuple[ParamVector, Optional[np.ndarray]]:
    """Reads either a bare JSON array `a` or an object {"a": [...], "t": [...]}."""
    try:
        with open(path) as f:
            payload = json.load(f)
    except FileNotFoundError as e:
        raise DataError(f"Parameter file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise DataError(f"{path} is not valid JSON: {e}") from e
    try:
        if isinstance(payload, dict):
            star = TranslatedStar(payload["a"], payload.get("t", []))
            return star.params, (star.t if star.t.size else None)
        return ParamVector.of(payload), None
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"Bad parameters in {path}: {e}") from e


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _write_text(path: str, text: str) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="\n") as f:
        f.write(text)


class DataStore:
    """
    Writes the artifacts of one run under a single output directory. File
    names are fixed per artifact so a rerun overwrites byte for byte.
    """

    def __init__(self, out_dir: str):
        self.out_dir = out_dir

    def path(self, name: str) -> str:
        os.makedirs(self.out_dir, exist_ok=True)
        return os.path.join(self.out_dir, name)

    def write_dataset(self, data: LabeledDataset, name: str = "data.csv") -> str:
        target = self.path(name)
        write_csv(data, target)
        return target

    def write_report(self, payload: dict, name: str = "report.json") -> str:
        target = self.path(name)
        body = {"schema": REPORT_SCHEMA, **payload}
        _write_text(target, json.dumps(body, indent=2, sort_keys=True, allow_nan=True) + "\n")
        logger.info(f"Report written to {target}")
        return target

    def write_text(self, text: str, name: str) -> str:
        target = self.path(name)
        _write_text(target, text)
        return target

    def write_chambers(self, chambers: Sequence[Chamber], name: str = "chambers.csv") -> str:
        n = chambers[0].witness.n if chambers else 0
        rows = []
        for chamber in chambers:
            row = {"sign_vector": chamber.key}
            row.update({f"a{j + 1}": v for j, v in enumerate(chamber.witness.values)})
            row.update({"fp": chamber.report.fp, "fn": chamber.report.fn, "err": chamber.report.err, "margin": chamber.margin})
            rows.append(row)
        columns = ["sign_vector"] + [f"a{j + 1}" for j in range(n)] + ["fp", "fn", "err", "margin"]
        df = pd.DataFrame(rows, columns=columns)
        target = self.path(name)
        df.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return target

    def write_grid(self, xs: np.ndarray, ys: np.ndarray, values: np.ndarray, name: str) -> str:
        """Rows are y values, columns x values; the corner cell is `y\\x`."""
        df = pd.DataFrame(values, index=pd.Index(ys, name="y\\x"), columns=[FLOAT_FORMAT % x for x in xs])
        target = self.path(name)
        df.to_csv(target, float_format=FLOAT_FORMAT, lineterminator="\n")
        return target

    def write_sweep(self, entries: List[SweepEntry], name: str = "sweep.csv") -> str:
        rows = []
        for entry in entries:
            row = {"lambda": entry.lam, "status": entry.fit.status.value if entry.fit else "Error"}
            row["objective"] = entry.fit.objective if entry.fit else np.nan
            for side, report in (("train", entry.report), ("holdout", entry.holdout)):
                row[f"{side}_fp"] = report.fp if report else pd.NA
                row[f"{side}_fn"] = report.fn if report else pd.NA
                row[f"{side}_err"] = report.err if report else pd.NA
                row[f"{side}_accuracy"] = report.accuracy if report else np.nan
            if entry.fit:
                row.update({f"a{j + 1}": v for j, v in enumerate(entry.fit.a_star.values)})
            rows.append(row)
        target = self.path(name)
        pd.DataFrame(rows).to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return target
