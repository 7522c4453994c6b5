import csv
import itertools
import json
import logging
import math
import os
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from . import __version__
from .errors import ConfigError, DissipStabError, SweepGuardExceeded
from .hurwitz import CLASSIFY_TOL
from .models import MODEL_TYPES, RadiativeTable, create_model
from .workers import resolve_threads

logger = logging.getLogger(__name__)

MAX_POINTS = 10**7
MAX_AXES = 3
SCALES = ("linear", "log")
OUTPUTS = ("verdict", "abscissa", "leading", "H", "krein_signs")
CONFIG_KEYS = {"model", "variant", "params", "axes", "outputs", "radiative_table"}
AXIS_KEYS = {"name", "start", "stop", "count", "scale"}
DETERMINISM = "rows in grid order (first axis slowest); no random state"

# Units of the output columns; axis columns carry the model's own units.
OUTPUT_COLUMNS = {
    "verdict": [("verdict", "")],
    "abscissa": [("abscissa", "1/time")],
    "leading": [("leading_re", "1/time"), ("leading_im", "rad/time")],
    "H": [("H", "")],
    "krein_signs": [("krein_signs", "")],
}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    @classmethod
    def from_dict(cls, content):
        if not isinstance(content, dict):
            raise ConfigError("Axis must be an object, got {!r}.".format(content))
        unknown = set(content) - AXIS_KEYS
        if unknown:
            raise ConfigError("Unknown axis keys {}.".format(sorted(unknown)))
        try:
            axis = cls(
                name=str(content["name"]),
                start=float(content["start"]),
                stop=float(content["stop"]),
                count=int(content["count"]),
                scale=content.get("scale", "linear"),
            )
        except KeyError as e:
            raise ConfigError("Axis is missing {}.".format(e))
        except (TypeError, ValueError) as e:
            raise ConfigError("Invalid axis {!r}: {}".format(content, e))
        if axis.count < 2:
            raise ConfigError("Axis {} needs count >= 2.".format(axis.name))
        if axis.scale not in SCALES:
            raise ConfigError("Axis {}: unknown scale {!r}.".format(axis.name, axis.scale))
        if axis.scale == "log" and not (axis.start > 0 and axis.stop > 0):
            raise ConfigError("Axis {}: log scale needs positive ends.".format(axis.name))
        return axis

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def to_dict(self):
        return {
            "name": self.name,
            "start": self.start,
            "stop": self.stop,
            "count": self.count,
            "scale": self.scale,
        }


class SweepSpec(object):
    """
    A model (or raw quartic), up to three axes and the requested outputs.

    Args:
        model: key of `MODEL_TYPES`.
        axes: tuple of `Axis`, first axis slowest.
        outputs: names from OUTPUTS, in column order.
        params: fixed model parameters.
        variant: model variant, if the model has several.
        radiative_table: {"q1"|"q2": path} of two-column tables.
        base_dir: directory the table paths are relative to.
    """

    def __init__(
        self,
        model,
        axes,
        outputs=OUTPUTS,
        params=None,
        variant=None,
        radiative_table=None,
        base_dir="",
    ):
        self._model = model
        self._axes = tuple(axes)
        self._outputs = tuple(outputs)
        self._params = dict(params or {})
        self._variant = variant
        self._radiative_table = dict(radiative_table) if radiative_table else None
        self._base_dir = base_dir

    @classmethod
    def from_dict(cls, content, base_dir=""):
        if not isinstance(content, dict):
            raise ConfigError("Sweep config must be a JSON object.")
        if "spec" in content and "model" not in content:
            # Output of an earlier JSON sweep.
            content = content["spec"]
        unknown = set(content) - CONFIG_KEYS
        if unknown:
            raise ConfigError("Unknown config keys {}.".format(sorted(unknown)))
        if content.get("model") not in MODEL_TYPES:
            raise ConfigError("Unknown model {!r}.".format(content.get("model")))
        axes = content.get("axes") or []
        if not 1 <= len(axes) <= MAX_AXES:
            raise ConfigError("A sweep needs 1 to {} axes.".format(MAX_AXES))
        outputs = tuple(content.get("outputs", OUTPUTS))
        bad = [name for name in outputs if name not in OUTPUTS]
        if bad:
            raise ConfigError("Unknown outputs {}.".format(bad))
        params = content.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object.")
        radiative_table = content.get("radiative_table")
        if radiative_table is not None and not isinstance(radiative_table, dict):
            raise ConfigError("radiative_table must be an object.")
        spec = cls(
            content["model"],
            [Axis.from_dict(axis) for axis in axes],
            outputs=outputs,
            params=params,
            variant=content.get("variant"),
            radiative_table=radiative_table,
            base_dir=base_dir,
        )
        names = MODEL_TYPES[spec.model()].parameter_names()
        for axis in spec.axes():
            if axis.name not in names:
                raise ConfigError(
                    "Axis {!r} is not a parameter of {}.".format(axis.name, spec.model())
                )
        return spec

    def model(self):
        return self._model

    def axes(self):
        return self._axes

    def outputs(self):
        return self._outputs

    def params(self):
        return dict(self._params)

    def variant(self):
        return self._variant

    def radiative_table(self):
        return dict(self._radiative_table) if self._radiative_table else None

    def size(self):
        size = 1
        for axis in self._axes:
            size *= axis.count
        return size

    def grid(self):
        names = [axis.name for axis in self._axes]
        for values in itertools.product(*(axis.values() for axis in self._axes)):
            yield dict(zip(names, (float(x) for x in values)))

    def table_path(self, path):
        return os.path.join(self._base_dir, path)

    def model_params(self):
        params = self.params()
        for name, path in (self._radiative_table or {}).items():
            if name not in ("q1", "q2"):
                raise ConfigError("radiative_table keys are q1 and q2, got {!r}.".format(name))
            params[name] = RadiativeTable.load(self.table_path(path), name)
        return params

    def create_model(self):
        return create_model(self._model, self.model_params(), self._variant)

    def columns(self):
        header = [(axis.name, "") for axis in self._axes]
        for name in self._outputs:
            header.extend(OUTPUT_COLUMNS[name])
        return tuple(header)

    def to_dict(self):
        content = {
            "model": self._model,
            "params": self.params(),
            "axes": [axis.to_dict() for axis in self._axes],
            "outputs": list(self._outputs),
        }
        if self._variant is not None:
            content["variant"] = self._variant
        if self._radiative_table:
            # Saved results carry absolute table paths.
            content["radiative_table"] = {
                name: os.path.abspath(self.table_path(path))
                for name, path in self._radiative_table.items()
            }
        return content

    def __eq__(self, other):
        if not isinstance(other, SweepSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return "SweepSpec({})".format(self.to_dict())


def load_config(path):
    try:
        with open(path, "r") as config_file:
            content = json.load(config_file)
    except OSError as e:
        raise ConfigError("Cannot read config {}: {}".format(path, e))
    except json.JSONDecodeError as e:
        raise ConfigError("Config {} is not valid JSON: {}".format(path, e))
    return SweepSpec.from_dict(content, os.path.dirname(path))


@dataclass(frozen=True)
class SweepResult:
    """Header of (column, unit) pairs, rows in grid order, provenance."""

    header: Tuple[Tuple[str, str], ...]
    rows: Tuple[Tuple[Any, ...], ...]
    provenance: Dict[str, Any]
    spec: Optional[Dict[str, Any]] = None

    def column_names(self):
        return [name for name, _ in self.header]

    def column(self, name):
        index = self.column_names().index(name)
        return [row[index] for row in self.rows]


def provenance(model, variant=None, **extra):
    content = {"model": model, "version": __version__, "determinism": DETERMINISM}
    if variant is not None:
        content["variant"] = variant
    content.update(extra)
    return content


def _output_cells(spec, evaluation):
    cells = []
    for name in spec.outputs():
        if name == "verdict":
            cells.append(evaluation.verdict.stability)
        elif name == "abscissa":
            cells.append(float(evaluation.abscissa))
        elif name == "leading":
            cells.extend([evaluation.leading.real, evaluation.leading.imag])
        elif name == "H":
            cells.append(evaluation.H)
        else:
            cells.append(evaluation.krein_signs)
    return cells


def _error_cells(spec):
    cells = []
    for name in spec.outputs():
        cells.extend(["Error" if name == "verdict" else None] * len(OUTPUT_COLUMNS[name]))
    return cells


def evaluate(spec, threads=None, tol=CLASSIFY_TOL):
    """
    Evaluate the sweep on its full grid.

    Rows that fail to evaluate are logged and kept with empty outputs so
    that the row count always equals the grid size.

    Raises:
        SweepGuardExceeded: the grid holds more than MAX_POINTS points.
    """
    if spec.size() > MAX_POINTS:
        raise SweepGuardExceeded(
            "Sweep of {} points exceeds the guard of {}.".format(spec.size(), MAX_POINTS)
        )
    model = spec.create_model()
    points = list(spec.grid())

    def evaluate_point(indexed):
        index, point = indexed
        try:
            cells = _output_cells(spec, model.evaluate(tol, **point))
        except DissipStabError as e:
            logger.warning("Sweep row {}: {} at {}".format(index, e, point))
            cells = _error_cells(spec)
        return tuple(point.values()) + tuple(cells)

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as executor:
        rows = tuple(executor.map(evaluate_point, enumerate(points)))
    return SweepResult(
        header=spec.columns(),
        rows=rows,
        provenance=provenance(spec.model(), spec.variant(), tol=tol),
        spec=spec.to_dict(),
    )


def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, complex):
        return "{}{:+.17g}j".format(format(value.real, ".17g"), value.imag)
    if isinstance(value, (tuple, list)):
        return " ".join(format_cell(item) for item in value)
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        value = float(format(float(value), ".17g"))
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, complex):
        return [_json_value(value.real), _json_value(value.imag)]
    if isinstance(value, (tuple, list)):
        return [_json_value(item) for item in value]
    if isinstance(value, dict):
        return {key: _json_value(item) for key, item in value.items()}
    return value


class TableWriter(ABC):
    @abstractmethod
    def write(self, result, stream):
        pass

    @classmethod
    def create_writer(cls, table_format):
        writers = {"csv": CSVTableWriter, "json": JSONTableWriter}
        if table_format not in writers:
            raise ConfigError("Unknown output format {!r}.".format(table_format))
        return writers[table_format]()


class CSVTableWriter(TableWriter):
    """Comma-separated, one header row, floats at 17 significant digits."""

    def write(self, result, stream):
        writer = csv.writer(stream, lineterminator="\r\n")
        writer.writerow(result.column_names())
        for row in result.rows:
            writer.writerow([format_cell(value) for value in row])


class JSONTableWriter(TableWriter):
    def write(self, result, stream):
        content = {
            "header": [{"name": name, "unit": unit} for name, unit in result.header],
            "rows": [_json_value(list(row)) for row in result.rows],
            "provenance": _json_value(result.provenance),
        }
        if result.spec is not None:
            content["spec"] = result.spec
        json.dump(content, stream, indent=2, sort_keys=True, allow_nan=False)
        stream.write("\n")


def write_result(result, table_format="csv", path=None, stream=None):
    writer = TableWriter.create_writer(table_format)
    if path:
        with open(path, "w", newline="") as out:
            writer.write(result, out)
    else:
        writer.write(result, stream)
