import csv
import io
import json
import logging
import os
import tempfile
import unittest

from dissipstab import __version__
from dissipstab.errors import ConfigError, SweepGuardExceeded
from dissipstab.hurwitz import MARGINALLY_STABLE, UNSTABLE
from dissipstab.models import RadiativeTable
from dissipstab.sweep import (
    Axis,
    SweepSpec,
    evaluate,
    format_cell,
    load_config,
    write_result,
)
from .testing_tools import testdata_path

logging.basicConfig(filename="tests.log", level=logging.WARNING, filemode="w")


def ziegler_spec(**changes):
    content = {
        "model": "ziegler",
        "axes": [{"name": "P", "start": 1.9, "stop": 2.3, "count": 5}],
        "outputs": ["verdict", "abscissa", "H"],
    }
    content.update(changes)
    return SweepSpec.from_dict(content)


class TestSweepSpec(unittest.TestCase):
    def test_load_config(self):
        spec = load_config(testdata_path("ziegler_sweep.json"))
        self.assertEqual(spec.model(), "ziegler")
        self.assertEqual(spec.size(), 5)
        self.assertEqual(spec.params(), {"b": 0.0})
        self.assertEqual(spec, ziegler_spec(params={"b": 0.0}))

    def test_grid_order(self):
        spec = SweepSpec.from_dict(
            {
                "model": "brouwer",
                "axes": [
                    {"name": "k1", "start": 0.0, "stop": 1.0, "count": 2},
                    {"name": "omega", "start": 1.0, "stop": 100.0, "count": 3, "scale": "log"},
                ],
            }
        )
        points = list(spec.grid())
        self.assertEqual(len(points), 6)
        self.assertEqual([p["k1"] for p in points], [0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
        self.assertAlmostEqual(points[1]["omega"], 10.0)

    def test_rejects_bad_configs(self):
        with self.assertRaises(ConfigError):
            load_config(testdata_path("bad_config.json"))
        with self.assertRaises(ConfigError):
            load_config(testdata_path("missing.json"))
        with self.assertRaises(ConfigError):
            ziegler_spec(model="pendulum")
        with self.assertRaises(ConfigError):
            ziegler_spec(axes=[])
        with self.assertRaises(ConfigError):
            ziegler_spec(axes=[{"name": "Q", "start": 0, "stop": 1, "count": 3}])
        with self.assertRaises(ConfigError):
            ziegler_spec(outputs=["verdict", "colour"])
        with self.assertRaises(ConfigError):
            ziegler_spec(params=[1, 2])

    def test_rejects_bad_axes(self):
        bad_axes = [
            {"name": "P", "start": 0, "stop": 1},
            {"name": "P", "start": 0, "stop": 1, "count": 1},
            {"name": "P", "start": 0, "stop": 1, "count": 3, "scale": "cubic"},
            {"name": "P", "start": 0, "stop": 1, "count": 3, "scale": "log"},
            {"name": "P", "start": "x", "stop": 1, "count": 3},
            {"name": "P", "start": 0, "stop": 1, "count": 3, "step": 0.1},
            ["P", 0, 1, 3],
        ]
        for content in bad_axes:
            with self.assertRaises(ConfigError, msg=str(content)):
                Axis.from_dict(content)

    def test_radiative_tables_resolved_next_to_config(self):
        spec = load_config(testdata_path("radiative_sweep.json"))
        params = spec.model_params()
        self.assertIsInstance(params["q1"], RadiativeTable)
        self.assertEqual(params["q2"].name(), "q2")
        self.assertEqual(spec.create_model().variant(), "radiative")

    def test_bad_radiative_key(self):
        spec = ziegler_spec(radiative_table={"q3": "radiative_q1.txt"})
        with self.assertRaises(ConfigError):
            spec.model_params()


class TestEvaluate(unittest.TestCase):
    def test_ziegler_verdicts(self):
        result = evaluate(ziegler_spec())
        self.assertEqual(result.column_names(), ["P", "verdict", "abscissa", "H"])
        self.assertEqual(
            result.column("verdict"),
            [MARGINALLY_STABLE, MARGINALLY_STABLE, UNSTABLE, UNSTABLE, UNSTABLE],
        )
        self.assertEqual(result.provenance["version"], __version__)
        self.assertEqual(result.provenance["model"], "ziegler")

    def test_deterministic_across_threads(self):
        spec = load_config(testdata_path("maclaurin_sweep.json"))
        first = evaluate(spec, threads=1)
        second = evaluate(spec, threads=3)
        self.assertEqual(first.rows, second.rows)
        self.assertEqual(len(first.rows), 8)

    def test_krein_signs_column(self):
        result = evaluate(load_config(testdata_path("maclaurin_sweep.json")))
        self.assertIn("leading_im", result.column_names())
        signs = result.column("krein_signs")
        self.assertEqual(signs[0], (1, 1, 1, 1))
        self.assertIn(0, signs[-1])
        self.assertEqual(result.column("verdict")[-1], UNSTABLE)

    def test_radiative_sweep(self):
        result = evaluate(load_config(testdata_path("radiative_sweep.json")))
        self.assertEqual(len(result.rows), 3)
        self.assertNotIn("Error", result.column("verdict"))

    def test_failed_rows_kept(self):
        spec = ziegler_spec(axes=[{"name": "b", "start": -0.1, "stop": 0.1, "count": 3}])
        with self.assertLogs("dissipstab.sweep", level="WARNING"):
            result = evaluate(spec)
        self.assertEqual(result.column("verdict")[0], "Error")
        self.assertIsNone(result.column("abscissa")[0])
        self.assertNotEqual(result.column("verdict")[1], "Error")

    def test_guard(self):
        spec = load_config(testdata_path("guard_config.json"))
        self.assertEqual(spec.size(), 10**9)
        with self.assertRaises(SweepGuardExceeded):
            evaluate(spec)


class TestWriters(unittest.TestCase):
    def setUp(self):
        self.result = evaluate(ziegler_spec())

    def test_csv(self):
        stream = io.StringIO()
        write_result(self.result, "csv", stream=stream)
        text = stream.getvalue()
        self.assertTrue(text.startswith("P,verdict,abscissa,H\r\n"))
        rows = list(csv.reader(io.StringIO(text)))
        self.assertEqual(len(rows), 6)
        self.assertEqual(rows[1][0], "1.8999999999999999")
        self.assertEqual(float(rows[3][3]), self.result.rows[2][3])

    def test_json_round_trip(self):
        stream = io.StringIO()
        write_result(self.result, "json", stream=stream)
        content = json.loads(stream.getvalue())
        self.assertEqual(content["header"][2], {"name": "abscissa", "unit": "1/time"})
        self.assertEqual(len(content["rows"]), 5)
        self.assertEqual(content["provenance"]["version"], __version__)
        spec = SweepSpec.from_dict(content)
        self.assertEqual(spec, ziegler_spec())
        self.assertEqual(evaluate(spec).rows, self.result.rows)

    def test_unknown_format(self):
        with self.assertRaises(ConfigError):
            write_result(self.result, "xml", stream=io.StringIO())

    def test_format_cell(self):
        self.assertEqual(format_cell(None), "")
        self.assertEqual(format_cell(True), "true")
        self.assertEqual(format_cell(0.1), "0.10000000000000001")
        self.assertEqual(format_cell(3), "3")
        self.assertEqual(format_cell((1, -1, 0)), "1 -1 0")
        self.assertEqual(format_cell(1 - 2j), "1-2j")

    def test_saved_radiative_result_reruns_elsewhere(self):
        result = evaluate(load_config(testdata_path("radiative_sweep.json")))
        stream = io.StringIO()
        write_result(result, "json", stream=stream)
        tables = json.loads(stream.getvalue())["spec"]["radiative_table"]
        self.assertEqual(
            tables["q1"], os.path.abspath(testdata_path("radiative_q1.txt"))
        )
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "saved.json")
            with open(path, "w") as saved:
                saved.write(stream.getvalue())
            again = evaluate(load_config(path))
        self.assertEqual(again.rows, result.rows)
