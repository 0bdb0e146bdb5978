"""Black-box checks of the entb92 binary: exit codes, config files, manifests
and JSON schemas.

usage: cli_contract.py <path-to-entb92> <schema-dir>
"""

import hashlib
import json
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema
from referencing import Registry, Resource

BINARY = None
SCHEMAS = None


def run(*args, check_code=None):
    proc = subprocess.run([BINARY, *args], capture_output=True, text=True)
    if check_code is not None and proc.returncode != check_code:
        raise AssertionError(f"{args}: exit {proc.returncode}, expected {check_code}\n{proc.stderr}")
    return proc


def load_registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(schema)))
    return Registry().with_resources(resources)


class Contract(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.registry = load_registry()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = pathlib.Path(cls.tmp.name)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def validate(self, instance, schema_name):
        schema = json.loads((SCHEMAS / schema_name).read_text())
        jsonschema.Draft202012Validator(schema, registry=self.registry).validate(instance)

    def test_config_errors_exit_2(self):
        for args in (
            ["simulate", "--theta-deg", "0"],
            ["simulate", "--theta-deg", "90"],
            ["simulate", "--depol", "1.5"],
            ["simulate", "--eta-a", "-0.1"],
            ["simulate", "--attack", "pns"],
            ["simulate", "--test-fraction", "1"],
            ["simulate", "--no-such-flag"],
            ["rate-curve", "--p-max", "0.2"],
            ["curve", "--format", "xml"],
            [],
        ):
            with self.subTest(args=args):
                run(*args, check_code=2)

    def test_help_exits_0(self):
        run("--help", check_code=0)
        run("simulate", "--help", check_code=0)

    def test_insufficient_statistics_exit_3(self):
        proc = run("simulate", "--rounds", "1", check_code=3)
        result = json.loads(proc.stdout)
        self.validate(result, "session_result.schema.json")
        self.assertTrue(result["insufficient_statistics"])
        self.assertIsNone(result["s_ch"])

    def test_simulate_ideal(self):
        proc = run("simulate", "--theta-deg", "60", "--rounds", "1000000", "--seed", "42", "--workers", "4",
                   check_code=0)
        result = json.loads(proc.stdout)
        self.validate(result, "session_result.schema.json")
        s = result["s_ch"]
        self.assertLessEqual(abs(s["value"] - 0.125), 3 * s["standard_error"])
        self.assertEqual(result["counts"]["errors"], 0)
        self.assertFalse(result["aborted"])

    def test_simulate_attack_aborts(self):
        proc = run("simulate", "--attack", "usd", "--rounds", "100000", check_code=0)
        result = json.loads(proc.stdout)
        self.validate(result, "session_result.schema.json")
        self.assertTrue(result["aborted"])
        self.assertLess(result["s_ch"]["value"], 0)

    def test_reruns_are_byte_identical(self):
        for args in (["curve"], ["attack-demo", "--points", "20"], ["simulate", "--rounds", "50000", "--seed", "3"]):
            with self.subTest(args=args):
                self.assertEqual(run(*args, check_code=0).stdout, run(*args, check_code=0).stdout)

    def test_config_file_and_flag_precedence(self):
        cfg = self.dir / "config.json"
        cfg.write_text(json.dumps({"theta-deg": 50, "rounds": 20000, "seed": 7, "depol": 0.01}))
        result = json.loads(run("simulate", "--config", str(cfg), "--seed", "9", check_code=0).stdout)
        self.assertAlmostEqual(result["config"]["theta_deg"], 50)
        self.assertEqual(result["config"]["rounds"], 20000)
        self.assertEqual(result["config"]["seed"], 9)
        self.assertAlmostEqual(result["config"]["depol_p"], 0.01)

        bad = self.dir / "bad.json"
        bad.write_text(json.dumps({"theta": 50}))
        run("simulate", "--config", str(bad), check_code=2)
        bad.write_text("{not json")
        run("simulate", "--config", str(bad), check_code=2)
        run("simulate", "--config", str(self.dir / "missing.json"), check_code=2)

    def test_outputs_and_manifest(self):
        out = self.dir / "session.json"
        table = self.dir / "table.csv"
        run("simulate", "--rounds", "30000", "--seed", "5", "-o", str(out), "--table-csv", str(table), check_code=0)
        manifest = json.loads((self.dir / "session.json.manifest.json").read_text())
        self.validate(manifest, "manifest.schema.json")
        self.assertEqual(manifest["subcommand"], "simulate")
        self.assertEqual(manifest["seed"], 5)
        listed = {entry["path"]: entry for entry in manifest["outputs"]}
        for path in (out, table):
            data = path.read_bytes()
            self.assertEqual(listed[str(path)]["sha256"], hashlib.sha256(data).hexdigest())
            self.assertEqual(listed[str(path)]["bytes"], len(data))
        self.validate(json.loads(out.read_text()), "session_result.schema.json")
        self.assertEqual(len(table.read_text().splitlines()), 37)

    def test_thresholds_json(self):
        result = json.loads(run("thresholds", check_code=0).stdout)
        self.validate(result, "thresholds.schema.json")
        self.assertAlmostEqual(result["efficiency"]["symmetric"]["critical_value"], 0.75, delta=1e-3)
        self.assertAlmostEqual(result["efficiency"]["alice_perfect"]["critical_value"], 0.5, delta=1e-3)
        self.assertAlmostEqual(result["efficiency"]["bob_perfect"]["critical_value"], 2 / 3, delta=1e-3)

    def test_series_json(self):
        for args in (["curve", "--points", "30"], ["rate-curve", "--points", "5"], ["attack-demo", "--points", "30"]):
            with self.subTest(args=args):
                rows = json.loads(run(*args, "--format", "json", check_code=0).stdout)
                self.validate(rows, "series.schema.json")

    def test_attack_demo_columns(self):
        rows = json.loads(run("attack-demo", "--format", "json", check_code=0).stdout)
        self.assertEqual(len(rows), 89)
        for row in rows:
            self.assertLessEqual(row["s_ch_attacked"], 1e-12)
            self.assertNotAlmostEqual(row["s_ch_attacked"], row["s_ch_clean"], places=6)

    def test_curve_csv(self):
        lines = run("curve", check_code=0).stdout.splitlines()
        self.assertEqual(lines[0], "theta_deg,theta_rad,s_ch,s_ch_max,bob_angle_deg")
        row = next(line for line in lines if line.startswith("60,"))
        self.assertEqual(row.split(",")[2], "0.125")
        first, last = lines[1].split(","), lines[-1].split(",")
        self.assertLess(float(first[2]), 1e-4)
        self.assertLess(float(last[2]), 5e-3)


if __name__ == "__main__":
    BINARY = sys.argv.pop(1)
    SCHEMAS = pathlib.Path(sys.argv.pop(1))
    unittest.main(verbosity=2)
