import io
import json
import os
import tempfile
import unittest
from fractions import Fraction
from unittest.mock import MagicMock, patch

import rtctimes
from rtctimes import RtcTimesApp, build_parser
from test.helpers import data_file


class TestCommands(unittest.TestCase):
    """Test case for the rtctimes commands."""

    def setUp(self):
        """Set up an app writing to in-memory streams."""
        self.out = io.StringIO()
        self.err = io.StringIO()
        self.app = RtcTimesApp(out=self.out, err=self.err)
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def run_cmd(self, *argv):
        args = build_parser().parse_args(list(argv))
        return self.app.dispatch(args)

    def tmp_path(self, name):
        return os.path.join(self.tmp.name, name)

    # --- check ---

    def test_check_fp_schedulable(self):
        status = self.run_cmd("check", data_file("two_task_fp.json"))
        self.assertEqual(status, 0)
        self.assertIn("✅ Schedulable under FP (lehoczky points)", self.out.getvalue())
        self.assertIn("task 2: witness t=4, slack 0", self.out.getvalue())

    def test_check_fp_unschedulable(self):
        status = self.run_cmd("check", data_file("two_task_fp_overloaded.json"), "--points", "reduced")
        self.assertEqual(status, 1)
        self.assertIn("❌ Unschedulable under FP: task 2 fails", self.out.getvalue())

    def test_check_edf_policy_is_case_insensitive(self):
        status = self.run_cmd("check", data_file("two_task_edf.json"), "--policy", "EDF")
        self.assertEqual(status, 0)
        self.assertIn("✅ Schedulable under EDF", self.out.getvalue())
        self.assertIn("11 instants checked", self.out.getvalue())

    def test_check_arbitrary_deadlines(self):
        self.assertEqual(self.run_cmd("check", data_file("three_task_arbitrary.json")), 0)

    def test_check_input_errors(self):
        self.assertEqual(self.run_cmd("check", self.tmp_path("missing.json")), 2)
        self.assertIn("❌", self.err.getvalue())

        invalid = self.tmp_path("invalid.json")
        with open(invalid, "w") as f:
            json.dump({"tasks": [{"T": 4, "D": 6, "C": 1}]}, f)
        self.assertEqual(self.run_cmd("check", invalid), 2)

        # forcing the constrained model on D > T fails validation
        self.assertEqual(self.run_cmd("check", data_file("three_task_arbitrary.json"), "--deadline-model", "constrained"), 2)

    def test_unknown_policy_is_a_usage_error(self):
        with self.assertRaises(SystemExit) as raised:
            build_parser().parse_args(["check", data_file("two_task_fp.json"), "--policy", "rm"])
        self.assertEqual(raised.exception.code, 2)

    # --- points ---

    def test_points_reports_both_sets(self):
        self.assertEqual(self.run_cmd("points", data_file("three_task_points.json")), 0)
        text = self.out.getvalue()
        self.assertIn("task 3: |S| = 10  0 3 6 8 9 12 15 16 18 19", text)
        self.assertIn("task 3: |P| = 4  15 16 18 19", text)

    def test_points_skips_reduced_set_without_dm_order(self):
        path = self.tmp_path("rm.json")
        with open(path, "w") as f:
            json.dump({"tasks": [{"T": 4, "D": 4}, {"T": 10, "D": 2}]}, f)
        self.assertEqual(self.run_cmd("points", path), 0)
        self.assertIn("Reduced points skipped", self.out.getvalue())

    # --- region ---

    def test_region_fp_to_stdout(self):
        self.assertEqual(self.run_cmd("region", data_file("two_task_fp.json")), 0)
        lines = self.out.getvalue().splitlines()
        self.assertEqual(lines[0], "label,c1,c2,bound")
        self.assertEqual(lines[1:4], ["task1@t=3,1,0,3", "task2@t=4,1,1,4", "task2@t=5,2,1,5"])
        self.assertEqual(lines[-1], "✅ FP region: 3 rows in 2 groups")

    def test_region_edf_minimal_to_file_with_svg(self):
        csv_path = self.tmp_path("rows.csv")
        svg_path = self.tmp_path("region.svg")
        status = self.run_cmd("region", data_file("two_task_edf.json"), "--policy", "edf", "--minimal",
                              "--out", csv_path, "--svg", svg_path)
        self.assertEqual(status, 0)
        with open(csv_path) as f:
            self.assertEqual(f.read().splitlines(), ["label,c1,c2,bound", "t=3,1/3,0,1", "t=15,4/15,1/5,1"])
        with open(svg_path) as f:
            self.assertIn("<svg", f.read())
        self.assertIn("✅ EDF region: 2 rows", self.out.getvalue())

    def test_region_svg_needs_two_tasks(self):
        status = self.run_cmd("region", data_file("three_task_arbitrary.json"), "--policy", "edf", "--minimal",
                              "--svg", self.tmp_path("three.svg"))
        self.assertEqual(status, 2)
        self.assertIn("two-task region", self.err.getvalue())

    # --- minimize ---

    def test_minimize_prints_instants_first(self):
        csv_path = self.tmp_path("dmin.csv")
        self.assertEqual(self.run_cmd("minimize", data_file("three_task_arbitrary.json"), "--out", csv_path), 0)
        lines = self.out.getvalue().splitlines()
        self.assertEqual(lines[0], "0 6 13 20 55")
        self.assertIn("|D| = 50, |D_min| = 5", lines[1])
        with open(csv_path) as f:
            self.assertEqual(len(f.read().splitlines()), 6)

    # --- optimize ---

    def test_optimize_edf(self):
        status = self.run_cmd("optimize", data_file("two_task_edf.json"), "--policy", "edf", "-w", "0,1")
        self.assertEqual(status, 0)
        self.assertIn("✅ Optimum 5 at C = (0, 5)", self.out.getvalue())
        self.assertIn("binding rows: t=15", self.out.getvalue())

    def test_optimize_edf_full_rows_agree(self):
        self.run_cmd("optimize", data_file("two_task_edf.json"), "--policy", "edf", "-w", "1,1", "--full-rows")
        self.assertIn("✅ Optimum 5", self.out.getvalue())

    def test_optimize_fp(self):
        status = self.run_cmd("optimize", data_file("two_task_fp.json"), "--weights", "1,0")
        self.assertEqual(status, 0)
        text = self.out.getvalue()
        self.assertIn("✅ Optimum 3 at C = (3, 0)", text)
        self.assertIn("selection: task1@t=3, task2@t=4", text)
        self.assertIn("1 selections solved, 1 pruned", text)

    def test_optimize_rejects_bad_weights(self):
        self.assertEqual(self.run_cmd("optimize", data_file("two_task_fp.json"), "-w", "1"), 2)
        self.assertEqual(self.run_cmd("optimize", data_file("two_task_fp.json"), "-w", "a,b"), 2)

    # --- simulate ---

    def test_simulate_without_miss(self):
        trace_path = self.tmp_path("trace.csv")
        status = self.run_cmd("simulate", data_file("two_task_fp.json"), "--out", trace_path)
        self.assertEqual(status, 0)
        self.assertIn("✅ No deadline miss in [0, 100] under FP", self.out.getvalue())
        with open(trace_path) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[:3], ["start,end,task,job", "0,1,1,0", "1,4,2,0"])

    def test_simulate_with_miss(self):
        status = self.run_cmd("simulate", data_file("two_task_fp_overloaded.json"), "--horizon", "10")
        self.assertEqual(status, 1)
        self.assertIn("❌ Task 2 job 0 misses its deadline 5, completed at 7", self.out.getvalue())

    def test_simulate_respects_horizon_cap(self):
        self.app = RtcTimesApp(horizon_cap=Fraction(50), out=self.out, err=self.err)
        self.assertEqual(self.run_cmd("simulate", data_file("two_task_fp.json")), 2)
        self.assertIn("exceeds the configured cap", self.err.getvalue())

    # --- experiment ---

    def test_experiment_writes_all_outputs(self):
        paths = {name: self.tmp_path(name) for name in ("records.csv", "envelope.csv", "density.csv", "scatter.svg")}
        status = self.run_cmd("experiment", "--samples", "20", "--seed", "4", "--period-hi", "20",
                              "--out", paths["records.csv"], "--envelope-out", paths["envelope.csv"],
                              "--density-out", paths["density.csv"], "--svg", paths["scatter.svg"])
        self.assertEqual(status, 0)
        with open(paths["records.csv"]) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "id,periods,deadlines,H,D_count,Dmin_count")
        self.assertEqual(len(lines), 21)
        with open(paths["density.csv"]) as f:
            self.assertTrue(f.readline().startswith("Dmin_count,instances,fraction"))
        self.assertTrue(os.path.getsize(paths["envelope.csv"]) > 0)
        self.assertTrue(os.path.getsize(paths["scatter.svg"]) > 0)
        self.assertIn("✅ 20 instances (seed 4", self.out.getvalue())

    def test_experiment_reports_envelope_without_path(self):
        records = self.tmp_path("records.csv")
        status = self.run_cmd("experiment", "--samples", "10", "--seed", "2", "--period-hi", "12", "--out", records)
        self.assertEqual(status, 0)
        lines = self.out.getvalue().splitlines()
        self.assertEqual(lines[0], "bucket,H_lo,H_hi,instances,envelope,envelope_prefix_max,D_count_at_envelope")
        self.assertGreater(len(lines), 2)
        self.assertTrue(lines[-3].startswith("✅ 10 instances"))

    def test_experiment_rejects_bad_config(self):
        self.assertEqual(self.run_cmd("experiment", "--period-lo", "1"), 2)


class TestMain(unittest.TestCase):
    """Environment handling in main()."""

    @patch("rtctimes.load_dotenv")
    @patch("rtctimes.configure_logging")
    @patch("rtctimes.RtcTimesApp")
    def test_main_reads_environment(self, mock_app, mock_logging, mock_dotenv):
        mock_app.return_value = MagicMock(dispatch=MagicMock(return_value=0))
        env = {"RTCTIMES_HORIZON_CAP": "5/2", "RTCTIMES_WORKERS": "3", "RTCTIMES_SELECTION_LIMIT": "4",
               "RTCTIMES_LOG_LEVEL": "info"}
        with patch.dict(os.environ, env):
            status = rtctimes.main(["check", data_file("two_task_fp.json")])
        self.assertEqual(status, 0)
        mock_dotenv.assert_called_once()
        mock_logging.assert_called_once_with("INFO", None)
        mock_app.assert_called_once_with(horizon_cap=Fraction(5, 2), workers=3, selection_limit=4)

    @patch("rtctimes.load_dotenv")
    @patch("rtctimes.configure_logging")
    def test_main_rejects_bad_environment(self, mock_logging, mock_dotenv):
        with patch.dict(os.environ, {"RTCTIMES_WORKERS": "many"}):
            self.assertEqual(rtctimes.main(["check", data_file("two_task_fp.json")]), 2)

    @patch("rtctimes.load_dotenv")
    @patch("rtctimes.configure_logging")
    def test_main_rejects_unknown_log_level(self, mock_logging, mock_dotenv):
        with patch.dict(os.environ, {"RTCTIMES_LOG_LEVEL": "loud"}):
            self.assertEqual(rtctimes.main(["check", data_file("two_task_fp.json")]), 2)
        mock_logging.assert_not_called()

    @patch("rtctimes.load_dotenv")
    @patch("rtctimes.configure_logging")
    def test_main_debug_flag(self, mock_logging, mock_dotenv):
        with patch("sys.stdout", new_callable=io.StringIO):
            status = rtctimes.main(["--debug", "check", data_file("two_task_fp.json")])
        self.assertEqual(status, 0)
        self.assertEqual(mock_logging.call_args[0][0], "DEBUG")


if __name__ == "__main__":
    unittest.main()
