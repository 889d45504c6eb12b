import contextlib
import io
import math
import os
import shutil
import tempfile
import unittest
from unittest import mock
import numpy as np
import pandas as pd
from daeParareal import cli
from daeParareal.base import linalg
from daeParareal.base.errors import ConfigurationError
from daeParareal.base.parareal import REPORT_COLUMNS
from daeParareal.cli import RunConfig, main, parseSweep


def _summary(path):
    table = pd.read_csv(path)
    return dict(zip(table["key"], table["value"]))


class TestRunConfig(unittest.TestCase):

    def setUp(self):
        self.tempDir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tempDir)

    def test_defaults(self):
        config = RunConfig()
        self.assertEqual(config["model"], "rod")
        self.assertEqual(config["n_windows"], 40)
        self.assertEqual(config["dt_fine"], 1e-5)
        self.assertEqual(config["dt_coarse"], 1e-3)
        self.assertEqual(config["tol"], 1e-2)
        self.assertIsNone(config["max_iter"])
        self.assertEqual(config["update_mode"], "projected_consistent")
        self.assertEqual(config.overrides.asDict(), {})

    def test_parseStrings(self):
        config = RunConfig()
        config["n-windows"] = "8"
        config["dt_coarse"] = " 2e-3 "
        config["max_iter"] = "none"
        config["norm_mode"] = "Full"
        self.assertEqual(config["n_windows"], 8)
        self.assertEqual(config["dt_coarse"], 2e-3)
        self.assertIsNone(config["max_iter"])
        self.assertEqual(config["norm_mode"], "full")

    def test_overrides(self):
        config = RunConfig(dict(model="rod"))
        config["model.nCells"] = "31"
        config["model.nonlinear"] = "true"
        self.assertEqual(config.overrides["nCells"], 31)
        self.assertIs(config["model.nonlinear"], True)
        config["t_end"] = 0.02
        system = config.buildSystem()
        self.assertEqual(system.dimension, 30)
        self.assertEqual(system.name, "rod_nonlinear")
        self.assertEqual(system.timeSpan, (0.0, 0.02))

    def test_invalid(self):
        config = RunConfig()
        with self.assertRaises(ConfigurationError):
            config["windows"] = 8
        with self.assertRaises(ConfigurationError):
            config["n_windows"] = "eight"
        with self.assertRaises(ConfigurationError):
            config["n_windows"] = 0
        with self.assertRaises(ConfigurationError):
            config["model"] = "pendulum"
        with self.assertRaises(ConfigurationError):
            config["pool"] = "cluster"

    def test_validate(self):
        config = RunConfig(dict(dt_fine=1e-3, dt_coarse=1e-3))
        with self.assertRaises(ConfigurationError):
            config.validate()
        config["dt_coarse"] = 1e-2
        config.validate()

    def test_readFile(self):
        path = os.path.join(self.tempDir, "run.cfg")
        with open(path, "w") as f:
            f.write("model = analytic2x2  # the small system\n")
            f.write("n_windows = 8\n")
            f.write("dt-fine = 1e-3\n")
            f.write("model.tEnd = 0.5\n")
        config = RunConfig()
        config.readFile(path)
        self.assertEqual(config["model"], "analytic2x2")
        self.assertEqual(config["n_windows"], 8)
        self.assertEqual(config["dt_fine"], 1e-3)
        self.assertEqual(config.buildSystem().timeSpan, (0.0, 0.5))

    def test_readFile_missing(self):
        with self.assertRaises(ConfigurationError):
            RunConfig().readFile(os.path.join(self.tempDir, "missing.cfg"))

    def test_readFile_unknownKey(self):
        path = os.path.join(self.tempDir, "run.cfg")
        with open(path, "w") as f:
            f.write("windows = 8\n")
        with self.assertRaises(ConfigurationError):
            RunConfig().readFile(path)

    def test_copy(self):
        config = RunConfig(dict(model="rod"))
        config["model.nCells"] = 21
        copied = config.copy()
        copied["n_windows"] = 4
        copied["model.nCells"] = 41
        self.assertEqual(config["n_windows"], 40)
        self.assertEqual(config["model.nCells"], 21)

    def test_initialState_perturbation(self):
        config = RunConfig(dict(model="rod", perturbation=1.0, seed=3))
        config["model.nCells"] = 21
        system = config.buildSystem()
        u0 = config.initialState(system)
        mask = system.projectors.mask
        self.assertEqual(np.abs(u0.values[mask]).max(), 0.0)
        self.assertGreater(np.abs(u0.values[~mask]).max(), 0.0)
        self.assertEqual(config.initialState(system), u0)

    def test_parseSweep(self):
        sweep = parseSweep(["n_windows=4, 8", "dt-coarse=1e-2"])
        self.assertEqual(sweep, [("n_windows", ["4", "8"]), ("dt_coarse", ["1e-2"])])
        with self.assertRaises(ConfigurationError):
            parseSweep(["n_windows"])
        with self.assertRaises(ConfigurationError):
            parseSweep(["n_windows="])
        self.assertEqual(parseSweep([]), [])


class TestCommands(unittest.TestCase):

    def setUp(self):
        self.tempDir = tempfile.mkdtemp()
        self.prefix = os.path.join(self.tempDir, "out", "run")

    def tearDown(self):
        shutil.rmtree(self.tempDir)

    def main(self, *args):
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            return main(list(args) + ["--output", self.prefix])

    # ----------
    # Sequential
    # ----------

    def test_sequential(self):
        code = self.main(
            "sequential", "--model", "analytic2x2", "--t-end", "1",
            "--dt-fine", "1e-4", "--n-windows", "10"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        trajectory = pd.read_csv(self.prefix + "-trajectory.csv")
        self.assertEqual(list(trajectory.columns), ["time", "u0", "u1"])
        self.assertEqual(len(trajectory), 11)
        self.assertEqual(trajectory["time"].iloc[-1], 1.0)
        expected = math.exp(-1.5)
        self.assertLessEqual(abs(trajectory["u0"].iloc[-1] - expected) / expected, 2e-4)
        self.assertAlmostEqual(trajectory["u1"].iloc[-1], trajectory["u0"].iloc[-1] / 2, places=12)
        summary = _summary(self.prefix + "-summary.csv")
        self.assertGreater(float(summary["sequential_seconds"]), 0.0)

    def test_sequential_refine(self):
        code = self.main(
            "sequential", "--model", "analytic2x2", "--dt-fine", "1e-3",
            "--n-windows", "4", "--refine", "3"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        refinement = pd.read_csv(self.prefix + "-refinement.csv")
        self.assertEqual(len(refinement), 4)
        self.assertTrue(math.isnan(refinement["observed_order"].iloc[0]))
        for order in refinement["observed_order"].iloc[1:]:
            self.assertAlmostEqual(order, 1.0, delta=0.1)
        summary = _summary(self.prefix + "-summary.csv")
        self.assertAlmostEqual(float(summary["observed_order"]), 1.0, delta=0.1)

    def test_sequential_refineWithoutExactSolution(self):
        code = self.main(
            "sequential", "--model", "rod", "--override", "nCells=21", "--t-end", "0.02",
            "--dt-fine", "2e-5", "--n-windows", "4", "--refine", "2"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        refinement = pd.read_csv(self.prefix + "-refinement.csv")
        self.assertEqual(len(refinement), 2)
        self.assertAlmostEqual(refinement["observed_order"].iloc[1], 1.0, delta=0.3)

    # --------
    # Parareal
    # --------

    def test_parareal(self):
        code = self.main(
            "parareal", "--model", "analytic2x2", "--n-windows", "8",
            "--dt-fine", "1e-3", "--dt-coarse", "1e-2"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        table = pd.read_csv(self.prefix + "-parareal.csv")
        self.assertEqual(list(table.columns), REPORT_COLUMNS)
        self.assertEqual(table["window_index"].max(), 8)
        self.assertTrue(table[table["iteration"] == 0]["increment_norm"].isna().all())
        self.assertFalse(table["error_vs_reference_differential"].isna().any())
        trajectory = pd.read_csv(self.prefix + "-parareal-trajectory.csv")
        self.assertEqual(len(trajectory), 9)
        summary = _summary(self.prefix + "-parareal-summary.csv")
        self.assertEqual(summary["converged"], "True")
        self.assertEqual(int(summary["n_windows"]), 8)
        self.assertFalse(math.isnan(float(summary["actual_speedup"])))

    def test_parareal_notConverged(self):
        code = self.main(
            "parareal", "--model", "analytic2x2", "--n-windows", "8",
            "--dt-fine", "1e-3", "--dt-coarse", "1e-1", "--tol", "1e-14", "--max-iter", "2"
        )
        self.assertEqual(code, cli.EXIT_NOT_CONVERGED)

    def test_parareal_skipReference(self):
        code = self.main(
            "parareal", "--model", "analytic2x2", "--n-windows", "4",
            "--dt-fine", "1e-3", "--dt-coarse", "1e-2", "--skip-reference"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        table = pd.read_csv(self.prefix + "-parareal.csv")
        self.assertTrue(table["error_vs_reference_differential"].isna().all())

    def test_parareal_referenceFile(self):
        settings = ["--model", "analytic2x2", "--n-windows", "4", "--dt-fine", "1e-3"]
        self.assertEqual(self.main("sequential", *settings), cli.EXIT_CONVERGED)
        reference = self.prefix + "-trajectory.csv"
        code = self.main("parareal", "--dt-coarse", "1e-2", "--tol", "1e-300",
                         "--reference", reference, *settings)
        self.assertEqual(code, cli.EXIT_CONVERGED)
        table = pd.read_csv(self.prefix + "-parareal.csv")
        last = table[table["iteration"] == table["iteration"].max()]
        self.assertLessEqual(last["error_vs_reference_differential"].max(), 1e-10)
        summary = _summary(self.prefix + "-parareal-summary.csv")
        self.assertFalse(math.isnan(float(summary["actual_speedup"])))

    def test_parareal_referenceMismatch(self):
        self.assertEqual(
            self.main("sequential", "--model", "analytic2x2", "--n-windows", "3", "--dt-fine", "1e-3"),
            cli.EXIT_CONVERGED
        )
        code = self.main(
            "parareal", "--model", "analytic2x2", "--n-windows", "4", "--dt-fine", "1e-3",
            "--dt-coarse", "1e-2", "--reference", self.prefix + "-trajectory.csv"
        )
        self.assertEqual(code, cli.EXIT_ERROR)

    def test_parareal_perturbed(self):
        code = self.main(
            "parareal", "--model", "rod", "--override", "nCells=21", "--t-end", "0.02",
            "--n-windows", "4", "--dt-fine", "1e-4", "--dt-coarse", "1e-3",
            "--perturbation", "1", "--seed", "7"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        summary = _summary(self.prefix + "-parareal-summary.csv")
        self.assertEqual(summary["made_consistent"], "True")

    # -----
    # Sweep
    # -----

    def test_sweep(self):
        code = self.main(
            "sweep", "--model", "analytic2x2", "--dt-fine", "1e-3", "--dt-coarse", "1e-2",
            "--sweep", "n_windows=4,8"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        table = pd.read_csv(self.prefix + "-sweep.csv")
        self.assertEqual(list(table.columns)[:2], ["run", "n_windows"])
        self.assertEqual(sorted(table["run"].unique()), [0, 1])
        self.assertEqual(sorted(table["n_windows"].unique()), [4, 8])
        self.assertTrue(table["converged"].all())

    def test_sweep_empty(self):
        code = self.main(
            "sweep", "--model", "analytic2x2", "--n-windows", "4",
            "--dt-fine", "1e-3", "--dt-coarse", "1e-2"
        )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        table = pd.read_csv(self.prefix + "-sweep.csv")
        self.assertEqual(list(table["run"].unique()), [0])

    def test_sweep_failingRun(self):
        code = self.main(
            "sweep", "--model", "analytic2x2", "--n-windows", "4", "--dt-fine", "1e-3",
            "--sweep", "dt_coarse=1e-4,1e-2"
        )
        self.assertEqual(code, cli.EXIT_NOT_CONVERGED)
        table = pd.read_csv(self.prefix + "-sweep.csv")
        failed = table[table["run"] == 0]
        self.assertEqual(len(failed), 1)
        self.assertIn("dt_coarse", failed["error"].iloc[0])
        self.assertGreater(len(table[table["run"] == 1]), 1)

    # ------
    # Errors
    # ------

    def test_errors(self):
        self.assertEqual(
            self.main("parareal", "--model", "analytic2x2", "--dt-fine", "1e-2", "--dt-coarse", "1e-3"),
            cli.EXIT_ERROR
        )
        self.assertEqual(self.main("parareal", "--model", "pendulum"), cli.EXIT_ERROR)
        self.assertEqual(
            self.main("sequential", "--model", "analytic2x2", "--override", "nCells"),
            cli.EXIT_ERROR
        )
        self.assertEqual(
            self.main("sequential", "--model", "analytic2x2", "--override", "nCells=3"),
            cli.EXIT_ERROR
        )

    def test_usageErrors(self):
        self.assertEqual(self.main("parareal", "--bogus-flag"), cli.EXIT_ERROR)
        self.assertEqual(self.main("sequential", "--refine", "two"), cli.EXIT_ERROR)
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            self.assertEqual(main([]), cli.EXIT_ERROR)
            self.assertEqual(main(["simulate"]), cli.EXIT_ERROR)

    # ----------
    # Tolerances
    # ----------

    def test_sweep_tolerances(self):
        saved = dict(linalg.TOLERANCES)
        used = []
        solve = cli._solveParareal

        def recordingSolve(config, *args, **kwargs):
            used.append((linalg.TOLERANCES["pivot"], linalg.TOLERANCES["projector"]))
            return solve(config, *args, **kwargs)

        with mock.patch.object(cli, "_solveParareal", recordingSolve):
            code = self.main(
                "sweep", "--model", "analytic2x2", "--n-windows", "4",
                "--dt-fine", "1e-3", "--dt-coarse", "1e-2",
                "--sweep", "pivot_tolerance=1e-13,1e-12"
            )
        self.assertEqual(code, cli.EXIT_CONVERGED)
        self.assertEqual(used, [(1e-13, saved["projector"]), (1e-12, saved["projector"])])
        self.assertEqual(linalg.TOLERANCES, saved)

    def test_parareal_tolerancesRestored(self):
        saved = dict(linalg.TOLERANCES)
        config = RunConfig(dict(
            model="analytic2x2", n_windows=2, dt_fine=1e-2, dt_coarse=1e-1,
            pivot_tolerance=1e-13, projector_tolerance=1e-11, output=self.prefix
        ))
        with contextlib.redirect_stdout(io.StringIO()):
            report = cli.cmdParareal(config, computeReference=False)
            cli.cmdSequential(config)
        self.assertTrue(report.converged)
        self.assertEqual(linalg.TOLERANCES, saved)
