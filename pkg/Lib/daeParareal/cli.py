"""
The ``daeparareal`` command line tool.

::

    daeparareal sequential --model analytic2x2 --dt-fine 1e-4 --output run/analytic
    daeparareal parareal --model rod --n-windows 40 --workers 4 --output run/rod
    daeparareal sweep --model analytic2x2 --sweep n_windows=4,8 --output run/sweep

Settings come from the defaults, then a ``key = value`` config
file (``--config``), then the flags. Model parameters are set
with ``model.<name> = value`` lines or ``--override name=value``.

Exit codes: 0 converged, 2 not converged, 1 error.
"""

import argparse
import configparser
import itertools
import logging
import math
import os
import sys
import numpy as np
import pandas as pd
from daeParareal.base import normalizers
from daeParareal.base.base import BaseDict
from daeParareal.base.errors import DaeParaError, ConfigurationError
from daeParareal.base.linalg import tolerances
from daeParareal.base.parareal import (
    WindowGrid, PararealConfig, run, sequentialSolve
)
from daeParareal.base.stepper import PropagatorConfig
from daeParareal.base.system import StateVector
from daeParareal.world import NewSystem, ModelNames

logger = logging.getLogger(__name__)

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2

FLOAT_FORMAT = "%.17g"

OVERRIDE_PREFIX = "model."


# -------------
# Value parsing
# -------------

def _parse(value, kind, name):
    if not isinstance(value, str):
        return value
    text = value.strip()
    try:
        return kind(text)
    except ValueError:
        raise ConfigurationError("%s must be %s, not %r."
                                 % (name, "an int" if kind is int else "a number", text))


def _optional(text):
    return text is None or (isinstance(text, str) and text.strip().lower() in ("", "none"))


def _count(name, minimum):
    def normalize(value):
        return normalizers.normalizeCount(_parse(value, int, name), name, minimum=minimum)
    return normalize


def _optionalCount(name, minimum):
    def normalize(value):
        if _optional(value):
            return None
        return normalizers.normalizeCount(_parse(value, int, name), name, minimum=minimum)
    return normalize


def _real(normalizer, name=None):
    def normalize(value):
        value = _parse(value, float, name or "Value")
        if name is None:
            return normalizer(value)
        return normalizer(value, name)
    return normalize


def _optionalReal(normalizer, name=None):
    plain = _real(normalizer, name)

    def normalize(value):
        if _optional(value):
            return None
        return plain(value)
    return normalize


def _text(value):
    if not isinstance(value, str):
        raise TypeError("Value must be a string, not %s." % type(value).__name__)
    return value.strip()


def _optionalText(value):
    if _optional(value):
        return None
    return _text(value)


def _modelName(value):
    return normalizers.normalizeModelName(_text(value), ModelNames())


# ----------
# Run config
# ----------

RUN_FIELDS = dict(
    model=("rod", _modelName),
    t_end=(None, _optionalReal(normalizers.normalizePositive, "End time")),
    n_windows=(40, _count("Number of windows", 1)),
    dt_fine=(1e-5, _real(normalizers.normalizeTimeStep)),
    dt_coarse=(1e-3, _real(normalizers.normalizeTimeStep)),
    tol=(1e-2, _real(normalizers.normalizeTolerance)),
    max_iter=(None, _optionalCount("Maximum iterations", 1)),
    norm_mode=("differential", normalizers.normalizeNormMode),
    update_mode=("projected_consistent", normalizers.normalizeUpdateMode),
    workers=(1, _count("Workers", 1)),
    pool=("thread", normalizers.normalizePoolMethod),
    seed=(0, _count("Seed", 0)),
    perturbation=(0.0, _real(normalizers.normalizeNonNegative, "Perturbation")),
    output=("daeparareal", _text),
    reference=(None, _optionalText),
    pivot_tolerance=(None, _optionalReal(normalizers.normalizeTolerance)),
    projector_tolerance=(None, _optionalReal(normalizers.normalizeTolerance)),
)


def normalizeRunKey(value):
    """
    Normalizes a run config key.

    * **value** must be a :ref:`type-string`.
    * Hyphens are read as underscores.
    * **value** must be a run setting or start with ``model.``.
    * Returned value will be a ``str``.
    """
    if not isinstance(value, str):
        raise TypeError("Run config key must be a string, not %s."
                        % type(value).__name__)
    value = value.strip()
    if value.startswith(OVERRIDE_PREFIX):
        return OVERRIDE_PREFIX + normalizers.normalizeOverrideKey(value[len(OVERRIDE_PREFIX):])
    value = value.replace("-", "_")
    if value not in RUN_FIELDS:
        raise ConfigurationError("Unknown setting %r. Known settings: %s."
                                 % (value, ", ".join(sorted(RUN_FIELDS))))
    return value


class ModelOverrides(BaseDict):

    """
    The model parameters given on top of the model defaults.
    """

    keyNormalizer = normalizers.normalizeOverrideKey
    valueNormalizer = normalizers.normalizeOverrideValue


class RunConfig(BaseDict):

    """
    The settings of a command line run.

        >>> config = RunConfig(dict(model="analytic2x2", n_windows=8))
        >>> config["dt_coarse"] = "1e-2"
        >>> config["model.tEnd"] = 2
        >>> config.overrides["tEnd"]
        2
    """

    keyNormalizer = normalizeRunKey

    copyAttributes = ("_data", "_overrides")

    def _init(self, other=None):
        self._data = {key: default for key, (default, normalizer) in RUN_FIELDS.items()}
        self._overrides = ModelOverrides()
        if other is not None:
            self.update(other)

    def _reprContents(self):
        return ["model='%s'" % self["model"], "N=%d" % self["n_windows"]]

    @property
    def overrides(self):
        return self._overrides

    def __setitem__(self, key, value):
        key = self._normalizeKey(key)
        if key.startswith(OVERRIDE_PREFIX):
            self._overrides[key[len(OVERRIDE_PREFIX):]] = value
            return
        default, normalizer = RUN_FIELDS[key]
        try:
            self._data[key] = normalizer(value)
        except (TypeError, ValueError) as error:
            if isinstance(error, ConfigurationError):
                raise
            raise ConfigurationError("Invalid %s: %s" % (key, error))

    def __getitem__(self, key):
        key = self._normalizeKey(key)
        if key.startswith(OVERRIDE_PREFIX):
            return self._overrides[key[len(OVERRIDE_PREFIX):]]
        return self._data[key]

    # -----
    # Files
    # -----

    def readFile(self, path):
        """
        Read the ``key = value`` lines of the file at **path**.
        ``#`` starts a comment.
        """
        parser = configparser.ConfigParser(inline_comment_prefixes="#", interpolation=None)
        parser.optionxform = str
        try:
            with open(path, "r") as f:
                parser.read_string("[run]\n" + f.read(), source=path)
        except OSError as error:
            raise ConfigurationError("Cannot read config file %r: %s" % (path, error))
        except configparser.Error as error:
            raise ConfigurationError("Malformed config file %r: %s" % (path, error))
        for key, value in parser.items("run"):
            self[key] = value

    # ----------
    # Validation
    # ----------

    def validate(self):
        if self["dt_coarse"] <= self["dt_fine"]:
            raise ConfigurationError("dt_coarse (%r) must be greater than dt_fine (%r)."
                                     % (self["dt_coarse"], self["dt_fine"]))

    # ------
    # Builds
    # ------

    def tolerances(self):
        """
        Return a context manager that applies ``pivot_tolerance`` and
        ``projector_tolerance`` for the duration of a run.
        """
        return tolerances(pivot=self["pivot_tolerance"],
                          projector=self["projector_tolerance"])

    def buildSystem(self):
        parameters = self._overrides.asDict()
        if self["t_end"] is not None:
            parameters["tEnd"] = self["t_end"]
        return NewSystem(self["model"], **parameters)

    def initialState(self, system):
        """
        Return the default initial state of **system** with uniform
        noise of magnitude ``perturbation`` on its algebraic
        components, drawn from ``seed``.
        """
        u0 = system.initialState()
        magnitude = self["perturbation"]
        if magnitude == 0:
            return u0
        rng = np.random.default_rng(self["seed"])
        noise = magnitude * rng.uniform(-1.0, 1.0, size=len(u0))
        return u0.withValues(u0.values + system.projectors.algebraic(noise))

    def fineConfig(self, dt=None):
        if dt is None:
            dt = self["dt_fine"]
        return PropagatorConfig(dt, label="fine")

    def grid(self, system):
        t0, tEnd = system.timeSpan
        return WindowGrid.uniform(t0, tEnd, self["n_windows"])

    def pararealConfig(self):
        return PararealConfig(
            nWindows=self["n_windows"],
            fine=self.fineConfig(),
            coarse=PropagatorConfig(self["dt_coarse"], label="coarse"),
            tolerance=self["tol"],
            maxIterations=self["max_iter"],
            normMode=self["norm_mode"],
            updateMode=self["update_mode"],
            workers=self["workers"],
            poolMethod=self["pool"]
        )


# -----
# Files
# -----

def _writeFrame(frame, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("Wrote %s.", path)


def trajectoryFrame(states):
    """
    Return a ``pandas.DataFrame`` with a ``time`` column and one
    ``u<i>`` column per state component.
    """
    values = np.array([state.values for state in states])
    frame = pd.DataFrame(values, columns=["u%d" % i for i in range(values.shape[1])])
    frame.insert(0, "time", [state.time for state in states])
    return frame


def writeTrajectory(states, path):
    _writeFrame(trajectoryFrame(states), path)


def writeSummary(summary, path):
    frame = pd.DataFrame(
        [(key, value) for key, value in summary.items()],
        columns=["key", "value"]
    )
    _writeFrame(frame, path)


def summaryPath(trajectoryPath):
    if trajectoryPath.endswith("-trajectory.csv"):
        return trajectoryPath[:-len("-trajectory.csv")] + "-summary.csv"
    return os.path.splitext(trajectoryPath)[0] + "-summary.csv"


def readReference(path, grid, dimension):
    """
    Read a trajectory file and return ``(states, seconds)``: the
    states at the boundaries of **grid** and the sequential
    wall-clock from the summary file next to it (``None`` when
    there is none).
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as error:
        raise ConfigurationError("Cannot read reference %r: %s" % (path, error))
    columns = ["u%d" % i for i in range(dimension)]
    missing = [column for column in ["time"] + columns if column not in frame.columns]
    if missing or len(frame.columns) != dimension + 1:
        raise ConfigurationError("Reference %r must hold the columns time, u0..u%d."
                                 % (path, dimension - 1))
    times = frame["time"].to_numpy(dtype=np.float64)
    values = frame[columns].to_numpy(dtype=np.float64)
    states = []
    for boundary in grid.boundaries:
        distance = np.abs(times - boundary)
        index = int(np.argmin(distance))
        if distance[index] > 1e-9 * max(1.0, abs(boundary)):
            raise ConfigurationError("Reference %r has no state at the window "
                                     "boundary %r." % (path, boundary))
        states.append(StateVector(values[index], boundary))
    seconds = None
    summary = summaryPath(path)
    if os.path.exists(summary):
        table = pd.read_csv(summary)
        rows = table[table["key"] == "sequential_seconds"]
        if len(rows):
            seconds = float(rows["value"].iloc[0])
    return states, seconds


# --------
# Commands
# --------

def cmdSequential(config, refine=0):
    """
    Run the sequential fine solve over the whole time span and
    write the boundary trajectory and a summary. With **refine**
    the solve is repeated with ``dt_fine / 2**r`` for
    ``r = 1..refine`` and the observed orders are written too.

    Returns ``(states, seconds)`` of the run at ``dt_fine``.
    """
    with config.tolerances():
        return _runSequential(config, refine)


def _runSequential(config, refine):
    system = config.buildSystem()
    u0 = config.initialState(system)
    grid = config.grid(system)
    states, seconds = sequentialSolve(system, u0, grid, config.fineConfig())
    output = config["output"]
    writeTrajectory(states, output + "-trajectory.csv")
    summary = dict(
        model=config["model"],
        n_windows=grid.nWindows,
        dt_fine=config["dt_fine"],
        t_end=grid.boundaries[-1],
        sequential_seconds=seconds,
    )
    if refine:
        refinement = refinementStudy(config, system, u0, grid, states, refine)
        _writeFrame(refinement, output + "-refinement.csv")
        orders = refinement["observed_order"].dropna()
        if len(orders):
            summary["observed_order"] = float(orders.iloc[-1])
    writeSummary(summary, output + "-summary.csv")
    print("sequential %s: %d windows, dt_fine=%g, %.3f s"
          % (config["model"], grid.nWindows, config["dt_fine"], seconds))
    return states, seconds


def refinementStudy(config, system, u0, grid, states, levels):
    """
    Return a ``pandas.DataFrame`` of the end state errors at
    ``dt_fine / 2**r`` and the observed orders between successive
    levels. With an exact solution the errors are measured against
    it for ``r = 0..levels``; otherwise the error of level ``r`` is
    its distance to level ``r + 1``.
    """
    levels = normalizers.normalizeCount(levels, "Refinement levels", minimum=1)
    dt = config["dt_fine"]
    ends = [states[-1]]
    steps = [dt]
    for level in range(1, levels + 1):
        steps.append(dt / 2 ** level)
        refined, seconds = sequentialSolve(system, u0, grid, config.fineConfig(steps[-1]))
        ends.append(refined[-1])
    if system.hasReferenceSolution:
        exact = system.referenceSolution(grid.boundaries[-1], u0).values
        scale = max(np.linalg.norm(exact), 1e-14)
        errors = [np.linalg.norm(end.values - exact) / scale for end in ends]
    else:
        scale = max(np.linalg.norm(ends[-1].values), 1e-14)
        errors = [
            np.linalg.norm(coarse.values - fine.values) / scale
            for coarse, fine in zip(ends[:-1], ends[1:])
        ]
    compared = len(errors)
    orders = [float("nan")]
    for previous, current in zip(errors[:-1], errors[1:]):
        if previous > 0 and current > 0:
            orders.append(math.log2(previous / current))
        else:
            orders.append(float("nan"))
    frame = pd.DataFrame(dict(dt_fine=steps[:compared], error=errors, observed_order=orders))
    return frame


def _solveParareal(config, reference=None, sequentialSeconds=None, computeReference=True):
    system = config.buildSystem()
    u0 = config.initialState(system)
    pconfig = config.pararealConfig()
    grid = pconfig.grid(system)
    if reference is None and computeReference:
        reference, sequentialSeconds = sequentialSolve(
            system, system.makeConsistent(u0), grid, pconfig.fine)
    state, report = run(system, u0, pconfig, reference=reference)
    report.sequentialSeconds = sequentialSeconds
    return state, report


def cmdParareal(config, computeReference=True):
    """
    Run Parareal and write the per iteration and window table, the
    boundary trajectory and a summary. The reference is read from
    ``config["reference"]`` or, with **computeReference**, solved
    sequentially first.

    Returns the :class:`RunReport`.
    """
    config.validate()
    with config.tolerances():
        return _runParareal(config, computeReference)


def _runParareal(config, computeReference):
    reference = None
    seconds = None
    if config["reference"] is not None:
        system = config.buildSystem()
        grid = config.pararealConfig().grid(system)
        reference, seconds = readReference(config["reference"], grid, system.dimension)
    state, report = _solveParareal(config, reference, seconds, computeReference)
    output = config["output"]
    _writeFrame(report.toDataFrame(), output + "-parareal.csv")
    writeTrajectory(state.uBounds, output + "-parareal-trajectory.csv")
    summary = dict(model=config["model"])
    summary.update(report.summary())
    writeSummary(summary, output + "-parareal-summary.csv")
    print("parareal %s: k=%d converged=%s modeled_speedup=%.4g actual_speedup=%.4g"
          % (config["model"], report.iterationsUsed, report.converged,
             report.modeledSpeedup, report.actualSpeedup))
    return report


def parseSweep(items):
    """
    Parse ``key=v1,v2,...`` items into an ordered list of
    ``(key, values)`` pairs.
    """
    sweep = []
    for item in items or []:
        if "=" not in item:
            raise ConfigurationError("Sweep item must be key=v1,v2,..., not %r." % item)
        key, values = item.split("=", 1)
        key = normalizeRunKey(key)
        values = [value.strip() for value in values.split(",") if value.strip()]
        if not values:
            raise ConfigurationError("Sweep item %r lists no values." % item)
        sweep.append((key, values))
    return sweep


SWEEP_COLUMNS = [
    "run", "iteration", "max_increment", "max_error_differential",
    "max_error_full", "exact_front", "iterations_used", "converged",
    "modeled_speedup", "error",
]


def cmdSweep(config, sweep):
    """
    Run Parareal for every combination of the **sweep** values and
    write one row per run and iteration. A failing run leaves one
    row holding its error and the sweep continues.

    Returns the ``pandas.DataFrame`` of the rows.
    """
    keys = [key for key, values in sweep]
    rows = []
    combinations = list(itertools.product(*[values for key, values in sweep]))
    nan = float("nan")
    for index, combination in enumerate(combinations):
        settings = dict(zip(keys, combination))
        base = dict(run=index)
        base.update(settings)
        try:
            runConfig = config.copy()
            runConfig.update(settings)
            runConfig.validate()
            with runConfig.tolerances():
                state, report = _solveParareal(runConfig)
        except (DaeParaError, TypeError, ValueError) as error:
            logger.warning("Sweep run %d (%s) failed: %s", index, settings, error)
            row = dict(base)
            row.update(iteration=nan, max_increment=nan, max_error_differential=nan,
                       max_error_full=nan, exact_front=nan, iterations_used=nan,
                       converged=False, modeled_speedup=nan, error=str(error))
            rows.append(row)
            continue
        for record in report.records:
            row = dict(base)
            row.update(
                iteration=record["iteration"],
                max_increment=record["maxIncrement"],
                max_error_differential=float(np.max(record["errorsDifferential"])),
                max_error_full=float(np.max(record["errorsFull"])),
                exact_front=report.exactFront(record["iteration"]),
                iterations_used=report.iterationsUsed,
                converged=report.converged,
                modeled_speedup=report.modeledSpeedup,
                error="",
            )
            rows.append(row)
        print("sweep run %d %s: k=%d converged=%s"
              % (index, settings, report.iterationsUsed, report.converged))
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS[:1] + keys + SWEEP_COLUMNS[1:])
    _writeFrame(frame, config["output"] + "-sweep.csv")
    return frame


# ------
# Parser
# ------

def _addRunArguments(parser):
    parser.add_argument("--config", help="key = value settings file")
    parser.add_argument("--model", help="one of: %s" % ", ".join(ModelNames()))
    parser.add_argument("--override", action="append", default=[], metavar="NAME=VALUE",
                        help="model parameter, may be repeated")
    parser.add_argument("--t-end", dest="t_end", help="end time in seconds")
    parser.add_argument("--n-windows", dest="n_windows", help="number of time windows")
    parser.add_argument("--dt-fine", dest="dt_fine", help="fine step in seconds")
    parser.add_argument("--dt-coarse", dest="dt_coarse", help="coarse step in seconds")
    parser.add_argument("--tol", help="relative increment tolerance")
    parser.add_argument("--max-iter", dest="max_iter", help="iteration limit")
    parser.add_argument("--norm-mode", dest="norm_mode", help="differential, full or mass")
    parser.add_argument("--update-mode", dest="update_mode", help="projected_consistent or plain")
    parser.add_argument("--workers", help="fine sweep workers")
    parser.add_argument("--pool", help="serial, thread or process")
    parser.add_argument("--seed", help="seed of the initial perturbation")
    parser.add_argument("--perturbation", help="noise on the algebraic initial values")
    parser.add_argument("--output", help="output path prefix")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for solver details")


class _ArgumentParser(argparse.ArgumentParser):

    """
    Reports usage errors as :class:`ConfigurationError` so they
    leave with the error exit code.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


def buildParser():
    parser = _ArgumentParser(
        prog="daeparareal",
        description="Parareal for index-1 differential algebraic systems."
    )
    commands = parser.add_subparsers(dest="command")
    commands.required = True
    sequential = commands.add_parser("sequential", help="sequential fine reference")
    _addRunArguments(sequential)
    sequential.add_argument("--refine", type=int, default=0,
                            help="also run dt_fine / 2**r for r = 1..REFINE")
    parareal = commands.add_parser("parareal", help="Parareal run")
    _addRunArguments(parareal)
    parareal.add_argument("--reference", help="trajectory file of a sequential run")
    parareal.add_argument("--skip-reference", action="store_true",
                          help="do not solve the sequential reference")
    sweep = commands.add_parser("sweep", help="Parareal runs over a parameter grid")
    _addRunArguments(sweep)
    sweep.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2",
                       help="setting and its values, may be repeated")
    return parser


RUN_FLAGS = (
    "model", "t_end", "n_windows", "dt_fine", "dt_coarse", "tol", "max_iter",
    "norm_mode", "update_mode", "workers", "pool", "seed", "perturbation",
    "output", "reference",
)


def configFromArguments(arguments):
    """
    Build the :class:`RunConfig` of parsed **arguments**.
    """
    config = RunConfig()
    if arguments.config:
        config.readFile(arguments.config)
    for key in RUN_FLAGS:
        value = getattr(arguments, key, None)
        if value is not None:
            config[key] = value
    for item in arguments.override:
        if "=" not in item:
            raise ConfigurationError("Override must be name=value, not %r." % item)
        name, value = item.split("=", 1)
        config.overrides[name] = value
    return config


def main(args=None):
    parser = buildParser()
    try:
        arguments = parser.parse_args(args)
    except ConfigurationError as error:
        print("error: %s" % error, file=sys.stderr)
        return EXIT_ERROR
    level = {0: logging.WARNING, 1: logging.INFO}.get(arguments.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = configFromArguments(arguments)
        if arguments.command == "sequential":
            cmdSequential(config, refine=arguments.refine)
            return EXIT_CONVERGED
        if arguments.command == "parareal":
            report = cmdParareal(config, computeReference=not arguments.skip_reference)
            return EXIT_CONVERGED if report.converged else EXIT_NOT_CONVERGED
        frame = cmdSweep(config, parseSweep(arguments.sweep))
        if len(frame) and frame["converged"].astype(bool).all():
            return EXIT_CONVERGED
        return EXIT_NOT_CONVERGED
    except (DaeParaError, TypeError, ValueError, OSError) as error:
        logger.error("%s", error)
        print("error: %s" % error, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
