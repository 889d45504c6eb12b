import logging
import math
import time
import numpy as np
import pandas as pd
from daeParareal.base import normalizers
from daeParareal.base.base import BaseObject, dynamicProperty
from daeParareal.base.errors import DaeParaError, PropagationError
from daeParareal.base.stepper import PropagatorConfig, ImplicitEulerPropagator
from daeParareal.base.system import StateVector
from daeParareal.base.workers import WorkerPool

logger = logging.getLogger(__name__)

# floor of the denominators of relative norms
NORM_FLOOR = 1e-14

# a window agreeing with the reference to this level is exact
EXACTNESS_TOLERANCE = 1e-10

REPORT_COLUMNS = [
    "iteration",
    "window_index",
    "T_j",
    "increment_norm",
    "error_vs_reference_differential",
    "error_vs_reference_full",
    "coarse_seconds",
    "fine_seconds",
]


# ----
# Grid
# ----

class WindowGrid(BaseObject):

    """
    The window boundaries ``T0 < T1 < ... < TN``.

        >>> grid = WindowGrid.uniform(0.0, 0.2, 40)
        >>> grid.nWindows
        40
        >>> grid.window(1)
        (0.0, 0.005)
    """

    copyAttributes = ("_boundaries",)

    def _init(self, boundaries):
        self._boundaries = normalizers.normalizeBoundaries(boundaries)

    def _reprContents(self):
        return [
            "N=%d" % self.nWindows,
            "[%r, %r]" % (self.boundaries[0], self.boundaries[-1])
        ]

    @classmethod
    def uniform(cls, t0, tEnd, nWindows):
        """
        Return a grid of **nWindows** windows of equal length.
        The last boundary is exactly **tEnd**.
        """
        t0, tEnd = normalizers.normalizeTimeSpan((t0, tEnd))
        nWindows = normalizers.normalizeCount(nWindows, "Number of windows", minimum=1)
        boundaries = [t0 + (tEnd - t0) * j / nWindows for j in range(nWindows)]
        boundaries.append(tEnd)
        return cls(boundaries)

    boundaries = dynamicProperty("boundaries", "The ``tuple`` of window boundaries.")

    def _get_boundaries(self):
        return self._boundaries

    nWindows = dynamicProperty("nWindows", "The number of windows ``N``.")

    def _get_nWindows(self):
        return len(self._boundaries) - 1

    def window(self, j):
        """
        Return ``(T_{j-1}, T_j)`` for window **j** in ``1..N``.
        """
        j = normalizers.normalizeCount(j, "Window index", minimum=1)
        if j > self.nWindows:
            raise IndexError("Window index %d is out of range 1..%d."
                             % (j, self.nWindows))
        return self._boundaries[j - 1], self._boundaries[j]

    def matches(self, t0, tEnd, tolerance=1e-12):
        scale = tolerance * max(1.0, abs(t0), abs(tEnd))
        return (abs(self._boundaries[0] - t0) <= scale
                and abs(self._boundaries[-1] - tEnd) <= scale)


# ------
# Config
# ------

class PararealConfig(BaseObject):

    """
    The settings of a Parareal run.

        >>> config = PararealConfig(
        ...     nWindows=40,
        ...     fine=PropagatorConfig(1e-5, label="fine"),
        ...     coarse=PropagatorConfig(1e-3, label="coarse"),
        ...     tolerance=1e-2
        ... )

    **tolerance** bounds the relative increment of the boundary
    values between two iterations. **maxIterations** defaults to
    ``max(nWindows, 2)``. **normMode** is ``"differential"``,
    ``"full"`` or ``"mass"``; **updateMode** is
    ``"projected_consistent"`` or ``"plain"``. **boundaries**
    replaces the uniform windows by explicit ones. **workers**
    and **poolMethod** configure the fine sweep pool.

    The coarse step must not be smaller than the fine step.
    """

    copyAttributes = (
        "_nWindows", "_fine", "_coarse", "_tolerance", "_maxIterations",
        "_normMode", "_updateMode", "_boundaries", "_workers", "_poolMethod"
    )

    def _init(self, nWindows, fine, coarse, tolerance=1e-2, maxIterations=None,
              normMode="differential", updateMode="projected_consistent",
              boundaries=None, workers=1, poolMethod="thread"):
        self._nWindows = normalizers.normalizeCount(nWindows, "Number of windows", minimum=1)
        for name, value in (("Fine", fine), ("Coarse", coarse)):
            if not isinstance(value, PropagatorConfig):
                raise TypeError("%s config must be a PropagatorConfig, not %s."
                                % (name, type(value).__name__))
        if coarse.dt < fine.dt:
            raise ValueError("Coarse step (%r) must not be smaller than the "
                             "fine step (%r)." % (coarse.dt, fine.dt))
        self._fine = fine
        self._coarse = coarse
        self._tolerance = normalizers.normalizeTolerance(tolerance)
        if maxIterations is None:
            maxIterations = max(self._nWindows, 2)
        self._maxIterations = normalizers.normalizeCount(maxIterations, "Maximum iterations", minimum=1)
        self._normMode = normalizers.normalizeNormMode(normMode)
        self._updateMode = normalizers.normalizeUpdateMode(updateMode)
        if boundaries is not None:
            boundaries = normalizers.normalizeBoundaries(boundaries)
            if len(boundaries) - 1 != self._nWindows:
                raise ValueError("Boundaries define %d windows, not %d."
                                 % (len(boundaries) - 1, self._nWindows))
        self._boundaries = boundaries
        self._workers = normalizers.normalizeCount(workers, "Workers", minimum=1)
        self._poolMethod = normalizers.normalizePoolMethod(poolMethod)

    def _reprContents(self):
        return [
            "N=%d" % self.nWindows,
            "fine=%r" % self.fine.dt,
            "coarse=%r" % self.coarse.dt,
            "tol=%r" % self.tolerance
        ]

    nWindows = dynamicProperty("nWindows", "The number of windows.")

    def _get_nWindows(self):
        return self._nWindows

    fine = dynamicProperty("fine", "The fine :class:`PropagatorConfig`.")

    def _get_fine(self):
        return self._fine

    coarse = dynamicProperty("coarse", "The coarse :class:`PropagatorConfig`.")

    def _get_coarse(self):
        return self._coarse

    tolerance = dynamicProperty("tolerance", "The convergence tolerance.")

    def _get_tolerance(self):
        return self._tolerance

    maxIterations = dynamicProperty("maxIterations", "The iteration limit.")

    def _get_maxIterations(self):
        return self._maxIterations

    normMode = dynamicProperty("normMode", "The increment norm mode.")

    def _get_normMode(self):
        return self._normMode

    updateMode = dynamicProperty("updateMode", "The window update mode.")

    def _get_updateMode(self):
        return self._updateMode

    workers = dynamicProperty("workers", "The number of fine sweep workers.")

    def _get_workers(self):
        return self._workers

    poolMethod = dynamicProperty("poolMethod", "The fine sweep pool method.")

    def _get_poolMethod(self):
        return self._poolMethod

    def grid(self, system):
        """
        Return the :class:`WindowGrid` of this config on the time
        span of **system**.
        """
        t0, tEnd = system.timeSpan
        if self._boundaries is None:
            return WindowGrid.uniform(t0, tEnd, self._nWindows)
        grid = WindowGrid(self._boundaries)
        if not grid.matches(t0, tEnd):
            raise ValueError("Boundaries must span the system time span "
                             "(%r, %r)." % (t0, tEnd))
        return grid


# -----
# State
# -----

class PararealState(BaseObject):

    """
    The iterate of a Parareal run: the boundary values ``U_j``
    (``j = 0..N``), the cached coarse values ``ū_j`` and fine
    values ``ũ_j`` (``j = 1..N``, stored at list index ``j - 1``)
    of the previous iteration, and the iteration counter.
    """

    def _init(self, initial, grid):
        self._initial = initial
        self._grid = grid
        n = len(initial)
        times = grid.boundaries
        self._uBounds = [initial] + [None] * grid.nWindows
        self._coarsePrev = [StateVector.zeros(n, t) for t in times[1:]]
        self._finePrev = [StateVector.zeros(n, t) for t in times[1:]]
        self._iteration = 0

    def _reprContents(self):
        return ["N=%d" % self.grid.nWindows, "k=%d" % self.iteration]

    initial = dynamicProperty("initial", "The prescribed initial value ``u0``.")

    def _get_initial(self):
        return self._initial

    grid = dynamicProperty("grid", "The :class:`WindowGrid`.")

    def _get_grid(self):
        return self._grid

    uBounds = dynamicProperty("uBounds", "The ``N + 1`` boundary values.")

    def _get_uBounds(self):
        return list(self._uBounds)

    coarsePrev = dynamicProperty("coarsePrev", "The ``N`` cached coarse values.")

    def _get_coarsePrev(self):
        return list(self._coarsePrev)

    finePrev = dynamicProperty("finePrev", "The ``N`` cached fine values.")

    def _get_finePrev(self):
        return list(self._finePrev)

    iteration = dynamicProperty("iteration", "The iteration counter ``k``.")

    def _get_iteration(self):
        return self._iteration


# ------
# Report
# ------

class RunReport(BaseObject):

    """
    The record of a Parareal run: per iteration the increments,
    the errors against a reference (when one was given), the
    constraint residuals and the stage timings.

        >>> state, report = run(system, u0, config, reference=reference)
        >>> report.iterationsUsed
        4
        >>> report.modeledSpeedup
        10.0
        >>> report.toDataFrame().to_csv("parareal.csv")
    """

    def _init(self, grid, normMode, tolerance):
        self._grid = grid
        self._normMode = normMode
        self._tolerance = tolerance
        self._records = []
        self._converged = False
        self._madeConsistent = False
        self._totalSeconds = 0.0
        self._sequentialSeconds = None

    def _reprContents(self):
        return [
            "k=%d" % self.iterationsUsed,
            "converged=%r" % self.converged
        ]

    def addRecord(self, record):
        self._records.append(record)

    records = dynamicProperty(
        "records",
        """
        A ``list`` of one ``dict`` per iteration with the keys
        ``iteration``, ``states``, ``increments``, ``maxIncrement``,
        ``errorsDifferential``, ``errorsFull``, ``constraintResiduals``,
        ``coarseSeconds``, ``fineSeconds`` and ``fineWindowSeconds``.
        Per window values are arrays over ``j = 1..N``; ``states``
        holds the ``N + 1`` boundary states.
        """
    )

    def _get_records(self):
        return list(self._records)

    grid = dynamicProperty("grid", "The :class:`WindowGrid` of the run.")

    def _get_grid(self):
        return self._grid

    normMode = dynamicProperty("normMode", "The norm used for increments.")

    def _get_normMode(self):
        return self._normMode

    tolerance = dynamicProperty("tolerance", "The convergence tolerance.")

    def _get_tolerance(self):
        return self._tolerance

    iterationsUsed = dynamicProperty("iterationsUsed", "The number of iterations ``k``.")

    def _get_iterationsUsed(self):
        if not self._records:
            return 0
        return self._records[-1]["iteration"]

    converged = dynamicProperty("base_converged", "``True`` when the run converged.")

    def _get_base_converged(self):
        return self._converged

    def _set_base_converged(self, value):
        self._converged = bool(value)

    madeConsistent = dynamicProperty(
        "base_madeConsistent",
        "``True`` when the initial value had to be made consistent."
    )

    def _get_base_madeConsistent(self):
        return self._madeConsistent

    def _set_base_madeConsistent(self, value):
        self._madeConsistent = bool(value)

    totalSeconds = dynamicProperty("base_totalSeconds", "The wall-clock of the run.")

    def _get_base_totalSeconds(self):
        return self._totalSeconds

    def _set_base_totalSeconds(self, value):
        self._totalSeconds = normalizers.normalizeNonNegative(value, "Seconds")

    sequentialSeconds = dynamicProperty(
        "base_sequentialSeconds",
        "The wall-clock of the sequential fine reference or ``None``."
    )

    def _get_base_sequentialSeconds(self):
        return self._sequentialSeconds

    def _set_base_sequentialSeconds(self, value):
        if value is not None:
            value = normalizers.normalizeNonNegative(value, "Seconds")
        self._sequentialSeconds = value

    coarseSeconds = dynamicProperty("coarseSeconds", "The total coarse stage wall-clock.")

    def _get_coarseSeconds(self):
        return float(sum(record["coarseSeconds"] for record in self._records))

    fineSeconds = dynamicProperty("fineSeconds", "The total fine stage wall-clock.")

    def _get_fineSeconds(self):
        return float(sum(record["fineSeconds"] for record in self._records))

    # -------
    # Speedup
    # -------

    modeledSpeedup = dynamicProperty(
        "modeledSpeedup",
        "The ideal speedup ``N/k`` ignoring the coarse cost."
    )

    def _get_modeledSpeedup(self):
        k = self.iterationsUsed
        if k == 0:
            return float("nan")
        return self._grid.nWindows / k

    modeledSpeedupWithCoarse = dynamicProperty(
        "modeledSpeedupWithCoarse",
        """
        The speedup ``N·c_F / (k·c_F + (k + 1)·N·c_G)`` with the
        measured mean cost ``c_F`` of one fine window and ``c_G``
        of one coarse window.
        """
    )

    def _get_modeledSpeedupWithCoarse(self):
        k = self.iterationsUsed
        n = self._grid.nWindows
        windowSeconds = [
            seconds for record in self._records
            for seconds in record["fineWindowSeconds"]
        ]
        if k == 0 or not windowSeconds:
            return float("nan")
        fineCost = float(np.mean(windowSeconds))
        coarseCost = self.coarseSeconds / (len(self._records) * n)
        denominator = k * fineCost + (k + 1) * n * coarseCost
        if denominator == 0:
            return float("nan")
        return n * fineCost / denominator

    actualSpeedup = dynamicProperty(
        "actualSpeedup",
        "The sequential wall-clock divided by the Parareal wall-clock."
    )

    def _get_actualSpeedup(self):
        if self._sequentialSeconds is None or self._totalSeconds == 0:
            return float("nan")
        return self._sequentialSeconds / self._totalSeconds

    # ------
    # Errors
    # ------

    def errors(self, iteration, mode="differential"):
        """
        Return the per window errors against the reference after
        **iteration**, or ``None`` when the run had no reference.
        """
        key = "errorsDifferential" if mode == "differential" else "errorsFull"
        return self._records[iteration][key]

    def exactFront(self, iteration, tolerance=EXACTNESS_TOLERANCE):
        """
        Return the number of leading windows whose differential
        error after **iteration** is at most **tolerance**.
        """
        errors = self.errors(iteration)
        if errors is None:
            return None
        front = 0
        for error in errors:
            if error > tolerance:
                break
            front += 1
        return front

    # ------
    # Export
    # ------

    def toDataFrame(self):
        """
        Return a ``pandas.DataFrame`` with one row per iteration and
        window holding the columns of :data:`REPORT_COLUMNS`.
        """
        rows = []
        boundaries = self._grid.boundaries
        nan = float("nan")
        for record in self._records:
            for j in range(1, self._grid.nWindows + 1):
                errorsDifferential = record["errorsDifferential"]
                errorsFull = record["errorsFull"]
                rows.append((
                    record["iteration"],
                    j,
                    boundaries[j],
                    record["increments"][j - 1],
                    nan if errorsDifferential is None else errorsDifferential[j - 1],
                    nan if errorsFull is None else errorsFull[j - 1],
                    record["coarseSeconds"],
                    record["fineSeconds"],
                ))
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def summary(self):
        """
        Return a ``dict`` of the scalar results of the run.
        """
        return {
            "iterations_used": self.iterationsUsed,
            "converged": self.converged,
            "n_windows": self._grid.nWindows,
            "norm_mode": self._normMode,
            "made_consistent": self.madeConsistent,
            "coarse_seconds": self.coarseSeconds,
            "fine_seconds": self.fineSeconds,
            "total_seconds": self.totalSeconds,
            "modeled_speedup": self.modeledSpeedup,
            "modeled_speedup_with_coarse": self.modeledSpeedupWithCoarse,
            "actual_speedup": self.actualSpeedup,
        }


# -----
# Norms
# -----

def incrementNorm(uNew, uOld, system, mode="differential", floor=NORM_FLOOR):
    """
    Return the relative size of ``uNew - uOld``:

    * ``"full"``: ``‖Δ‖₂ / max(‖uOld‖₂, floor)``
    * ``"differential"``: the same with ``P·Δ`` and ``P·uOld``
    * ``"mass"``: the same in the seminorm ``sqrt(vᵀ M v)``,
      a measure of the eddy current losses
    """
    mode = normalizers.normalizeNormMode(mode)
    new = uNew.values if isinstance(uNew, StateVector) else normalizers.normalizeVector(uNew)
    old = uOld.values if isinstance(uOld, StateVector) else normalizers.normalizeVector(uOld)
    if new.shape != old.shape:
        raise ValueError("States must have the same dimension, not %d and %d."
                         % (new.shape[0], old.shape[0]))
    difference = new - old
    if mode == "full":
        numerator = np.linalg.norm(difference)
        denominator = np.linalg.norm(old)
    elif mode == "differential":
        projectors = system.projectors
        numerator = np.linalg.norm(projectors.differential(difference))
        denominator = np.linalg.norm(projectors.differential(old))
    else:
        mass = system.mass
        numerator = math.sqrt(abs(float(difference @ (mass @ difference))))
        denominator = math.sqrt(abs(float(old @ (mass @ old))))
    return float(numerator / max(denominator, floor))


# ------
# Update
# ------

def updateWindow(j, coarseNew, coarsePrev, finePrev, system, mode="projected_consistent"):
    """
    Return the new boundary value ``U_j`` from the new coarse value,
    the previous coarse value and the previous fine value of window
    **j**, all at time ``T_j``:

    * ``"plain"``: ``ũ + (ū_new - ū_prev)``
    * ``"projected_consistent"``: the same on the differential
      components, followed by a consistent solve for the algebraic
      components.
    """
    mode = normalizers.normalizeUpdateMode(mode)
    for state in (coarsePrev, finePrev):
        if abs(state.time - coarseNew.time) > 1e-12 * max(1.0, abs(coarseNew.time)):
            raise ValueError("Window %d states must share the time %r, not %r."
                             % (j, coarseNew.time, state.time))
    combined = finePrev.values + (coarseNew.values - coarsePrev.values)
    if mode == "plain":
        return coarseNew.withValues(combined)
    projectors = system.projectors
    differential = projectors.differential(finePrev.values) + (
        projectors.differential(coarseNew.values) - projectors.differential(coarsePrev.values)
    )
    guess = differential + projectors.algebraic(combined)
    return system.makeConsistent(coarseNew.withValues(guess))


# ------
# Sweeps
# ------

def _fineWindow(propagator, window, tTarget, tStart, uStart):
    start = time.perf_counter()
    try:
        result = propagator.propagate(tTarget, tStart, uStart)
    except PropagationError as error:
        raise error.locate(window=window)
    except DaeParaError as error:
        raise PropagationError(str(error), window=window)
    return result, time.perf_counter() - start


def sequentialSolve(system, u0, grid, fine):
    """
    Step the fine propagator sequentially window by window and
    return ``(states, seconds)``: the ``N + 1`` boundary states and
    the wall-clock. This is the reference Parareal converges to.

    **fine** may be a :class:`PropagatorConfig` or a propagator.
    """
    if isinstance(fine, PropagatorConfig):
        fine = ImplicitEulerPropagator(system, fine)
    start = time.perf_counter()
    states = [u0]
    for j in range(1, grid.nWindows + 1):
        tStart, tTarget = grid.window(j)
        try:
            states.append(fine.propagate(tTarget, tStart, states[-1]))
        except PropagationError as error:
            raise error.locate(window=j)
    seconds = time.perf_counter() - start
    logger.info("Sequential %s solve over %d windows took %.3f s.",
                fine.config.label, grid.nWindows, seconds)
    return states, seconds


def _relativeErrors(states, reference, system):
    projectors = system.projectors
    differential = []
    full = []
    for state, expected in zip(states, reference):
        difference = state.values - expected.values
        differential.append(
            np.linalg.norm(projectors.differential(difference))
            / max(np.linalg.norm(projectors.differential(expected.values)), NORM_FLOOR)
        )
        full.append(np.linalg.norm(difference) / max(np.linalg.norm(expected.values), NORM_FLOOR))
    return np.array(differential), np.array(full)


def _conformReference(reference, grid):
    reference = list(reference)
    if len(reference) != grid.nWindows + 1:
        raise ValueError("Reference must hold %d boundary states, not %d."
                         % (grid.nWindows + 1, len(reference)))
    for state, t in zip(reference, grid.boundaries):
        if abs(state.time - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError("Reference state at time %r does not match the "
                             "boundary %r." % (state.time, t))
    return reference


# ---
# Run
# ---

def run(system, u0, config, reference=None, pool=None):
    """
    Run Parareal on **system** from the :class:`StateVector` **u0**
    and return ``(state, report)``.

    Iteration 0 is the coarse sweep from the zero initialized caches,
    so it is pure coarse propagation. Each following iteration ``k``
    runs the fine sweep on ``U^(k-1)`` (in parallel) and then the
    sequential coarse sweep with the update of every window. After
    iteration ``k`` the windows ``j <= k`` hold the sequential fine
    solution. The run stops after iteration ``k`` once ``k >= 2``
    and the largest relative increment is at most the tolerance,
    or when ``k`` reaches ``config.maxIterations``.

    **reference** is an optional list of ``N + 1`` boundary states
    (see :func:`sequentialSolve`); when given, the report holds the
    per window errors. **pool** is an optional started
    :class:`WorkerPool`; by default one is made from the config.

    A run that stops at the iteration limit is returned with
    ``report.converged`` set to ``False``, unless ``k >= N`` in
    which case the result is exact.
    """
    if not isinstance(config, PararealConfig):
        raise TypeError("Config must be a PararealConfig, not %s."
                        % type(config).__name__)
    grid = config.grid(system)
    u0 = system._conform(u0)
    if abs(u0.time - grid.boundaries[0]) > 1e-12 * max(1.0, abs(grid.boundaries[0])):
        raise ValueError("Initial state time %r does not match the start "
                         "time %r." % (u0.time, grid.boundaries[0]))
    if reference is not None:
        reference = _conformReference(reference, grid)
    report = RunReport(grid, config.normMode, config.tolerance)
    if not system.isConsistent(u0):
        logger.warning("Initial value at time %r is not consistent; "
                       "solving the constraint first.", u0.time)
        u0 = system.makeConsistent(u0)
        report.madeConsistent = True
    fine = ImplicitEulerPropagator(system, config.fine)
    coarse = ImplicitEulerPropagator(system, config.coarse)
    state = PararealState(u0, grid)
    nWindows = grid.nWindows
    ownPool = pool is None
    if ownPool:
        pool = WorkerPool(config.workers, config.poolMethod)
    start = time.perf_counter()
    try:
        pool.start()
        iteration = 0
        previous = None
        fineSeconds = 0.0
        fineWindowSeconds = []
        while True:
            coarseSeconds = _coarseSweep(state, system, coarse, config, iteration)
            current = state._uBounds
            if previous is None:
                increments = np.full(nWindows, np.nan)
            else:
                increments = np.array([
                    incrementNorm(current[j], previous[j], system, config.normMode)
                    for j in range(1, nWindows + 1)
                ])
            maxIncrement = float(np.max(increments)) if previous is not None else float("nan")
            done = iteration >= config.maxIterations or (
                iteration >= 2 and maxIncrement <= config.tolerance)
            record = {
                "iteration": iteration,
                "increments": increments,
                "maxIncrement": maxIncrement,
                "states": list(current),
                "coarseSeconds": coarseSeconds,
                "fineSeconds": fineSeconds,
                "fineWindowSeconds": fineWindowSeconds,
                "constraintResiduals": np.array([system.constraintResidual(u) for u in current[1:]]),
                "errorsDifferential": None,
                "errorsFull": None,
            }
            if reference is not None:
                record["errorsDifferential"], record["errorsFull"] = _relativeErrors(
                    current[1:], reference[1:], system)
            report.addRecord(record)
            logger.info("Parareal iteration %d: max increment %.3e, coarse %.3f s, "
                        "fine %.3f s.", iteration, maxIncrement, coarseSeconds, fineSeconds)
            if done:
                break
            previous = list(current)
            fineSeconds, fineWindowSeconds = _fineSweep(state, fine, pool, iteration + 1)
            iteration += 1
    finally:
        if ownPool:
            pool.shutdown()
    report.totalSeconds = time.perf_counter() - start
    converged = iteration >= nWindows or (
        iteration >= 2 and report.records[-1]["maxIncrement"] <= config.tolerance)
    report.converged = converged
    if not converged:
        logger.warning("Parareal did not converge within %d iterations "
                       "(max increment %.3e).", iteration, report.records[-1]["maxIncrement"])
    return state, report


def _coarseSweep(state, system, coarse, config, iteration):
    start = time.perf_counter()
    grid = state.grid
    for j in range(1, grid.nWindows + 1):
        tStart, tTarget = grid.window(j)
        try:
            coarseNew = coarse.propagate(tTarget, tStart, state._uBounds[j - 1])
            state._uBounds[j] = updateWindow(
                j, coarseNew, state._coarsePrev[j - 1], state._finePrev[j - 1],
                system, config.updateMode
            )
        except PropagationError as error:
            raise error.locate(window=j, iteration=iteration)
        except DaeParaError as error:
            raise PropagationError(str(error), window=j, iteration=iteration)
        state._coarsePrev[j - 1] = coarseNew
    state._iteration = iteration
    return time.perf_counter() - start


def _fineSweep(state, fine, pool, iteration):
    start = time.perf_counter()
    grid = state.grid
    windows = list(range(1, grid.nWindows + 1))
    try:
        results = pool.map(
            _fineWindow,
            [fine] * len(windows),
            windows,
            [grid.boundaries[j] for j in windows],
            [grid.boundaries[j - 1] for j in windows],
            [state._uBounds[j - 1] for j in windows]
        )
    except PropagationError as error:
        raise error.locate(iteration=iteration)
    state._finePrev = [result for result, seconds in results]
    return time.perf_counter() - start, [seconds for result, seconds in results]


# ---------------
# Matching checks
# ---------------

def matchingResidual(state, system, fine, mode="differential", pool=None):
    """
    Return the matching residual ``H(U)`` of **state** as an array
    of ``N + 1`` relative norms: entry 0 is ``U_0`` against the
    prescribed initial value, entry ``j`` is ``U_j`` against
    ``F(T_j, T_{j-1}, U_{j-1})``. **fine** is the fine propagator
    or its :class:`PropagatorConfig`. This propagates every window
    again and is meant for diagnostics.
    """
    if isinstance(fine, PropagatorConfig):
        fine = ImplicitEulerPropagator(system, fine)
    grid = state.grid
    bounds = state._uBounds
    if any(u is None for u in bounds):
        raise ValueError("State is not populated.")
    windows = list(range(1, grid.nWindows + 1))
    if pool is None:
        pool = WorkerPool()
    results = pool.map(
        _fineWindow,
        [fine] * len(windows),
        windows,
        [grid.boundaries[j] for j in windows],
        [grid.boundaries[j - 1] for j in windows],
        [bounds[j - 1] for j in windows]
    )
    residual = [incrementNorm(bounds[0], state.initial, system, mode)]
    for j, (propagated, seconds) in zip(windows, results):
        residual.append(incrementNorm(bounds[j], propagated, system, mode))
    return np.array(residual)
