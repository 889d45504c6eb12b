import logging
import math
import numpy as np
from daeParareal.base import normalizers
from daeParareal.base.base import BaseObject, dynamicProperty
from daeParareal.base.errors import (
    DaeParaError, ConvergenceError, PropagationError
)
from daeParareal.base.linalg import LinearSolver
from daeParareal.base.system import StateVector

logger = logging.getLogger(__name__)

# step counts are rounded up only beyond this fraction of a step
STEP_SLACK = 1e-9


class PropagatorConfig(BaseObject):

    """
    The settings of an implicit Euler propagator.

        >>> fine = PropagatorConfig(1e-5, label="fine")
        >>> coarse = PropagatorConfig(1e-3, label="coarse")

    **dt** is the (uniform) step size in seconds, **newtonTolerance**
    the relative nonlinear residual tolerance and **newtonMaxIterations**
    the maximum number of Newton iterations per step. The object is
    read only.
    """

    copyAttributes = ("_dt", "_newtonTolerance", "_newtonMaxIterations", "_label")

    def _init(self, dt, newtonTolerance=1e-10, newtonMaxIterations=25, label="fine"):
        self._dt = normalizers.normalizeTimeStep(dt)
        self._newtonTolerance = normalizers.normalizeTolerance(newtonTolerance)
        self._newtonMaxIterations = normalizers.normalizeCount(
            newtonMaxIterations, "Newton maximum iterations", minimum=1)
        self._label = normalizers.normalizeLabel(label)

    def _reprContents(self):
        return ["'%s'" % self.label, "dt=%r" % self.dt]

    dt = dynamicProperty("dt", "The step size in seconds.")

    def _get_dt(self):
        return self._dt

    newtonTolerance = dynamicProperty(
        "newtonTolerance",
        "The relative residual tolerance of the Newton iteration."
    )

    def _get_newtonTolerance(self):
        return self._newtonTolerance

    newtonMaxIterations = dynamicProperty(
        "newtonMaxIterations",
        "The maximum number of Newton iterations per step."
    )

    def _get_newtonMaxIterations(self):
        return self._newtonMaxIterations

    label = dynamicProperty("label", "A label such as ``'fine'`` or ``'coarse'``.")

    def _get_label(self):
        return self._label


# ----
# Step
# ----

class _StepOperator(object):

    """
    The pieces of one implicit Euler step that do not depend on the
    state: ``M/dt`` and, for linear systems, the factorization of
    ``M/dt + K``. It lives for one call only.
    """

    def __init__(self, system, dt):
        self.system = system
        self.dt = dt
        self.scaledMass = system.mass / dt
        self.solver = None
        if system.isLinear:
            n = system.dimension
            self.solver = LinearSolver(self.scaledMass + system.stiffness(np.zeros(n)))

    def step(self, values, t0, config):
        system = self.system
        t1 = t0 + self.dt
        rhs = system.source(t1) + self.scaledMass @ values
        if self.solver is not None:
            return self.solver.solve(rhs)
        x = np.array(values, dtype=np.float64)
        threshold = config.newtonTolerance * (1.0 + np.linalg.norm(rhs))
        residualNorm = None
        for iteration in range(config.newtonMaxIterations + 1):
            residual = self.scaledMass @ x + system.stiffnessAction(x) - rhs
            residualNorm = float(np.linalg.norm(residual))
            logger.debug("Newton iteration %d at time %r: residual %.3e",
                         iteration, t1, residualNorm)
            if residualNorm <= threshold:
                return x
            if iteration == config.newtonMaxIterations:
                break
            if system.hasJacobian:
                matrix = self.scaledMass + system.stiffnessJacobian(x)
                x = x - LinearSolver(matrix).solve(residual)
            else:
                # frozen stiffness fixed point
                matrix = self.scaledMass + system.stiffness(x)
                x = LinearSolver(matrix).solve(rhs)
        raise ConvergenceError(
            "Newton iteration did not converge after %d iterations at time %r "
            "(residual %.3e)." % (config.newtonMaxIterations, t1, residualNorm),
            iterations=config.newtonMaxIterations, residual=residualNorm
        )


def eulerStep(system, u, dt, config):
    """
    Take one implicit Euler step of size **dt** from the
    :class:`StateVector` **u**, solving

        (M/dt + K(u₁))·u₁ = f(t₁) + (M/dt)·u

    with Newton's method (one linear solve for linear systems).
    The algebraic rows carry no ``M·u`` contribution, so the
    result satisfies the constraint whatever the algebraic
    components of **u**.

        >>> u1 = eulerStep(system, u0, 0.1, PropagatorConfig(0.1))
    """
    u = system._conform(u)
    dt = normalizers.normalizeTimeStep(dt)
    operator = _StepOperator(system, dt)
    values = operator.step(u.values, u.time, config)
    return StateVector(values, u.time + dt)


# ----------
# Propagator
# ----------

class ImplicitEulerPropagator(BaseObject):

    """
    The solution operator ``(tTarget, tStart, uStart) ↦ uTarget``
    of a system, realized by uniform implicit Euler steps.

        >>> fine = ImplicitEulerPropagator(system, PropagatorConfig(1e-5))
        >>> u1 = fine.propagate(0.005, 0.0, u0)

    The propagator is immutable and deterministic; one instance
    may be used by many workers at once.
    """

    def _init(self, system, config):
        if not isinstance(config, PropagatorConfig):
            raise TypeError("Config must be a PropagatorConfig, not %s."
                            % type(config).__name__)
        self._system = system
        self._config = config

    def _reprContents(self):
        return self.config._reprContents()

    system = dynamicProperty("system", "The propagated system.")

    def _get_system(self):
        return self._system

    config = dynamicProperty("config", "The :class:`PropagatorConfig`.")

    def _get_config(self):
        return self._config

    def stepCount(self, tTarget, tStart):
        """
        Return the number of uniform steps between **tStart** and
        **tTarget**: the step size never exceeds ``config.dt`` by
        more than a rounding slack.
        """
        span = tTarget - tStart
        return max(1, int(math.ceil(span / self.config.dt - STEP_SLACK)))

    def eulerStep(self, u, dt=None):
        """
        Take one step of size **dt** (default ``config.dt``).
        """
        if dt is None:
            dt = self.config.dt
        return eulerStep(self.system, u, dt, self.config)

    def propagate(self, tTarget, tStart, uStart):
        """
        Propagate **uStart** from **tStart** to **tTarget** and
        return the :class:`StateVector` at **tTarget**.

        The interval is split into :meth:`stepCount` steps of equal
        size so that the last step lands exactly on **tTarget**.
        A failing step raises :class:`PropagationError` carrying
        the step index.
        """
        tTarget = normalizers.normalizeTime(tTarget)
        tStart = normalizers.normalizeTime(tStart)
        uStart = self.system._conform(uStart)
        if tTarget <= tStart:
            raise ValueError("Target time %r must be greater than start "
                             "time %r." % (tTarget, tStart))
        if abs(uStart.time - tStart) > 1e-12 * max(1.0, abs(tStart)):
            raise ValueError("Start state time %r does not match start "
                             "time %r." % (uStart.time, tStart))
        steps = self.stepCount(tTarget, tStart)
        h = (tTarget - tStart) / steps
        try:
            operator = _StepOperator(self.system, h)
        except DaeParaError as error:
            raise PropagationError(str(error), step=0) from error
        values = uStart.values
        for index in range(steps):
            t = tStart + index * h
            try:
                values = operator.step(values, t, self.config)
            except DaeParaError as error:
                raise PropagationError(str(error), step=index) from error
        return StateVector(values, tTarget)
