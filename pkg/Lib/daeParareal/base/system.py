import logging
import numpy as np
from daeParareal.base import normalizers
from daeParareal.base.base import BaseObject, dynamicProperty
from daeParareal.base.errors import (
    DimensionError, SingularMatrixError, ConsistencyError, ConvergenceError
)
from daeParareal.base.linalg import LinearSolver, buildProjectors

logger = logging.getLogger(__name__)


# -----
# State
# -----

class StateVector(BaseObject):

    """
    A state of a system at a point in time.

        >>> state = StateVector([1.0, 0.5], time=0.0)
        >>> state.values
        array([1. , 0.5])
        >>> state.time
        0.0

    The values are a read only ``float64`` array.
    """

    copyAttributes = ("_values", "_time")

    def _init(self, values, time=0.0):
        values = normalizers.normalizeVector(values)
        values.setflags(write=False)
        self._values = values
        self._time = normalizers.normalizeTime(time)

    def _reprContents(self):
        return [
            "n=%d" % len(self),
            "time=%r" % self.time
        ]

    values = dynamicProperty("values", "The read only state values.")

    def _get_values(self):
        return self._values

    time = dynamicProperty("time", "The time of the state in seconds.")

    def _get_time(self):
        return self._time

    def __len__(self):
        return self._values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.time == other.time and np.array_equal(self.values, other.values)

    def __ne__(self, other):
        equal = self.__eq__(other)
        return NotImplemented if equal is NotImplemented else not equal

    def __hash__(self):
        return hash((self.time, self._values.tobytes()))

    def withValues(self, values, time=None):
        """
        Return a new state holding **values** at **time**.
        **time** defaults to the time of this state.
        """
        if time is None:
            time = self.time
        return StateVector(values, time)

    @staticmethod
    def zeros(n, time=0.0):
        return StateVector(np.zeros(n), time)


# ------
# System
# ------

class BaseDaeSystem(BaseObject):

    """
    An index-1 differential algebraic system

        M du/dt + K(u) u = f(t)

    with a possibly singular mass matrix ``M``. Concrete systems
    live in :mod:`daeParareal.models`. A system is immutable once
    built and may be shared by concurrent workers.

        >>> system = NewSystem("analytic2x2")
        >>> system.dimension
        2
    """

    def _reprContents(self):
        contents = []
        if self.name is not None:
            contents.append("'%s'" % self.name)
        contents.append("n=%d" % self.dimension)
        if not self.isLinear:
            contents.append("nonlinear")
        return contents

    # -----------
    # Description
    # -----------

    name = dynamicProperty("base_name", "The name of the system or ``None``.")

    def _get_base_name(self):
        return self._get_name()

    def _get_name(self):
        """
        Subclasses may override this method.
        """
        return None

    dimension = dynamicProperty(
        "base_dimension",
        """
        The number of unknowns. This attribute is read only. ::

            >>> system.dimension
            100
        """
    )

    def _get_base_dimension(self):
        value = self._get_dimension()
        return normalizers.normalizeCount(value, "Dimension", minimum=1)

    def _get_dimension(self):
        """
        This is the environment implementation of
        :attr:`BaseDaeSystem.dimension`.

        Subclasses must override this method.
        """
        self.raiseNotImplementedError()

    timeSpan = dynamicProperty(
        "base_timeSpan",
        "The ``(t0, tEnd)`` time span of the system in seconds."
    )

    def _get_base_timeSpan(self):
        value = self._get_timeSpan()
        return normalizers.normalizeTimeSpan(value)

    def _get_timeSpan(self):
        """
        Subclasses must override this method.
        """
        self.raiseNotImplementedError()

    isLinear = dynamicProperty(
        "base_isLinear",
        "``True`` when the stiffness does not depend on the state."
    )

    def _get_base_isLinear(self):
        return bool(self._get_isLinear())

    def _get_isLinear(self):
        """
        Subclasses may override this method.
        """
        return True

    hasJacobian = dynamicProperty(
        "hasJacobian",
        "``True`` when Newton's method can use a stiffness Jacobian."
    )

    def _get_hasJacobian(self):
        if self.isLinear:
            return True
        cls = type(self)
        return (
            cls._stiffnessJacobian is not BaseDaeSystem._stiffnessJacobian
            or cls._stiffnessJacobianAction is not BaseDaeSystem._stiffnessJacobianAction
        )

    # --------
    # Matrices
    # --------

    mass = dynamicProperty(
        "base_mass",
        "The (possibly singular) mass matrix as a ``scipy.sparse`` matrix."
    )

    def _get_base_mass(self):
        value = self._get_mass()
        value = normalizers.normalizeMatrix(value)
        n = self.dimension
        if value.shape != (n, n):
            raise DimensionError("Mass matrix must be %dx%d, not %dx%d."
                                 % ((n, n) + value.shape))
        return value

    def _get_mass(self):
        """
        This is the environment implementation of
        :attr:`BaseDaeSystem.mass`.

        Subclasses must override this method.
        """
        self.raiseNotImplementedError()

    _projectors = None

    projectors = dynamicProperty(
        "projectors",
        "The :class:`ProjectorPair` of the mass matrix."
    )

    def _get_projectors(self):
        if self._projectors is None:
            self._projectors = buildProjectors(self.mass)
        return self._projectors

    def stiffness(self, u):
        """
        Return the stiffness matrix ``K(u)``.

        **u** must be a :class:`StateVector` or a vector with
        :attr:`dimension` entries.
        """
        values = self._conformValues(u)
        value = normalizers.normalizeMatrix(self._stiffness(values))
        n = self.dimension
        if value.shape != (n, n):
            raise DimensionError("Stiffness matrix must be %dx%d, not %dx%d."
                                 % ((n, n) + value.shape))
        return value

    def _stiffness(self, values):
        """
        This is the environment implementation of
        :meth:`BaseDaeSystem.stiffness`. **values** will be
        a ``float64`` array.

        Subclasses must override this method.
        """
        self.raiseNotImplementedError()

    def stiffnessAction(self, u):
        """
        Return ``K(u)·u``.
        """
        values = self._conformValues(u)
        return normalizers.normalizeVector(self._stiffnessAction(values),
                                           length=self.dimension)

    def _stiffnessAction(self, values):
        """
        Subclasses may override this method.
        """
        return self._stiffness(values) @ values

    def stiffnessJacobian(self, u):
        """
        Return the Jacobian of ``u ↦ K(u)·u`` at **u**. For
        linear systems this is ``K``. Systems that only supply
        :meth:`stiffnessJacobianAction` get the Jacobian
        assembled column by column.
        """
        values = self._conformValues(u)
        return normalizers.normalizeMatrix(self._stiffnessJacobian(values))

    def _stiffnessJacobian(self, values):
        """
        Subclasses may override this method.
        """
        if self.isLinear:
            return self._stiffness(values)
        cls = type(self)
        if cls._stiffnessJacobianAction is BaseDaeSystem._stiffnessJacobianAction:
            self.raiseNotImplementedError()
        n = values.shape[0]
        columns = [self._stiffnessJacobianAction(values, column) for column in np.eye(n)]
        return np.array(columns).T

    def stiffnessJacobianAction(self, u, v):
        """
        Return the directional derivative of ``u ↦ K(u)·u``
        at **u** in direction **v**.
        """
        values = self._conformValues(u)
        direction = normalizers.normalizeVector(v, length=self.dimension)
        return normalizers.normalizeVector(
            self._stiffnessJacobianAction(values, direction),
            length=self.dimension
        )

    def _stiffnessJacobianAction(self, values, direction):
        """
        Subclasses may override this method.
        """
        return self._stiffnessJacobian(values) @ direction

    def source(self, t):
        """
        Return the source vector ``f(t)``.
        """
        t = normalizers.normalizeTime(t)
        return normalizers.normalizeVector(self._source(t), length=self.dimension)

    def _source(self, t):
        """
        This is the environment implementation of
        :meth:`BaseDaeSystem.source`.

        Subclasses must override this method.
        """
        self.raiseNotImplementedError()

    # ------
    # States
    # ------

    def initialState(self):
        """
        Return the default initial :class:`StateVector` at ``t0``.
        It is not necessarily consistent.
        """
        values = self._initialValues()
        return StateVector(
            normalizers.normalizeVector(values, length=self.dimension),
            self.timeSpan[0]
        )

    def _initialValues(self):
        """
        Subclasses may override this method.
        """
        return np.zeros(self.dimension)

    hasReferenceSolution = dynamicProperty(
        "hasReferenceSolution",
        "``True`` when the system knows its exact solution."
    )

    def _get_hasReferenceSolution(self):
        return type(self)._referenceSolution is not BaseDaeSystem._referenceSolution

    def referenceSolution(self, t, u0):
        """
        Return the exact solution at time **t** starting from
        the :class:`StateVector` **u0**.
        """
        u0 = self._conform(u0)
        t = normalizers.normalizeTime(t)
        values = self._referenceSolution(t, u0)
        return StateVector(normalizers.normalizeVector(values, length=self.dimension), t)

    def _referenceSolution(self, t, u0):
        """
        Subclasses may override this method.
        """
        self.raiseNotImplementedError()

    def _conform(self, u):
        if not isinstance(u, StateVector):
            raise TypeError("State must be a StateVector, not %s."
                            % type(u).__name__)
        if len(u) != self.dimension:
            raise DimensionError("State must have %d entries, not %d."
                                 % (self.dimension, len(u)))
        return u

    def _conformValues(self, u):
        if isinstance(u, StateVector):
            u = self._conform(u).values
        return normalizers.normalizeVector(u, length=self.dimension)

    # -----------
    # Decompose
    # -----------

    def splitState(self, u):
        """
        Split the :class:`StateVector` **u** into its differential
        part ``P·u`` and algebraic part ``Q·u``. The parts add up
        to ``u`` exactly.

            >>> differential, algebraic = system.splitState(u)
        """
        u = self._conform(u)
        projectors = self.projectors
        return projectors.differential(u.values), projectors.algebraic(u.values)

    def residual(self, u, duDt):
        """
        Return ``M·duDt + K(u)·u - f(u.time)``.
        """
        u = self._conform(u)
        duDt = normalizers.normalizeVector(duDt, length=self.dimension)
        return self.mass @ duDt + self.stiffnessAction(u) - self.source(u.time)

    def constraintResidual(self, u):
        """
        Return ``‖Qᵀ(K(u)·u - f(u.time))‖₂``, the violation of
        the algebraic constraint at **u**. This is zero for every
        state of a system without algebraic components.
        """
        u = self._conform(u)
        algebraic = list(self.projectors.algebraicIndices)
        if not algebraic:
            return 0.0
        defect = self.stiffnessAction(u) - self.source(u.time)
        return float(np.linalg.norm(defect[algebraic]))

    def checkIndexOne(self, u):
        """
        Verify that the algebraic block of the tangent stiffness
        at **u** is nonsingular. Raises :class:`ConsistencyError`
        otherwise.
        """
        u = self._conform(u)
        algebraic = list(self.projectors.algebraicIndices)
        if not algebraic:
            return True
        block = self._algebraicTangent(u.values, algebraic)
        try:
            LinearSolver(block)
        except SingularMatrixError as error:
            raise ConsistencyError("Algebraic block is singular at time %r: %s"
                                   % (u.time, error))
        return True

    def _algebraicTangent(self, values, algebraic):
        if self.hasJacobian:
            matrix = self.stiffnessJacobian(values)
        else:
            matrix = self.stiffness(values)
        return matrix[algebraic][:, algebraic]

    def makeConsistent(self, u, tolerance=1e-8, maxIterations=50):
        """
        Return a :class:`StateVector` with the differential part of
        **u** and algebraic components solving the constraint

            Qᵀ(K(u*)·u* - f(t)) = 0

        The constraint is solved by Newton's method on the algebraic
        block with the differential block frozen. It stops when the
        constraint residual is at most ``tolerance * (1 + ‖f(t)‖₂)``.
        A state that is already consistent is returned unchanged.

        Raises :class:`ConsistencyError` for a singular algebraic
        block and :class:`ConvergenceError` after **maxIterations**.
        """
        u = self._conform(u)
        tolerance = normalizers.normalizeTolerance(tolerance)
        maxIterations = normalizers.normalizeCount(maxIterations, "Maximum iterations", minimum=1)
        algebraic = list(self.projectors.algebraicIndices)
        if not algebraic:
            return u
        f = self.source(u.time)
        threshold = tolerance * (1.0 + np.linalg.norm(f))
        values = u.values.copy()
        residualNorm = None
        for iteration in range(maxIterations + 1):
            defect = (self.stiffnessAction(values) - f)[algebraic]
            residualNorm = float(np.linalg.norm(defect))
            if residualNorm <= threshold:
                if iteration == 0:
                    return u
                logger.debug("Consistent state at time %r after %d iterations "
                             "(residual %.3e).", u.time, iteration, residualNorm)
                return u.withValues(values)
            if iteration == maxIterations:
                break
            try:
                if self.hasJacobian:
                    block = self._algebraicTangent(values, algebraic)
                    values[algebraic] -= LinearSolver(block).solve(defect)
                else:
                    # Picard: freeze K at the current iterate
                    matrix = self.stiffness(values)
                    coupling = matrix[algebraic] @ np.where(self.projectors.mask, values, 0.0)
                    block = matrix[algebraic][:, algebraic]
                    values[algebraic] = LinearSolver(block).solve(f[algebraic] - coupling)
            except SingularMatrixError as error:
                raise ConsistencyError("Algebraic block is singular at time %r: %s"
                                       % (u.time, error))
        raise ConvergenceError(
            "Consistent initialization did not converge after %d iterations "
            "(residual %.3e)." % (maxIterations, residualNorm),
            iterations=maxIterations, residual=residualNorm
        )

    def isConsistent(self, u, tolerance=1e-8):
        """
        Return ``True`` when the constraint residual of **u** is at
        most ``tolerance * (1 + ‖f(u.time)‖₂)``.
        """
        u = self._conform(u)
        f = self.source(u.time)
        return self.constraintResidual(u) <= tolerance * (1.0 + np.linalg.norm(f))
