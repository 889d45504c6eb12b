import math
import numpy as np
import scipy.sparse as sp
from daeParareal.base import normalizers, BaseDaeSystem
from daeParareal.base.base import BaseObject, dynamicProperty
from daeParareal.base.errors import ConfigurationError
from daeParareal.models.base import MBaseObject
from daeParareal.models.rod import RodModel, RodSystem


class CoupledToyModel(BaseObject):

    """
    A rod coupled to a rotating mass:

        dθ/dt = ω
        I dω/dt + κ θ = T(a)

    with the linear torque ``T(a) = c·a`` where ``c`` is
    **torqueGain** times the cell size on the conducting nodes.

        >>> model = CoupledToyModel(RodModel.default(nCells=21), inertia=1e-2)
    """

    copyAttributes = ("_field", "_inertia", "_torsion", "_torqueGain", "_theta0", "_omega0")

    def _init(self, field, inertia=1e-2, torsion=10.0, torqueGain=1.0, theta0=0.0, omega0=0.0):
        if not isinstance(field, RodModel):
            raise TypeError("Field must be a RodModel, not %s."
                            % type(field).__name__)
        self._field = field
        self._inertia = normalizers.normalizePositive(inertia, "Inertia")
        torsion = normalizers.normalizeReal(torsion, "Torsion")
        if torsion < 0:
            raise ConfigurationError("Torsion must not be negative, not %r." % torsion)
        self._torsion = torsion
        self._torqueGain = normalizers.normalizeReal(torqueGain, "Torque gain")
        self._theta0 = normalizers.normalizeReal(theta0, "Initial angle")
        self._omega0 = normalizers.normalizeReal(omega0, "Initial angular velocity")

    def _reprContents(self):
        return ["I=%r" % self.inertia, "κ=%r" % self.torsion]

    field = dynamicProperty("field", "The :class:`RodModel` of the field.")

    def _get_field(self):
        return self._field

    inertia = dynamicProperty("inertia", "The moment of inertia in kg·m².")

    def _get_inertia(self):
        return self._inertia

    torsion = dynamicProperty("torsion", "The torsion constant in N·m/rad.")

    def _get_torsion(self):
        return self._torsion

    torqueGain = dynamicProperty("torqueGain", "The torque coupling gain.")

    def _get_torqueGain(self):
        return self._torqueGain

    theta0 = dynamicProperty("theta0", "The initial angle in rad.")

    def _get_theta0(self):
        return self._theta0

    omega0 = dynamicProperty("omega0", "The initial angular velocity in rad/s.")

    def _get_omega0(self):
        return self._omega0

    def torqueVector(self):
        """
        Return ``c`` with ``T(a) = c·a``.
        """
        field = self._field
        conducting = field.massMatrix().diagonal() > 0
        return np.where(conducting, self._torqueGain * field.cellSize, 0.0)

    def mechanicalSolution(self, t):
        """
        Return ``(θ(t), ω(t))`` of the uncoupled motion (``T ≡ 0``)
        started at ``t = 0``.
        """
        if self._torsion == 0:
            return self._theta0 + self._omega0 * t, self._omega0
        frequency = math.sqrt(self._torsion / self._inertia)
        theta = (self._theta0 * math.cos(frequency * t)
                 + self._omega0 / frequency * math.sin(frequency * t))
        omega = (-self._theta0 * frequency * math.sin(frequency * t)
                 + self._omega0 * math.cos(frequency * t))
        return theta, omega


class CoupledSystem(MBaseObject, BaseDaeSystem):

    """
    The combined state ``u = [a, θ, ω]`` of a rod and its
    mechanics in the form ``M du/dt + K(u) u = f(t)``.
    """

    modelName = "coupled"

    def _init(self, model, timeSpan=(0.0, 0.2)):
        if not isinstance(model, CoupledToyModel):
            raise TypeError("Model must be a CoupledToyModel, not %s."
                            % type(model).__name__)
        super(CoupledSystem, self)._init(timeSpan=timeSpan)
        self._model = model
        self._field = RodSystem(model.field, timeSpan=timeSpan)
        self._fieldSize = self._field.dimension
        n = self._fieldSize
        self._massMatrix = sp.csr_matrix(sp.block_diag(
            (self._field.mass, sp.diags([1.0, model.inertia])), format="csr"))
        torque = model.torqueVector()
        # rows θ and ω: [0, 0, -1] and [-c, κ, 0]
        mechanics = sp.lil_matrix((2, n + 2))
        mechanics[0, n + 1] = -1.0
        mechanics[1, :n] = -torque
        mechanics[1, n] = model.torsion
        self._mechanics = sp.csr_matrix(mechanics)
        if self._field.isLinear:
            self._stiffnessMatrix = self._combine(self._field.stiffness(np.zeros(n)))

    model = dynamicProperty("model", "The :class:`CoupledToyModel`.")

    def _get_model(self):
        return self._model

    field = dynamicProperty("field", "The :class:`RodSystem` of the field.")

    def _get_field(self):
        return self._field

    def _get_isLinear(self):
        return self._field.isLinear

    def _combine(self, fieldMatrix):
        n = self._fieldSize
        top = sp.hstack((fieldMatrix, sp.csr_matrix((n, 2))))
        return sp.csr_matrix(sp.vstack((top, self._mechanics)))

    def _stiffness(self, values):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix
        return self._combine(self._field.stiffness(values[:self._fieldSize]))

    def _stiffnessAction(self, values):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix @ values
        field = self._field.stiffnessAction(values[:self._fieldSize])
        return np.concatenate((field, self._mechanics @ values))

    def _stiffnessJacobian(self, values):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix
        return self._combine(self._field.stiffnessJacobian(values[:self._fieldSize]))

    def _source(self, t):
        return np.concatenate((self._field.source(t), np.zeros(2)))

    def _initialValues(self):
        values = np.zeros(self._fieldSize + 2)
        values[-2] = self._model.theta0
        values[-1] = self._model.omega0
        return values

    def mechanicalState(self, u):
        """
        Return ``(θ, ω)`` of the state **u**.
        """
        values = self._conformValues(u)
        return float(values[-2]), float(values[-1])


def buildCoupled(model=None, tEnd=0.2, inertia=1e-2, torsion=10.0, torqueGain=1.0,
                 theta0=0.0, omega0=0.0, **parameters):
    """
    Build a :class:`CoupledSystem` on ``[0, tEnd]``. Without
    **model** the field is the standard rod of
    :meth:`RodModel.default` made from **parameters**.
    """
    if model is None:
        model = CoupledToyModel(
            RodModel.default(**parameters),
            inertia=inertia,
            torsion=torsion,
            torqueGain=torqueGain,
            theta0=theta0,
            omega0=omega0
        )
    elif parameters:
        raise ConfigurationError("Parameters %s cannot be combined with a model."
                                 % ", ".join(sorted(parameters)))
    return CoupledSystem(model, timeSpan=(0.0, tEnd))
