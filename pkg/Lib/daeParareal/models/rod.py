import math
import numpy as np
import scipy.sparse as sp
from daeParareal.base import normalizers, BaseDaeSystem
from daeParareal.base.base import BaseObject, dynamicProperty
from daeParareal.base.errors import ConfigurationError
from daeParareal.models.base import MBaseObject


# ----------
# Saturation
# ----------

class RationalSaturationCurve(object):

    """
    The reluctivity curve

        ν(b²) = νmin + (νmax - νmin) · b² / (b² + b0²)

    It is positive and non-decreasing in ``b²``.

        >>> curve = RationalSaturationCurve(nuMin=1000.0, nuMax=5000.0, b0=1.0)
        >>> curve(np.array([0.0, 1.0]))
        array([1000., 3000.])
    """

    def __init__(self, nuMin=1000.0, nuMax=5000.0, b0=1.0):
        self.nuMin = normalizers.normalizePositive(nuMin, "Minimum reluctivity")
        self.nuMax = normalizers.normalizePositive(nuMax, "Maximum reluctivity")
        self.b0 = normalizers.normalizePositive(b0, "Saturation knee")
        if self.nuMax < self.nuMin:
            raise ConfigurationError("Maximum reluctivity (%r) must not be smaller "
                                     "than the minimum (%r)." % (self.nuMax, self.nuMin))

    def __repr__(self):
        return "<RationalSaturationCurve nuMin=%r nuMax=%r b0=%r>" % (
            self.nuMin, self.nuMax, self.b0)

    def __call__(self, bSquared):
        bSquared = np.asarray(bSquared, dtype=np.float64)
        knee = self.b0 * self.b0
        return self.nuMin + (self.nuMax - self.nuMin) * bSquared / (bSquared + knee)

    def derivative(self, bSquared):
        """
        Return ``dν/d(b²)``.
        """
        bSquared = np.asarray(bSquared, dtype=np.float64)
        knee = self.b0 * self.b0
        return (self.nuMax - self.nuMin) * knee / (bSquared + knee) ** 2


# -----
# Model
# -----

class RodModel(BaseObject):

    """
    A one dimensional eddy current rod of **nCells** cells on
    ``[0, length]`` with homogeneous Dirichlet ends.

    **sigmaProfile** holds the conductivity of every cell and
    **windingProfile** the share (0 to 1) of every cell carrying
    the source current density
    ``sourceAmplitude · sin(2π · sourceFrequency · t)``. With
    **nuNonlinear** (a callable ``b² ↦ ν`` with a ``derivative``
    method, such as :class:`RationalSaturationCurve`) the
    reluctivity saturates, otherwise it is **nuLinear**.

    The profile must contain conducting cells and, unless
    **allowFullyConducting** is set, non-conducting cells.

        >>> model = RodModel.default(nCells=21)
        >>> model.nodeCount
        20
    """

    copyAttributes = (
        "_nCells", "_length", "_sigmaProfile", "_windingProfile",
        "_nuLinear", "_nuNonlinear", "_sourceAmplitude", "_sourceFrequency"
    )

    def _init(self, nCells, length, sigmaProfile, nuLinear=1000.0, nuNonlinear=None,
              sourceAmplitude=1e5, sourceFrequency=50.0, windingProfile=None,
              allowFullyConducting=False):
        self._nCells = normalizers.normalizeCount(nCells, "Number of cells", minimum=2)
        self._length = normalizers.normalizePositive(length, "Length")
        sigma = normalizers.normalizeVector(sigmaProfile, length=self._nCells)
        if np.any(sigma < 0):
            raise ConfigurationError("Conductivities must not be negative.")
        if not np.any(sigma > 0):
            raise ConfigurationError("At least one cell must be conducting.")
        if not allowFullyConducting and np.all(sigma > 0):
            raise ConfigurationError("At least one cell must be non-conducting.")
        sigma.setflags(write=False)
        self._sigmaProfile = sigma
        if windingProfile is None:
            winding = np.zeros(self._nCells)
        else:
            winding = normalizers.normalizeVector(windingProfile, length=self._nCells)
            if np.any(winding < 0) or np.any(winding > 1):
                raise ConfigurationError("Winding shares must be between 0 and 1.")
        winding.setflags(write=False)
        self._windingProfile = winding
        self._nuLinear = normalizers.normalizePositive(nuLinear, "Reluctivity")
        if nuNonlinear is not None and not callable(nuNonlinear):
            raise TypeError("Nonlinear reluctivity must be callable, not %s."
                            % type(nuNonlinear).__name__)
        self._nuNonlinear = nuNonlinear
        self._sourceAmplitude = normalizers.normalizeReal(sourceAmplitude, "Source amplitude")
        self._sourceFrequency = normalizers.normalizeNonNegative(sourceFrequency, "Source frequency")

    @classmethod
    def default(cls, nCells=101, length=0.1, sigma=1e5, coreStart=0.25, coreEnd=0.75,
                windingStart=0.05, windingEnd=0.2, nuLinear=1000.0, nonlinear=False,
                nuMin=1000.0, nuMax=5000.0, b0=1.0, sourceAmplitude=1e5,
                sourceFrequency=50.0, allowFullyConducting=False):
        """
        Return the standard rod: a conducting core between the
        fractions **coreStart** and **coreEnd** of the length and a
        winding between **windingStart** and **windingEnd**. A cell
        belongs to a region when its midpoint does.
        """
        nCells = normalizers.normalizeCount(nCells, "Number of cells", minimum=2)
        midpoints = (np.arange(nCells) + 0.5) / nCells
        core = (midpoints >= coreStart) & (midpoints <= coreEnd)
        sigmaProfile = np.where(core, normalizers.normalizeNonNegative(sigma, "Conductivity"), 0.0)
        winding = ((midpoints >= windingStart) & (midpoints <= windingEnd)).astype(np.float64)
        nuNonlinear = None
        if nonlinear:
            nuNonlinear = RationalSaturationCurve(nuMin=nuMin, nuMax=nuMax, b0=b0)
        return cls(
            nCells, length, sigmaProfile,
            nuLinear=nuLinear,
            nuNonlinear=nuNonlinear,
            sourceAmplitude=sourceAmplitude,
            sourceFrequency=sourceFrequency,
            windingProfile=winding,
            allowFullyConducting=allowFullyConducting
        )

    def _reprContents(self):
        contents = ["cells=%d" % self.nCells, "length=%r" % self.length]
        if self.isNonlinear:
            contents.append("nonlinear")
        return contents

    nCells = dynamicProperty("nCells", "The number of cells.")

    def _get_nCells(self):
        return self._nCells

    nodeCount = dynamicProperty("nodeCount", "The number of interior nodes.")

    def _get_nodeCount(self):
        return self._nCells - 1

    length = dynamicProperty("length", "The rod length in meters.")

    def _get_length(self):
        return self._length

    cellSize = dynamicProperty("cellSize", "The cell size ``h``.")

    def _get_cellSize(self):
        return self._length / self._nCells

    sigmaProfile = dynamicProperty("sigmaProfile", "The per cell conductivity in S/m.")

    def _get_sigmaProfile(self):
        return self._sigmaProfile

    windingProfile = dynamicProperty("windingProfile", "The per cell winding share.")

    def _get_windingProfile(self):
        return self._windingProfile

    nuLinear = dynamicProperty("nuLinear", "The linear reluctivity in m/H.")

    def _get_nuLinear(self):
        return self._nuLinear

    nuNonlinear = dynamicProperty("nuNonlinear", "The saturation curve or ``None``.")

    def _get_nuNonlinear(self):
        return self._nuNonlinear

    isNonlinear = dynamicProperty("isNonlinear", "``True`` with a saturation curve.")

    def _get_isNonlinear(self):
        return self._nuNonlinear is not None

    sourceAmplitude = dynamicProperty("sourceAmplitude", "The source current density amplitude.")

    def _get_sourceAmplitude(self):
        return self._sourceAmplitude

    sourceFrequency = dynamicProperty("sourceFrequency", "The source frequency in Hz.")

    def _get_sourceFrequency(self):
        return self._sourceFrequency

    # ---------------
    # Discretization
    # ---------------

    def differenceMatrix(self):
        """
        Return the ``nCells × nodeCount`` matrix ``D`` with
        ``(D·a)_c = a_c - a_(c-1)``, the boundary nodes being zero.
        Cell ``c`` lies between the interior nodes ``c - 1`` and ``c``.
        """
        n = self.nodeCount
        main = sp.eye(self._nCells, n, k=0)
        lower = sp.eye(self._nCells, n, k=-1)
        return sp.csr_matrix(main - lower)

    def nodeAverage(self, cellValues):
        """
        Return ``h · (v_c + v_(c+1)) / 2`` for every interior node,
        the lumped integral of a cell quantity around the node.
        """
        h = self.cellSize
        return 0.5 * h * (cellValues[:-1] + cellValues[1:])

    def massMatrix(self):
        return sp.diags(self.nodeAverage(self._sigmaProfile), format="csr")

    def sourceDistribution(self):
        return self.nodeAverage(self._windingProfile)

    def sourceWaveform(self, t):
        return self._sourceAmplitude * math.sin(2.0 * math.pi * self._sourceFrequency * t)


# ------
# System
# ------

class RodSystem(MBaseObject, BaseDaeSystem):

    """
    The semi-discrete rod

        M da/dt + K(a) a = f(t)

    with ``M`` the lumped conductivity mass, zero on the nodes
    inside non-conducting regions, ``K(a) = Dᵀ diag(ν(b²)/h) D``
    with the cell flux densities ``b = D·a / h`` and ``f`` the
    winding current.
    """

    modelName = "rod"

    def _init(self, model, timeSpan=(0.0, 0.2)):
        if not isinstance(model, RodModel):
            raise TypeError("Model must be a RodModel, not %s."
                            % type(model).__name__)
        super(RodSystem, self)._init(timeSpan=timeSpan)
        self._model = model
        self._difference = model.differenceMatrix()
        self._differenceT = sp.csr_matrix(self._difference.T)
        self._massMatrix = model.massMatrix()
        self._distribution = model.sourceDistribution()
        if not model.isNonlinear:
            self._stiffnessMatrix = self._assemble(np.full(model.nCells, model.nuLinear))

    def _reprContents(self):
        contents = super(RodSystem, self)._reprContents()
        contents.append("cells=%d" % self._model.nCells)
        return contents

    model = dynamicProperty("model", "The :class:`RodModel`.")

    def _get_model(self):
        return self._model

    def _get_name(self):
        if self._model.isNonlinear:
            return "rod_nonlinear"
        return "rod"

    def _get_isLinear(self):
        return not self._model.isNonlinear

    def _assemble(self, cellCoefficients):
        h = self._model.cellSize
        return sp.csr_matrix(
            self._differenceT @ sp.diags(cellCoefficients / h) @ self._difference
        )

    def fluxDensity(self, values):
        """
        Return the flux density ``b`` of every cell.
        """
        return (self._difference @ values) / self._model.cellSize

    def reluctivity(self, values):
        """
        Return ``ν`` of every cell.
        """
        curve = self._model.nuNonlinear
        if curve is None:
            return np.full(self._model.nCells, self._model.nuLinear)
        b = self.fluxDensity(values)
        return curve(b * b)

    def _stiffness(self, values):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix
        return self._assemble(self.reluctivity(values))

    def _stiffnessAction(self, values):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix @ values
        b = self.fluxDensity(values)
        return self._differenceT @ (self._model.nuNonlinear(b * b) * b)

    def _stiffnessJacobian(self, values):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix
        curve = self._model.nuNonlinear
        b = self.fluxDensity(values)
        bSquared = b * b
        return self._assemble(curve(bSquared) + 2.0 * curve.derivative(bSquared) * bSquared)

    def _stiffnessJacobianAction(self, values, direction):
        if self._stiffnessMatrix is not None:
            return self._stiffnessMatrix @ direction
        curve = self._model.nuNonlinear
        b = self.fluxDensity(values)
        bSquared = b * b
        db = self.fluxDensity(direction)
        return self._differenceT @ ((curve(bSquared) + 2.0 * curve.derivative(bSquared) * bSquared) * db)

    def _source(self, t):
        return self._distribution * self._model.sourceWaveform(t)

    def energy(self, u):
        """
        Return the magnetic energy ``½ aᵀ K a`` of a linear rod
        state.
        """
        values = self._conformValues(u)
        return 0.5 * float(values @ (self.stiffness(values) @ values))


def buildRod(model=None, tEnd=0.2, **parameters):
    """
    Build a :class:`RodSystem` on ``[0, tEnd]``. Without **model**
    the standard rod of :meth:`RodModel.default` is made from
    **parameters**.

        >>> system = buildRod(nCells=51, tEnd=0.02)
        >>> system.dimension
        50
    """
    if model is None:
        model = RodModel.default(**parameters)
    elif parameters:
        raise ConfigurationError("Parameters %s cannot be combined with a model."
                                 % ", ".join(sorted(parameters)))
    return RodSystem(model, timeSpan=(0.0, tEnd))


def buildNonlinearRod(tEnd=0.2, **parameters):
    parameters["nonlinear"] = True
    return buildRod(tEnd=tEnd, **parameters)
