import math
import numpy as np
import scipy.sparse as sp
from daeParareal.base import normalizers, BaseDaeSystem
from daeParareal.models.base import MBaseObject


class AnalyticSystem(MBaseObject, BaseDaeSystem):

    """
    The smallest index-1 system: ``M = diag(1, 0)``,
    ``K = [[2, -1], [-1, 2]]`` and ``f = 0``. The constraint
    gives ``u2 = u1 / 2`` and then ``u1' = -1.5 u1``.
    """

    modelName = "analytic2x2"

    def _init(self, timeSpan=(0.0, 1.0), initialValues=(1.0, 0.5)):
        super(AnalyticSystem, self)._init(timeSpan=timeSpan)
        self._initial = normalizers.normalizeVector(initialValues, length=2)
        self._massMatrix = sp.diags([1.0, 0.0], format="csr")
        self._stiffnessMatrix = sp.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))

    def _initialValues(self):
        return self._initial

    def _referenceSolution(self, t, u0):
        u1 = u0.values[0] * math.exp(-1.5 * (t - u0.time))
        return [u1, 0.5 * u1]


class ScalarSystem(MBaseObject, BaseDaeSystem):

    """
    The test equation ``u' = -λ u`` with ``M = 1`` and ``K = λ``.
    """

    modelName = "scalar"

    def _init(self, timeSpan=(0.0, 1.0), rate=2.0, initialValue=1.0):
        super(ScalarSystem, self)._init(timeSpan=timeSpan)
        self._rate = normalizers.normalizePositive(rate, "Rate")
        self._initial = np.array([normalizers.normalizeReal(initialValue, "Initial value")])
        self._massMatrix = sp.identity(1, format="csr")
        self._stiffnessMatrix = sp.csr_matrix([[self._rate]])

    def _initialValues(self):
        return self._initial

    def _referenceSolution(self, t, u0):
        return [u0.values[0] * math.exp(-self._rate * (t - u0.time))]


def buildAnalytic2x2(tEnd=1.0, u1=1.0, u2=0.5):
    """
    Build the :class:`AnalyticSystem` on ``[0, tEnd]`` with
    default initial value ``(u1, u2)``.

        >>> system = buildAnalytic2x2()
        >>> system.referenceSolution(1.0, system.initialState()).values
        array([0.22313016, 0.11156508])
    """
    return AnalyticSystem(timeSpan=(0.0, tEnd), initialValues=(u1, u2))


def buildScalar(tEnd=1.0, rate=2.0, u0=1.0):
    return ScalarSystem(timeSpan=(0.0, tEnd), rate=rate, initialValue=u0)
