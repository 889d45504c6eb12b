import numpy as np
from daeParareal.base import normalizers


class MBaseObject(object):

    """
    Storage shared by the built-in systems: the time span and
    the assembled mass and (linear) stiffness matrices.
    """

    modelName = None

    def _init(self, timeSpan=(0.0, 1.0)):
        self._timeSpan = normalizers.normalizeTimeSpan(timeSpan)
        self._massMatrix = None
        self._stiffnessMatrix = None

    def _get_name(self):
        return self.modelName

    def _get_timeSpan(self):
        return self._timeSpan

    def _get_dimension(self):
        return self._massMatrix.shape[0]

    def _get_mass(self):
        return self._massMatrix

    def _stiffness(self, values):
        return self._stiffnessMatrix

    def _source(self, t):
        return np.zeros(self._massMatrix.shape[0])
