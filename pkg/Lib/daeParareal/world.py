from daeParareal.base import normalizers
from daeParareal.base.errors import ConfigurationError


def NewSystem(name, **overrides):
    """
    Create the built-in system registered as **name** with the
    model parameters **overrides**.

    ::

        from daeParareal.world import *

        system = NewSystem("analytic2x2")
        system = NewSystem("rod", nCells=51, tEnd=0.02)
    """
    name = normalizers.normalizeModelName(name, ModelNames())
    builder = dispatcher[name]
    try:
        return builder(**overrides)
    except TypeError as error:
        raise ConfigurationError("Invalid parameters for model %r: %s" % (name, error))


def ModelNames():
    """
    Return the names of the registered systems.
    """
    return dispatcher.names()


class _EnvironmentDispatcher(object):

    def __init__(self, registryItems):
        self._registry = {item: None for item in registryItems}

    def __setitem__(self, name, func):
        self._registry[name] = func

    def __getitem__(self, name):
        func = self._registry[name]
        if func is None:
            raise NotImplementedError
        return func

    def names(self):
        return tuple(sorted(name for name, func in self._registry.items() if func is not None))


dispatcher = _EnvironmentDispatcher([
    "analytic2x2",
    "scalar",
    "rod",
    "rod_nonlinear",
    "coupled",
])

# ------
# models
# ------

from daeParareal import models  # noqa: E402

dispatcher["analytic2x2"] = models.buildAnalytic2x2
dispatcher["scalar"] = models.buildScalar
dispatcher["rod"] = models.buildRod
dispatcher["rod_nonlinear"] = models.buildNonlinearRod
dispatcher["coupled"] = models.buildCoupled
