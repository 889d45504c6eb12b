# -------------------
# Universal Exception
# -------------------


class DaeParaError(Exception):
    pass


# ---------------
# Linear Algebra
# ---------------

class DimensionError(DaeParaError, ValueError):
    pass


class SingularMatrixError(DaeParaError):

    def __init__(self, message, pivot=None, threshold=None):
        super(SingularMatrixError, self).__init__(message)
        self.pivot = pivot
        self.threshold = threshold


class StructureError(DaeParaError):
    pass


# -------
# Systems
# -------

class ConsistencyError(DaeParaError):
    pass


class ConvergenceError(DaeParaError):

    def __init__(self, message, iterations=None, residual=None):
        super(ConvergenceError, self).__init__(message)
        self.iterations = iterations
        self.residual = residual


class PropagationError(DaeParaError):

    """
    A failure inside a propagator. **step**, **window** and
    **iteration** locate the failure; unknown locations are ``None``.
    """

    def __init__(self, message, step=None, window=None, iteration=None):
        self.message = message
        self.step = step
        self.window = window
        self.iteration = iteration
        super(PropagationError, self).__init__(self._format())

    def __reduce__(self):
        return (PropagationError, (self.message, self.step, self.window, self.iteration))

    def _format(self):
        where = []
        if self.iteration is not None:
            where.append("iteration %d" % self.iteration)
        if self.window is not None:
            where.append("window %d" % self.window)
        if self.step is not None:
            where.append("step %d" % self.step)
        if not where:
            return self.message
        return "%s (%s)" % (self.message, ", ".join(where))

    def locate(self, window=None, iteration=None):
        """
        Return a copy of the error annotated with **window**
        and **iteration**. Known locations are kept.
        """
        if window is None:
            window = self.window
        if iteration is None:
            iteration = self.iteration
        return PropagationError(self.message, step=self.step, window=window, iteration=iteration)


# -------------
# Configuration
# -------------

class ConfigurationError(DaeParaError, ValueError):
    pass
