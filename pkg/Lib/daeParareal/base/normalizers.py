# -*- coding: utf8 -*-

import math
import numbers
import numpy as np
import scipy.sparse as sp
from daeParareal.base.errors import DimensionError

# -------
# Numbers
# -------


def normalizeCount(value, name="Count", minimum=0):
    """
    Normalizes a count.

    * **value** must be an ``int``, ``bool`` is not accepted.
    * **value** must be at least **minimum**.
    * Returned value will be an ``int``.
    """
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError("%s must be an int, not %s."
                        % (name, type(value).__name__))
    if value < minimum:
        raise ValueError("%s must be at least %d, not %d."
                         % (name, minimum, value))
    return int(value)


def normalizeReal(value, name="Value"):
    """
    Normalizes a real number.

    * **value** must be an ``int`` or a ``float``.
    * **value** must be finite.
    * Returned value will be a ``float``.
    """
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError("%s must be an int or a float, not %s."
                        % (name, type(value).__name__))
    value = float(value)
    if not math.isfinite(value):
        raise ValueError("%s must be finite, not %r." % (name, value))
    return value


def normalizePositive(value, name="Value"):
    """
    Normalizes a strictly positive real number.

    * **value** must normalize with :func:`normalizeReal`.
    * **value** must be greater than zero.
    * Returned value will be a ``float``.
    """
    value = normalizeReal(value, name)
    if value <= 0:
        raise ValueError("%s must be greater than zero, not %r."
                         % (name, value))
    return value


def normalizeNonNegative(value, name="Value"):
    """
    Normalizes a real number that may be zero.

    * **value** must normalize with :func:`normalizeReal`.
    * **value** must not be negative.
    * Returned value will be a ``float``.
    """
    value = normalizeReal(value, name)
    if value < 0:
        raise ValueError("%s must not be negative, not %r."
                         % (name, value))
    return value


# ----
# Time
# ----


def normalizeTime(value):
    """
    Normalizes a point in time (seconds).

    * **value** must normalize with :func:`normalizeReal`.
    * Returned value will be a ``float``.
    """
    return normalizeReal(value, "Time")


def normalizeTimeStep(value):
    """
    Normalizes a time step size (seconds).

    * **value** must be an :ref:`type-int-float` greater than zero.
    * Returned value will be a ``float``.
    """
    return normalizePositive(value, "Time step")


def normalizeTolerance(value):
    """
    Normalizes a tolerance.

    * **value** must be an :ref:`type-int-float` greater than zero.
    * Returned value will be a ``float``.
    """
    return normalizePositive(value, "Tolerance")


def normalizeTimeSpan(value):
    """
    Normalizes a time span.

    * **value** must be a ``tuple`` or ``list``.
    * **value** must contain two times.
    * The second time must be greater than the first.
    * Returned value will be a ``tuple`` of two ``float``.
    """
    if not isinstance(value, (tuple, list)):
        raise TypeError("Time span must be a tuple, not %s."
                        % type(value).__name__)
    if len(value) != 2:
        raise ValueError("Time span must contain two times, not %d."
                         % len(value))
    t0, tEnd = [normalizeTime(v) for v in value]
    if tEnd <= t0:
        raise ValueError("Time span end (%r) must be greater than its "
                         "start (%r)." % (tEnd, t0))
    return (t0, tEnd)


def normalizeBoundaries(value):
    """
    Normalizes window boundaries.

    * **value** must be a ``tuple``, ``list`` or 1-D array.
    * **value** must contain at least two times.
    * **value** must be strictly increasing.
    * Returned value will be a ``tuple`` of ``float``.
    """
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if not isinstance(value, (tuple, list)):
        raise TypeError("Window boundaries must be a list, not %s."
                        % type(value).__name__)
    if len(value) < 2:
        raise ValueError("Window boundaries must contain at least two "
                         "times, not %d." % len(value))
    value = tuple(normalizeTime(v) for v in value)
    for previous, current in zip(value[:-1], value[1:]):
        if current <= previous:
            raise ValueError("Window boundaries must be strictly "
                             "increasing: %r follows %r." % (current, previous))
    return value


# ------------------
# Vectors & Matrices
# ------------------


def normalizeVector(value, length=None):
    """
    Normalizes a vector.

    * **value** must be a sequence of :ref:`type-int-float` or
      a 1-D ``numpy.ndarray``.
    * All entries must be finite.
    * If **length** is given, **value** must have that many entries.
    * Returned value will be a new 1-D ``float64`` array.
    """
    if isinstance(value, (str, bytes)) or not hasattr(value, "__len__"):
        raise TypeError("Vector must be a sequence of numbers, not %s."
                        % type(value).__name__)
    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise TypeError("Vector entries must be numbers.")
    if array.ndim != 1:
        raise ValueError("Vector must be one dimensional, not %d "
                         "dimensional." % array.ndim)
    if length is not None and array.shape[0] != length:
        raise DimensionError("Vector must have %d entries, not %d."
                             % (length, array.shape[0]))
    if not np.all(np.isfinite(array)):
        raise ValueError("Vector entries must be finite.")
    return array


def normalizeMatrix(value):
    """
    Normalizes a matrix.

    * **value** must be a 2-D ``numpy.ndarray``, a nested list
      or a ``scipy.sparse`` matrix.
    * **value** must have at least one row and one column.
    * All stored entries must be finite.
    * Returned value will be a ``scipy.sparse.csr_matrix``
      of ``float64`` entries.
    """
    if sp.issparse(value):
        matrix = sp.csr_matrix(value, dtype=np.float64, copy=True)
    else:
        if isinstance(value, (str, bytes)) or not hasattr(value, "__len__"):
            raise TypeError("Matrix must be an array or a sparse matrix, "
                            "not %s." % type(value).__name__)
        try:
            array = np.array(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise TypeError("Matrix entries must be numbers.")
        if array.ndim != 2:
            raise ValueError("Matrix must be two dimensional, not %d "
                             "dimensional." % array.ndim)
        matrix = sp.csr_matrix(array)
    rows, cols = matrix.shape
    if rows < 1 or cols < 1:
        raise ValueError("Matrix must have at least one row and one "
                         "column, not %dx%d." % (rows, cols))
    if not np.all(np.isfinite(matrix.data)):
        raise ValueError("Matrix entries must be finite.")
    return matrix


# -----
# Modes
# -----

NORM_MODES = ("differential", "full", "mass")
UPDATE_MODES = ("projected_consistent", "plain")
POOL_METHODS = ("serial", "thread", "process")


def _normalizeChoice(value, choices, name):
    if not isinstance(value, str):
        raise TypeError("%s must be a string, not %s."
                        % (name, type(value).__name__))
    value = value.strip().lower().replace("-", "_")
    if value not in choices:
        raise ValueError("%s must be one of %s, not %r."
                         % (name, ", ".join(choices), value))
    return value


def normalizeNormMode(value):
    """
    Normalizes a norm mode.

    * **value** must be one of ``"differential"``, ``"full"``
      or ``"mass"``. Hyphens are read as underscores.
    * Returned value will be a ``str``.
    """
    return _normalizeChoice(value, NORM_MODES, "Norm mode")


def normalizeUpdateMode(value):
    """
    Normalizes an update mode.

    * **value** must be ``"projected_consistent"`` or ``"plain"``.
    * Returned value will be a ``str``.
    """
    return _normalizeChoice(value, UPDATE_MODES, "Update mode")


def normalizePoolMethod(value):
    """
    Normalizes a worker pool method.

    * **value** must be ``"serial"``, ``"thread"`` or ``"process"``.
    * Returned value will be a ``str``.
    """
    return _normalizeChoice(value, POOL_METHODS, "Pool method")


def normalizeLabel(value):
    """
    Normalizes a propagator label.

    * **value** must be a :ref:`type-string`.
    * **value** must be at least one character long.
    * Returned value will be a ``str``.
    """
    if not isinstance(value, str):
        raise TypeError("Label must be a string, not %s."
                        % type(value).__name__)
    if len(value) < 1:
        raise ValueError("Label must be at least one character long.")
    return value


# ------
# Models
# ------


def normalizeModelName(value, known):
    """
    Normalizes a model name.

    * **value** must be a :ref:`type-string`.
    * **value** must be one of **known**.
    * Returned value will be a ``str``.
    """
    if not isinstance(value, str):
        raise TypeError("Model name must be a string, not %s."
                        % type(value).__name__)
    if value not in known:
        raise ValueError("Unknown model %r. Known models: %s."
                         % (value, ", ".join(sorted(known))))
    return value


def normalizeOverrideKey(value):
    """
    Normalizes a model override key.

    * **value** must be a :ref:`type-string`.
    * **value** must be a Python identifier; hyphens
      are read as underscores.
    * Returned value will be a ``str``.
    """
    if not isinstance(value, str):
        raise TypeError("Override key must be a string, not %s."
                        % type(value).__name__)
    value = value.strip().replace("-", "_")
    if not value.isidentifier():
        raise ValueError("Override key must be an identifier, not %r."
                         % value)
    return value


def normalizeOverrideValue(value):
    """
    Normalizes a model override value.

    * **value** must be an ``int``, ``float``, ``bool``,
      ``tuple``/``list`` of numbers or a :ref:`type-string`.
    * Strings holding numbers, booleans or comma separated
      numbers are converted.
    * Returned value will be an ``int``, ``float``, ``bool``,
      ``tuple`` or ``str``.
    """
    if isinstance(value, (bool, int, float)):
        return value
    if isinstance(value, (tuple, list)):
        return tuple(normalizeReal(v, "Override item") for v in value)
    if not isinstance(value, str):
        raise TypeError("Override value must be a number or a string, "
                        "not %s." % type(value).__name__)
    text = value.strip()
    if text.lower() in ("true", "yes", "on"):
        return True
    if text.lower() in ("false", "no", "off"):
        return False
    if "," in text:
        try:
            return tuple(float(item) for item in text.split(",") if item.strip())
        except ValueError:
            return text
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text
