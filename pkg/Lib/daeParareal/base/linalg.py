import logging
from contextlib import contextmanager
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from daeParareal.base import normalizers
from daeParareal.base.base import BaseObject, dynamicProperty
from daeParareal.base.errors import (
    DimensionError, SingularMatrixError, StructureError
)

logger = logging.getLogger(__name__)


# ----------
# Tolerances
# ----------

TOLERANCES = {
    "projector": 1e-12,
    "residual": 1e-10,
    "pivot": 1e-14,
}


def setTolerance(name, value):
    """
    Override one of the module level tolerances.

        >>> setTolerance("pivot", 1e-13)

    **name** must be one of ``"projector"``, ``"residual"``
    or ``"pivot"``. **value** must be greater than zero.
    """
    if name not in TOLERANCES:
        raise ValueError("Unknown tolerance %r. Known tolerances: %s."
                         % (name, ", ".join(sorted(TOLERANCES))))
    TOLERANCES[name] = normalizers.normalizeTolerance(value)


@contextmanager
def tolerances(**values):
    """
    Set the given module level tolerances for the duration of a
    ``with`` block and restore the previous values on exit.

        >>> with tolerances(pivot=1e-12):
        ...     solveLinear(a, b)

    Keywords set to ``None`` are left alone.
    """
    saved = dict(TOLERANCES)
    try:
        for name, value in values.items():
            if value is not None:
                setTolerance(name, value)
        yield dict(TOLERANCES)
    finally:
        TOLERANCES.clear()
        TOLERANCES.update(saved)


def getTolerance(name, value=None):
    if value is not None:
        return normalizers.normalizeTolerance(value)
    return TOLERANCES[name]


# --------
# Matrices
# --------

def maxAbs(matrix):
    if sp.issparse(matrix):
        if matrix.nnz == 0:
            return 0.0
        return float(np.max(np.abs(matrix.data)))
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix)))


def isSymmetric(matrix, tolerance=None):
    """
    Return ``True`` when |a_ij - a_ji| <= tolerance * max|a|
    for all entries of the square **matrix**.
    """
    matrix = normalizers.normalizeMatrix(matrix)
    tolerance = getTolerance("projector", tolerance)
    rows, cols = matrix.shape
    if rows != cols:
        return False
    difference = matrix - matrix.T
    return maxAbs(difference) <= tolerance * maxAbs(matrix)


def matrixVector(matrix, vector):
    """
    Return the product of **matrix** and **vector**.
    """
    matrix = normalizers.normalizeMatrix(matrix)
    vector = normalizers.normalizeVector(vector, length=matrix.shape[1])
    return matrix @ vector


class LinearSolver(object):

    """
    A sparse LU factorization of a square matrix. The
    factorization is immutable once built, so one solver
    may be shared by concurrent callers.

        >>> solver = LinearSolver(a)
        >>> x = solver.solve(b)
    """

    def __init__(self, matrix, pivotTolerance=None):
        if not sp.issparse(matrix):
            matrix = normalizers.normalizeMatrix(matrix)
        rows, cols = matrix.shape
        if rows != cols:
            raise DimensionError("Matrix must be square, not %dx%d."
                                 % (rows, cols))
        self.size = rows
        scale = maxAbs(matrix)
        threshold = getTolerance("pivot", pivotTolerance) * scale
        if scale == 0.0:
            raise SingularMatrixError("Matrix is zero.", pivot=0.0,
                                      threshold=threshold)
        try:
            self._lu = splu(sp.csc_matrix(matrix))
        except RuntimeError as error:
            raise SingularMatrixError("Matrix is exactly singular: %s" % error,
                                      pivot=0.0, threshold=threshold)
        pivot = float(np.min(np.abs(self._lu.U.diagonal())))
        if pivot < threshold:
            raise SingularMatrixError(
                "Matrix is singular: pivot %.3e is below %.3e."
                % (pivot, threshold),
                pivot=pivot, threshold=threshold
            )

    def solve(self, rhs):
        return self._lu.solve(np.asarray(rhs, dtype=np.float64))


def solveLinear(a, b, pivotTolerance=None):
    """
    Solve ``a x = b`` and return ``x``.

    **a** must normalize with :func:`normalizers.normalizeMatrix`
    and be square. **b** must have ``a.rows`` entries.

    Raises :class:`SingularMatrixError` when the factorization
    finds a pivot below ``pivot tolerance * max|a|``.
    """
    a = normalizers.normalizeMatrix(a)
    b = normalizers.normalizeVector(b, length=a.shape[0])
    solver = LinearSolver(a, pivotTolerance=pivotTolerance)
    x = solver.solve(b)
    residual = np.linalg.norm(a @ x - b) / max(np.linalg.norm(b), np.finfo(float).eps)
    if residual > TOLERANCES["residual"]:
        logger.warning("Linear solve relative residual %.3e exceeds %.3e.",
                       residual, TOLERANCES["residual"])
    return x


# ----------
# Projectors
# ----------

class ProjectorPair(BaseObject):

    """
    The projectors ``P = M⁺M`` onto the differential components
    and ``Q = I - P`` onto the algebraic components of a system
    with mass matrix ``M``. Build one with :func:`buildProjectors`.

        >>> projectors = buildProjectors(mass)
        >>> projectors.differential(u)
    """

    copyAttributes = ("_mask",)

    def _init(self, mask):
        mask = np.asarray(mask, dtype=bool).copy()
        mask.setflags(write=False)
        self._mask = mask

    def _reprContents(self):
        return [
            "dimension=%d" % self.dimension,
            "differential=%d" % len(self.differentialIndices)
        ]

    dimension = dynamicProperty("dimension", "The number of components.")

    def _get_dimension(self):
        return self._mask.shape[0]

    mask = dynamicProperty(
        "mask",
        "A read only ``bool`` array, ``True`` on differential components."
    )

    def _get_mask(self):
        return self._mask

    differentialIndices = dynamicProperty(
        "differentialIndices",
        "The ordered row indices where the mass matrix acts nontrivially."
    )

    def _get_differentialIndices(self):
        return tuple(int(i) for i in np.flatnonzero(self._mask))

    algebraicIndices = dynamicProperty(
        "algebraicIndices",
        "The ordered row indices of the algebraic components."
    )

    def _get_algebraicIndices(self):
        return tuple(int(i) for i in np.flatnonzero(~self._mask))

    p = dynamicProperty("p", "The projector onto the differential components.")

    def _get_p(self):
        return sp.diags(self._mask.astype(np.float64), format="csr")

    q = dynamicProperty("q", "The projector onto the algebraic components.")

    def _get_q(self):
        return sp.diags((~self._mask).astype(np.float64), format="csr")

    isOrdinary = dynamicProperty(
        "isOrdinary",
        "``True`` when there are no algebraic components."
    )

    def _get_isOrdinary(self):
        return bool(np.all(self._mask))

    def differential(self, vector):
        """
        Return ``P·vector``.
        """
        return np.where(self._mask, vector, 0.0)

    def algebraic(self, vector):
        """
        Return ``Q·vector``.
        """
        return np.where(self._mask, 0.0, vector)


def buildProjectors(m, pivotTolerance=None):
    """
    Build the :class:`ProjectorPair` of the mass matrix **m**.

    **m** must be square and vanish outside its support (the rows
    and columns holding a nonzero entry). On the support it must
    be symmetric positive definite, in which case ``M⁺`` is the
    inverse of the restriction padded with zeros and ``P = M⁺M``
    is the identity on the support.

        >>> projectors = buildProjectors(sp.diags([3.0, 0.0, 5.0]))
        >>> projectors.differentialIndices
        (0, 2)

    Raises :class:`StructureError` when the restriction is
    singular or not symmetric.
    """
    m = normalizers.normalizeMatrix(m)
    rows, cols = m.shape
    if rows != cols:
        raise DimensionError("Mass matrix must be square, not %dx%d."
                             % (rows, cols))
    m.eliminate_zeros()
    magnitude = abs(m)
    rowSupport = np.asarray(magnitude.sum(axis=1)).ravel() > 0
    colSupport = np.asarray(magnitude.sum(axis=0)).ravel() > 0
    mask = rowSupport | colSupport
    support = np.flatnonzero(mask)
    if support.size == 0:
        return ProjectorPair(mask)
    scale = maxAbs(m)
    if not isSymmetric(m):
        raise StructureError("Mass matrix is not symmetric.")
    offDiagonal = m - sp.diags(m.diagonal())
    offDiagonal.eliminate_zeros()
    if offDiagonal.nnz == 0:
        # lumped mass
        diagonal = m.diagonal()[support]
        threshold = getTolerance("pivot", pivotTolerance) * scale
        if np.any(diagonal <= threshold):
            raise StructureError("Lumped mass matrix is singular or "
                                 "indefinite on its support.")
    else:
        block = m[support][:, support]
        try:
            LinearSolver(block, pivotTolerance=pivotTolerance)
        except SingularMatrixError as error:
            raise StructureError("Mass matrix restricted to its support is "
                                 "singular: %s" % error)
    return ProjectorPair(mask)
