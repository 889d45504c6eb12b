import unittest
import numpy as np
import scipy.sparse as sp
from daeParareal.base import linalg
from daeParareal.base.errors import (
    DimensionError, SingularMatrixError, StructureError
)
from daeParareal.base.linalg import (
    LinearSolver, ProjectorPair, buildProjectors, solveLinear
)


class TestSolveLinear(unittest.TestCase):

    def test_solve_identity(self):
        x = solveLinear(np.eye(3), [1.0, 2.0, 3.0])
        np.testing.assert_allclose(x, [1.0, 2.0, 3.0], rtol=0, atol=1e-14)

    def test_solve_diagonal(self):
        x = solveLinear([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0])
        np.testing.assert_allclose(x, [1.0, 2.0], rtol=0, atol=1e-14)

    def test_solve_symmetric(self):
        x = solveLinear([[2.0, -1.0], [-1.0, 2.0]], [1.0, 0.0])
        np.testing.assert_allclose(x, [2.0 / 3.0, 1.0 / 3.0], rtol=0, atol=1e-14)

    def test_solve_sparse(self):
        a = sp.diags([[-1.0] * 9, [2.0] * 10, [-1.0] * 9], [-1, 0, 1], format="csr")
        b = np.ones(10)
        x = solveLinear(a, b)
        self.assertLessEqual(np.linalg.norm(a @ x - b) / np.linalg.norm(b), 1e-10)

    def test_solve_random(self):
        rng = np.random.default_rng(7)
        for n in (5, 50, 500):
            a = rng.standard_normal((n, n)) + n * np.eye(n)
            b = rng.standard_normal(n)
            x = solveLinear(a, b)
            residual = np.linalg.norm(linalg.matrixVector(a, x) - b) / np.linalg.norm(b)
            self.assertLessEqual(residual, 1e-10)

    def test_solve_singular(self):
        with self.assertRaises(SingularMatrixError):
            solveLinear([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])

    def test_solve_zero(self):
        with self.assertRaises(SingularMatrixError):
            solveLinear([[0.0, 0.0], [0.0, 0.0]], [1.0, 2.0])

    def test_solve_nearlySingular(self):
        with self.assertRaises(SingularMatrixError) as context:
            solveLinear([[1.0, 0.0], [0.0, 1e-16]], [1.0, 1.0])
        self.assertLess(context.exception.pivot, context.exception.threshold)

    def test_solve_notSquare(self):
        with self.assertRaises(DimensionError):
            solveLinear([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [1.0, 1.0])

    def test_solve_wrongRightHandSide(self):
        with self.assertRaises(DimensionError):
            solveLinear(np.eye(2), [1.0, 2.0, 3.0])

    def test_solver_reuse(self):
        solver = LinearSolver(sp.csr_matrix([[4.0, 1.0], [1.0, 3.0]]))
        for b in ([1.0, 0.0], [0.0, 1.0]):
            x = solver.solve(b)
            np.testing.assert_allclose([4.0 * x[0] + x[1], x[0] + 3.0 * x[1]], b, atol=1e-14)


class TestTolerances(unittest.TestCase):

    def setUp(self):
        self._saved = dict(linalg.TOLERANCES)

    def tearDown(self):
        linalg.TOLERANCES.update(self._saved)

    def test_setTolerance(self):
        linalg.setTolerance("pivot", 1e-20)
        self.assertEqual(linalg.TOLERANCES["pivot"], 1e-20)
        x = solveLinear([[1.0, 0.0], [0.0, 1e-16]], [1.0, 1e-16])
        np.testing.assert_allclose(x, [1.0, 1.0])

    def test_tolerances(self):
        with linalg.tolerances(pivot=1e-20, projector=None) as values:
            self.assertEqual(values["pivot"], 1e-20)
            self.assertEqual(linalg.TOLERANCES["projector"], self._saved["projector"])
            x = solveLinear([[1.0, 0.0], [0.0, 1e-16]], [1.0, 1e-16])
            np.testing.assert_allclose(x, [1.0, 1.0])
        self.assertEqual(linalg.TOLERANCES, self._saved)

    def test_tolerances_restoredOnError(self):
        with self.assertRaises(ValueError):
            with linalg.tolerances(pivot=1e-20, newton=1e-8):
                pass
        self.assertEqual(linalg.TOLERANCES, self._saved)
        with self.assertRaises(RuntimeError):
            with linalg.tolerances(residual=1e-6):
                raise RuntimeError("failed run")
        self.assertEqual(linalg.TOLERANCES, self._saved)

    def test_setTolerance_unknown(self):
        with self.assertRaises(ValueError):
            linalg.setTolerance("newton", 1e-8)

    def test_setTolerance_invalid(self):
        with self.assertRaises(ValueError):
            linalg.setTolerance("pivot", -1.0)

    def test_isSymmetric(self):
        self.assertTrue(linalg.isSymmetric([[2.0, -1.0], [-1.0, 2.0]]))
        self.assertFalse(linalg.isSymmetric([[2.0, -1.0], [0.0, 2.0]]))
        self.assertFalse(linalg.isSymmetric([[2.0, -1.0, 0.0], [-1.0, 2.0, 0.0]]))


class TestProjectors(unittest.TestCase):

    def assertProjectorAlgebra(self, m, projectors):
        n = m.shape[0]
        p = projectors.p.toarray()
        q = projectors.q.toarray()
        dense = m.toarray() if sp.issparse(m) else np.asarray(m)
        scale = np.max(np.abs(dense))
        np.testing.assert_allclose(p @ p, p, rtol=0, atol=1e-12)
        np.testing.assert_allclose(q @ q, q, rtol=0, atol=1e-12)
        np.testing.assert_allclose(p @ q, np.zeros((n, n)), rtol=0, atol=1e-12)
        np.testing.assert_allclose(p + q, np.eye(n), rtol=0, atol=1e-12)
        np.testing.assert_allclose(dense @ q, np.zeros((n, n)), rtol=0, atol=1e-12 * scale)

    # --------
    # Examples
    # --------

    def test_diagonalSingular(self):
        projectors = buildProjectors(sp.diags([1.0, 0.0]))
        np.testing.assert_array_equal(projectors.p.toarray(), np.diag([1.0, 0.0]))
        np.testing.assert_array_equal(projectors.q.toarray(), np.diag([0.0, 1.0]))
        self.assertEqual(projectors.algebraicIndices, (1,))

    def test_identity(self):
        projectors = buildProjectors(np.eye(4))
        self.assertTrue(projectors.isOrdinary)
        np.testing.assert_array_equal(projectors.q.toarray(), np.zeros((4, 4)))

    def test_differentialIndices(self):
        m = sp.diags([3.0, 0.0, 5.0])
        projectors = buildProjectors(m)
        self.assertEqual(projectors.differentialIndices, (0, 2))
        np.testing.assert_array_equal(projectors.p.toarray(), np.diag([1.0, 0.0, 1.0]))
        self.assertProjectorAlgebra(m, projectors)

    def test_zeroMass(self):
        projectors = buildProjectors(np.zeros((3, 3)))
        self.assertEqual(projectors.differentialIndices, ())
        self.assertEqual(projectors.algebraicIndices, (0, 1, 2))

    def test_consistentMass(self):
        m = np.zeros((4, 4))
        m[np.ix_([0, 2], [0, 2])] = [[2.0, 1.0], [1.0, 2.0]]
        projectors = buildProjectors(m)
        self.assertEqual(projectors.differentialIndices, (0, 2))
        self.assertProjectorAlgebra(sp.csr_matrix(m), projectors)

    def test_splitting(self):
        projectors = buildProjectors(sp.diags([3.0, 0.0, 5.0]))
        v = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(projectors.differential(v), [1.0, 0.0, 3.0])
        np.testing.assert_array_equal(projectors.algebraic(v), [0.0, 2.0, 0.0])
        np.testing.assert_array_equal(projectors.differential(v) + projectors.algebraic(v), v)

    def test_maskReadOnly(self):
        projectors = ProjectorPair([True, False])
        with self.assertRaises(ValueError):
            projectors.mask[0] = False

    def test_reprContents(self):
        projectors = buildProjectors(sp.diags([1.0, 0.0]))
        value = projectors._reprContents()
        self.assertIsInstance(value, list)
        for i in value:
            self.assertIsInstance(i, str)

    # ------
    # Errors
    # ------

    def test_singularSupport(self):
        m = np.zeros((3, 3))
        m[np.ix_([0, 1], [0, 1])] = [[1.0, 1.0], [1.0, 1.0]]
        with self.assertRaises(StructureError):
            buildProjectors(m)

    def test_notSymmetric(self):
        with self.assertRaises(StructureError):
            buildProjectors([[1.0, 0.5], [0.0, 1.0]])

    def test_negativeLumped(self):
        with self.assertRaises(StructureError):
            buildProjectors(sp.diags([1.0, -2.0, 0.0]))

    def test_notSquare(self):
        with self.assertRaises(DimensionError):
            buildProjectors(np.ones((2, 3)))

    # ----------
    # Randomized
    # ----------

    def test_randomizedAdmissible(self):
        rng = np.random.default_rng(2024)
        for trial in range(50):
            n = int(rng.integers(2, 13))
            size = int(rng.integers(1, n + 1))
            support = np.sort(rng.choice(n, size=size, replace=False))
            b = rng.standard_normal((size, size))
            block = b @ b.T + size * np.eye(size)
            m = np.zeros((n, n))
            m[np.ix_(support, support)] = block
            projectors = buildProjectors(m)
            self.assertEqual(projectors.differentialIndices, tuple(int(i) for i in support))
            self.assertProjectorAlgebra(m, projectors)
