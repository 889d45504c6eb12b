import sys
import unittest
from daeParareal.test import test_normalizers
from daeParareal.test import test_linalg
from daeParareal.test import test_system
from daeParareal.test import test_stepper
from daeParareal.test import test_workers
from daeParareal.test import test_parareal
from daeParareal.test import test_models
from daeParareal.test import test_world
from daeParareal.test import test_cli


def testEnvironment(objectGenerator, verbosity=1, testNormalizers=True):
    """
    Run the suite against the systems created by **objectGenerator**,
    a callable ``(name, **overrides) -> system``.
    """
    modules = [
        test_linalg,
        test_system,
        test_stepper,
        test_workers,
        test_parareal,
        test_models,
        test_world,
        test_cli
    ]
    if testNormalizers:
        modules.insert(0, test_normalizers)

    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    for module in modules:
        moduleSuite = loader.loadTestsFromModule(module)
        _attachObjectGenerator(moduleSuite, objectGenerator)
        suite.addTest(moduleSuite)
    result = unittest.TextTestRunner(verbosity=verbosity).run(suite)
    sys.exit(not result.wasSuccessful())


def _attachObjectGenerator(suite, objectGenerator):
    for test in suite:
        if isinstance(test, unittest.TestSuite):
            _attachObjectGenerator(test, objectGenerator)
        else:
            test.objectGenerator = objectGenerator
