from daeParareal.test import testEnvironment
from daeParareal.world import NewSystem

# The suite runs on small versions of the built-in
# systems unless a test asks for something else.

testDefaults = dict(
    rod=dict(nCells=21, tEnd=0.02),
    rod_nonlinear=dict(nCells=21, tEnd=0.02, sourceAmplitude=2e4),
    coupled=dict(nCells=21, tEnd=0.02),
)


def modelsObjectGenerator(name, **overrides):
    parameters = dict(testDefaults.get(name, {}))
    parameters.update(overrides)
    return NewSystem(name, **parameters)


if __name__ == "__main__":
    import sys
    if {"-v", "--verbose"}.intersection(sys.argv):
        verbosity = 2
    else:
        verbosity = 1
    testEnvironment(modelsObjectGenerator, verbosity=verbosity)
