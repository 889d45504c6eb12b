from daeParareal.base.errors import (
    DaeParaError, DimensionError, SingularMatrixError, StructureError,
    ConsistencyError, ConvergenceError, PropagationError, ConfigurationError
)
from daeParareal.base.linalg import ProjectorPair, solveLinear, buildProjectors
from daeParareal.base.system import BaseDaeSystem, StateVector
from daeParareal.base.stepper import PropagatorConfig, ImplicitEulerPropagator
from daeParareal.base.workers import WorkerPool
from daeParareal.base.parareal import (
    WindowGrid, PararealConfig, PararealState, RunReport
)
