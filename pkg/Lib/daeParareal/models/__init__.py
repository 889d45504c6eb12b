from daeParareal.base.errors import DaeParaError
from daeParareal.models.analytic import (
    AnalyticSystem, ScalarSystem, buildAnalytic2x2, buildScalar
)
from daeParareal.models.rod import (
    RationalSaturationCurve, RodModel, RodSystem, buildRod, buildNonlinearRod
)
from daeParareal.models.coupled import CoupledToyModel, CoupledSystem, buildCoupled
