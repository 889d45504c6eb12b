import pytest
from daeParareal.models.test import modelsObjectGenerator


@pytest.fixture(autouse=True)
def objectGenerator(request):
    # the suite is normally started by testEnvironment, which sets this
    if request.instance is not None and not hasattr(request.instance, "objectGenerator"):
        request.instance.objectGenerator = modelsObjectGenerator
