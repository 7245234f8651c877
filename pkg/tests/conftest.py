import pytest

from nv_deer_sim.spin.hamiltonians import FieldConfig
from nv_deer_sim.utils.logging import set_verbosity


@pytest.fixture(autouse=True)
def _normal_verbosity():
    set_verbosity(1)
    yield
    set_verbosity(1)


@pytest.fixture
def field_111():
    """78.6 G along [111], the calibrated working point."""
    return FieldConfig(78.6, (1.0, 1.0, 1.0))
