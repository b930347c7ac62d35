import pytest

from darwinsim.core import kernel


@pytest.fixture(params=sorted(kernel.implementations()))
def impl(request):
    """Every available kernel implementation."""
    return kernel.implementations()[request.param]
