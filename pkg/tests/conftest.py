import pytest

from aerosplat import _kernels


@pytest.fixture(params=_kernels.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    with _kernels.use_backend(request.param):
        yield request.param
