import numpy as np
import pytest

from spectral_mra import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def zero_mean(rng, N):
    x = rng.standard_normal(N)
    return x - x.mean()


BACKENDS = [pytest.param(kernels.python_backend, id="python")]
if kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(kernels.compiled_backend, id="compiled"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param
