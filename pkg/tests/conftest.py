import numpy as np
import pytest

from frontlab import dispersion, kernels, reactions


@pytest.fixture(scope="session")
def cosine_kernel():
    return kernels.make_kernel("cosine_bump", 1.0, normalize=True)


@pytest.fixture(scope="session")
def indicator_kernel():
    return kernels.make_kernel("indicator", 1.0, normalize=True)


@pytest.fixture(scope="session")
def logistic():
    return reactions.builtin("logistic")


@pytest.fixture(scope="session")
def cosine_report(cosine_kernel):
    return dispersion.critical(cosine_kernel, 1.0)


@pytest.fixture(scope="session")
def indicator_report(indicator_kernel):
    return dispersion.critical(indicator_kernel, 1.0)


@pytest.fixture(scope="session")
def zfk_reaction():
    return reactions.builtin("zfk_piecewise_smoothed", eps=0.1, theta=0.3,
                             theta1=0.8, smoothing=0.05)


def bump_field(x_left, x_right, h, height=1.0, width=2.0, center=0.0,
               clamp_left=0.0, clamp_right=0.0):
    from frontlab.cauchy import Field
    n = int(round((x_right - x_left) / h)) + 1
    x = x_left + h * np.arange(n)
    z = (x - center) / width
    vals = np.where(np.abs(z) <= 1.0,
                    height * 0.5 * (1.0 + np.cos(np.pi * z)), 0.0)
    return Field(x0=x_left, h=h, values=vals,
                 clamp_left=clamp_left, clamp_right=clamp_right)


def step_field(x_left, x_right, h, upper=1.0, center=0.0):
    from frontlab.cauchy import Field
    n = int(round((x_right - x_left) / h)) + 1
    x = x_left + h * np.arange(n)
    vals = np.where(x <= center, upper, 0.0)
    return Field(x0=x_left, h=h, values=vals,
                 clamp_left=upper, clamp_right=0.0)
