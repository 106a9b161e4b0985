import numpy as np
import pytest

from doppler_cazac import FULL_PRESET, SensingRequirements
from doppler_cazac.utils import log

log.set_level("warning")


def make_requirements(n_max: float, v_n: float, N: int, pr_db: float = 20.0) -> SensingRequirements:
    """Requirements whose RoI bound is n_max lags and whose v̄·N equals v_n."""
    c, T_s, f_c = 3e8, 1e-9, 1e11
    return SensingRequirements.from_db(
        f_c=f_c,
        T_s=T_s,
        D_r=n_max * c * T_s / 2.0,
        u_max=(v_n / N) * c / (2.0 * f_c * T_s),
        pr_db=pr_db,
        c=c,
    )


@pytest.fixture
def full_req():
    """f_c=240 GHz, T_s=0.2 ns, D_r=50 m, u_max=20 m/s, P_r=20 dB."""
    return SensingRequirements.from_db(
        FULL_PRESET["f_c"],
        FULL_PRESET["T_s"],
        FULL_PRESET["D_r"],
        FULL_PRESET["u_max"],
        FULL_PRESET["P_r_db"],
    )


@pytest.fixture
def desk_req(full_req):
    """Full-scale requirements rescaled to N=1019."""
    return full_req.rescaled(35537, 1019)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
