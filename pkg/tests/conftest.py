import numpy as np
import pytest

from framesync import parse_config
from framesync.channel import FrameGeometry, LptvChannel
from framesync.cyclostat import NoiseModel
from framesync.detectors import CandidateIndexing
from framesync.frame import Constellation, SyncWord


@pytest.fixture(scope="session")
def scenario1():
    return parse_config("scenario1")


@pytest.fixture(scope="session")
def scenario2():
    return parse_config("scenario2")


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


@pytest.fixture(scope="session")
def tiny():
    """Smallest detector geometry: N=2, K=1, M=1, L_ch=1, BPSK.

    Small enough for brute-force oracles over all 4 data and 2
    sync-fill hypotheses; the sync-word length margin is waived.
    """
    constellation = Constellation.bpsk()
    geom = FrameGeometry(
        P_h=1, P_z=1, L_h=1, L_z=1, N=2, M=1, check_sw_margin=False
    )
    channel = LptvChannel(
        period=1, memory=1, coeffs=np.array([[1.0 + 0.3j, -0.4 + 0.2j]])
    )
    noise = NoiseModel(
        period=1, memory=1, variance_profile=np.array([1.0]),
        shaping_fir=np.array([1.0, 0.5]),
    )
    sw = SyncWord.from_symbols(np.array([1.0]), constellation, n_blocks=1)
    idx = CandidateIndexing(
        symbols=constellation.symbols, N=geom.N, M=geom.M, L_ch=geom.L_ch
    )
    return constellation, geom, channel, noise, sw, idx
