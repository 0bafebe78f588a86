import numpy as np
import pytest

from fbmclink.filterbank import build_filter_bank, phydyas_coeffs, PrototypeFilter
from fbmclink.ldpc import LdpcCode, default_code


@pytest.fixture(scope="session")
def bank16():
    """Normalized PHYDYAS K=4, M=16 bank."""
    return build_filter_bank(phydyas_coeffs(4, 16).normalized())


@pytest.fixture(scope="session")
def bank16_raw():
    return build_filter_bank(phydyas_coeffs(4, 16))


@pytest.fixture(scope="session")
def flat_bank4():
    """K=1 all-ones filter on 4 subcarriers: plain DFT/IDFT modem."""
    return build_filter_bank(PrototypeFilter(np.ones(4), 1, 4))


@pytest.fixture(scope="session")
def code96():
    return LdpcCode.peg(n=96, rate=0.5, seed=1)


@pytest.fixture(scope="session")
def code1296():
    return default_code()


@pytest.fixture(scope="session")
def hamming74():
    """The classic (7,4) single-error-correcting code."""
    h = np.array([
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ], dtype=np.uint8)
    return LdpcCode(h)


@pytest.fixture(scope="session")
def toy84():
    """Tiny (8,4) code on which sum-product fixes every single flip."""
    return LdpcCode.peg(n=8, rate=0.5, seed=1, profile=((2, 0.5), (3, 0.5)))
