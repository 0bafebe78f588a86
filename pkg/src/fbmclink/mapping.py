"""16-QAM constellations with selectable bit labelings and soft (de)mapping.

Labelings ship as CSV data files (gray, sp, msp, msew, m16r) and are
loaded by scheme name.  The demapper is exact MAP marginalization over
the constellation (log-sum-exp, extrinsic output: the target bit's own
prior is excluded); the soft mapper returns the posterior mean and
variance of each symbol given per-bit priors.

Bit/LLR convention: LLR = log p(bit=0)/p(bit=1); bipolar x = 1 - 2b.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib.resources import files

import numpy as np

from .ldpc import LLR_CLAMP

__all__ = [
    "Constellation",
    "SoftSymbolFrame",
    "LABELING_SCHEMES",
    "load_constellation",
    "gray_qam16",
    "map_bits",
    "soft_demap",
    "soft_map",
    "hard_decision",
]

LABELING_SCHEMES = ("gray", "sp", "msp", "msew", "m16r")


@dataclass(frozen=True)
class Constellation:
    """Unit-energy constellation plus a bijective bit labeling.

    ``points[i]`` is the symbol whose label is the bits of integer i,
    most significant bit first.
    """

    points: np.ndarray
    bits_per_symbol: int
    scheme: str = "custom"

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex)
        if len(points) != 2 ** self.bits_per_symbol:
            raise ValueError("need 2**bits_per_symbol points")
        if len(np.unique(points.round(12))) != len(points):
            raise ValueError("labeling must be bijective (distinct points)")
        points.flags.writeable = False
        object.__setattr__(self, "points", points)
        idx = np.arange(len(points))
        labels = (idx[:, None] >> np.arange(self.bits_per_symbol)[::-1]) & 1
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        signs = 1.0 - 2.0 * labels
        signs.flags.writeable = False
        object.__setattr__(self, "label_signs", signs)

    @property
    def size(self) -> int:
        return len(self.points)

    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


def gray_qam16() -> Constellation:
    """Corner-anchored Gray 16-QAM: bits 0000 -> (-3-3j)/sqrt(10).

    First two label bits Gray-select the in-phase level (00 -3, 01 -1,
    11 +1, 10 +3), last two the quadrature level.
    """
    level = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}
    points = np.empty(16, dtype=complex)
    for i in range(16):
        b = [(i >> s) & 1 for s in (3, 2, 1, 0)]
        points[i] = complex(level[(b[0], b[1])], level[(b[2], b[3])])
    return Constellation(points / np.sqrt(10.0), 4, "gray")


def load_constellation(scheme: str) -> Constellation:
    """Load a shipped labeling table by scheme name."""
    scheme = scheme.lower()
    if scheme not in LABELING_SCHEMES:
        raise ValueError(f"unknown mapping scheme {scheme!r}; choose from {LABELING_SCHEMES}")
    text = files("fbmclink").joinpath(f"data/labeling_{scheme}.csv").read_text()
    points = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("index,"):
            continue
        _idx, bits, re_s, im_s = line.split(",")
        points[int(bits, 2)] = complex(float(re_s), float(im_s))
    arr = np.array([points[i] for i in range(len(points))])
    return Constellation(arr, int(np.log2(len(points))), scheme)


def map_bits(bits: np.ndarray, const: Constellation) -> np.ndarray:
    """Map a bit vector (length divisible by bits/symbol) to symbols."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    mm = const.bits_per_symbol
    if len(bits) % mm:
        raise ValueError(f"bit count {len(bits)} not divisible by {mm}")
    groups = bits.reshape(-1, mm)
    idx = groups @ (1 << np.arange(mm - 1, -1, -1))
    return const.points[idx]


@dataclass
class SoftSymbolFrame:
    """Posterior symbol means and variances on the subcarrier/time grid."""

    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=complex)
        self.variances = np.asarray(self.variances, dtype=float)
        if self.means.shape != self.variances.shape:
            raise ValueError("means and variances must share a shape")


def _prior_log_table(apriori: np.ndarray, const: Constellation) -> np.ndarray:
    # log prod_q p(bit_q(s)) for every symbol s, up to a constant:
    # 0.5 * sum_q x_q(s) * L_q  (the symmetric form; constants cancel)
    return 0.5 * apriori @ const.label_signs.T


def soft_demap(r: np.ndarray, noise_var, apriori: np.ndarray,
               const: Constellation) -> np.ndarray:
    """Extrinsic MAP bit LLRs for equalized symbols ``r``.

    Parameters
    ----------
    r : complex array, shape (S,)
    noise_var : float or array (S,)
        Effective complex-noise variance per symbol (likelihood
        exp(-|r - s|^2 / noise_var)); must be positive.
    apriori : array, shape (S, bits_per_symbol)
        A-priori LLRs; the target bit's own prior is excluded from its
        extrinsic output.

    Returns
    -------
    (S, bits_per_symbol) extrinsic LLRs, clamped to +/-LLR_CLAMP.
    """
    r = np.asarray(r, dtype=complex).ravel()
    nv = np.broadcast_to(np.asarray(noise_var, dtype=float), r.shape)
    if np.any(nv <= 0):
        raise ValueError("noise variance must be positive")
    apriori = np.asarray(apriori, dtype=float)
    if apriori.shape != (len(r), const.bits_per_symbol):
        raise ValueError("apriori must be (num_symbols, bits_per_symbol)")
    base = -np.abs(r[:, None] - const.points[None, :]) ** 2 / nv[:, None]
    metric = base + _prior_log_table(apriori, const)
    out = np.empty_like(apriori)
    for q in range(const.bits_per_symbol):
        x_q = const.label_signs[:, q]
        # drop the target bit's own prior contribution
        m_q = metric - 0.5 * np.outer(apriori[:, q], x_q)
        num = _logsumexp(m_q[:, x_q > 0])
        den = _logsumexp(m_q[:, x_q < 0])
        out[:, q] = num - den
    return np.clip(out, -LLR_CLAMP, LLR_CLAMP)


def _logsumexp(m: np.ndarray) -> np.ndarray:
    peak = m.max(axis=1)
    return peak + np.log(np.exp(m - peak[:, None]).sum(axis=1))


def soft_map(apriori: np.ndarray, const: Constellation):
    """Posterior symbol mean and variance from per-bit a-priori LLRs.

    Returns ``(means, variances)`` with shapes (S,).  Zero LLRs give the
    constellation centroid (0 for symmetric sets) with unit variance.
    """
    apriori = np.asarray(apriori, dtype=float)
    if apriori.ndim != 2 or apriori.shape[1] != const.bits_per_symbol:
        raise ValueError("apriori must be (num_symbols, bits_per_symbol)")
    # log P(s) = sum_q log sigmoid(x_q(s) L_q), then normalize per row
    z = apriori[:, None, :] * const.label_signs[None, :, :]
    logp = -np.logaddexp(0.0, -z).sum(axis=-1)
    p = np.exp(logp - logp.max(axis=1, keepdims=True))
    p /= p.sum(axis=1, keepdims=True)
    means = p @ const.points
    second = p @ (np.abs(const.points) ** 2)
    variances = np.maximum(second - np.abs(means) ** 2, 0.0)
    return means, variances


def hard_decision(llr) -> np.ndarray:
    """LLR > 0 (and exact ties) decide bit 0."""
    if hasattr(llr, "values"):
        llr = llr.values
    return (np.asarray(llr) < 0).astype(np.uint8)
