"""Prototype filter construction and polyphase filter-bank operators.

The transmitter windows the K-times repeated IFFT output of every
multicarrier symbol with a real, symmetric prototype of length K*M; the
receiver applies the conjugate-transposed operator to each analysis
window.  Both sides are exposed as explicit matrices (synthesis: K*M x M,
analysis: M x K*M) so dense linear-algebra cross-checks stay trivial,
while the modem itself exploits the sparse polyphase structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PHYDYAS_K4",
    "PrototypeFilter",
    "FilterBank",
    "phydyas_coeffs",
    "build_filter_bank",
    "export_coeffs_csv",
]

# Six-digit frequency-sampling table for overlap factor 4.  The leading tap
# is exactly zero only for this decimal set: -P1 + P2 - P3 = -0.5 without
# rounding error, which the algebraic 1/sqrt(2) misses by ~4e-7.
PHYDYAS_K4 = (1.0, 0.971960, 0.707107, 0.235147)


@dataclass(frozen=True)
class PrototypeFilter:
    """Real symmetric prototype filter with K*M taps.

    Parameters
    ----------
    coeffs : ndarray
        Filter taps, length K*M.
    K : int
        Overlap factor (number of symbol periods the filter spans).
    M : int
        Number of subcarriers (polyphase branches).
    """

    coeffs: np.ndarray
    K: int
    M: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("overlap factor K must be >= 1")
        if self.M < 2:
            raise ValueError("subcarrier count M must be >= 2")
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.K * self.M,):
            raise ValueError(
                f"expected {self.K * self.M} taps, got shape {coeffs.shape}"
            )
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def length(self) -> int:
        """Total number of taps, K*M."""
        return self.K * self.M

    def normalized(self) -> "PrototypeFilter":
        """Rescale the taps so their total energy equals M.

        With that scaling the DFT-wrapped analysis/synthesis round trip
        has unit diagonal, which keeps the desired-signal gain at 1 and
        simplifies noise-variance bookkeeping downstream.
        """
        scale = np.sqrt(self.M / float(np.sum(self.coeffs**2)))
        return PrototypeFilter(self.coeffs * scale, self.K, self.M)


@dataclass(frozen=True)
class FilterBank:
    """Synthesis/analysis operator pair built from one prototype filter.

    ``synthesis`` is the K*M x M transmit operator; column t carries taps
    g[t], g[t+M], ..., g[t+(K-1)M] at rows t, t+M, ..., t+(K-1)M, i.e.
    per-subcarrier filtering of the K-times repeated IFFT output.
    ``analysis`` is its conjugate transpose.
    """

    synthesis: np.ndarray
    analysis: np.ndarray
    filter: PrototypeFilter

    def __post_init__(self):
        for name in ("synthesis", "analysis"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:
        return self.filter.K

    @property
    def M(self) -> int:
        return self.filter.M

    @property
    def length(self) -> int:
        return self.filter.length


def phydyas_coeffs(K: int, M: int, p_table=None) -> PrototypeFilter:
    """Build the frequency-sampled prototype filter.

    Parameters
    ----------
    K : int
        Overlap factor.  Only K=4 has a built-in coefficient table;
        other values require ``p_table``.
    M : int
        Number of subcarriers, M >= 2.
    p_table : sequence of float, optional
        Frequency-domain samples P(0..len-1).  Defaults to the built-in
        K=4 table.

    Returns
    -------
    PrototypeFilter
        Raw (unnormalized) taps g[i] = P(0) + 2*sum_k (-1)^k P(k)
        cos(2 pi k i / (K M)).
    """
    if M < 2:
        raise ValueError("subcarrier count M must be >= 2")
    if p_table is None:
        if K != 4:
            raise ValueError(
                "no built-in P(k) table for K != 4; pass p_table explicitly"
            )
        p_table = PHYDYAS_K4
    p = np.asarray(p_table, dtype=float)
    gamma = K * M
    i = np.arange(gamma)
    g = np.full(gamma, p[0])
    for k in range(1, len(p)):
        g = g + 2.0 * (-1.0) ** k * p[k] * np.cos(2.0 * np.pi * k * i / gamma)
    return PrototypeFilter(g, K, M)


def build_filter_bank(filt: PrototypeFilter) -> FilterBank:
    """Assemble the synthesis and analysis matrices for ``filt``.

    synthesis[l, t] = coeffs[l] if (l - t) mod M == 0 and 0 <= (l-t)/M < K,
    zero otherwise; analysis = synthesis^H.
    """
    gamma, m = filt.length, filt.M
    synthesis = np.zeros((gamma, m), dtype=complex)
    for t in range(m):
        rows = t + m * np.arange(filt.K)
        synthesis[rows, t] = filt.coeffs[rows]
    analysis = synthesis.conj().T
    return FilterBank(synthesis=synthesis, analysis=analysis, filter=filt)


def export_coeffs_csv(filt: PrototypeFilter, path) -> None:
    """Write the taps to ``path``, one per line, 17 significant digits."""
    with open(path, "w") as fh:
        for c in filt.coeffs:
            fh.write(f"{c:.17g}\n")
