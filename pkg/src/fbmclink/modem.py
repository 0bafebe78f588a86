"""Multicarrier modulators/demodulators as explicit linear operators.

Two waveforms are provided: the filter-bank modem (overlap-add of
windowed, K-times repeated IFFT blocks, symbol spacing M samples) and the
cyclic-prefix OFDM reference.  Module-level functions implement the raw
operators; the thin ``FbmcModem`` / ``CpOfdmModem`` classes add window
bookkeeping, per-subcarrier noise gain and an operation counter used by
the complexity cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filterbank import FilterBank

__all__ = [
    "QamFrame",
    "TimeSignal",
    "dft_matrix",
    "fbmc_modulate",
    "fbmc_demodulate",
    "ofdm_modulate",
    "ofdm_demodulate",
    "FbmcModem",
    "CpOfdmModem",
    "signal_to_binary",
    "signal_to_csv",
]

DEFAULT_SAMPLE_RATE = 1.92e6


@dataclass
class QamFrame:
    """Complex data grid: rows are subcarriers, columns are symbol times."""

    symbols: np.ndarray

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=complex)
        if self.symbols.ndim != 2:
            raise ValueError("frame must be a 2-D (M x N) array")

    @property
    def m(self) -> int:
        return self.symbols.shape[0]

    @property
    def n(self) -> int:
        return self.symbols.shape[1]


@dataclass
class TimeSignal:
    """Sampled baseband signal with its symbol layout."""

    samples: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE
    symbol_spacing: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)


def dft_matrix(m: int) -> np.ndarray:
    """Unitary DFT matrix, entry (l, t) = exp(-2j pi l t / m) / sqrt(m)."""
    if m < 1:
        raise ValueError("matrix size must be >= 1")
    idx = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / m) / np.sqrt(m)


def _fbmc_symbol(a_col: np.ndarray, bank: FilterBank) -> np.ndarray:
    # G @ Phi^H @ a == prototype window applied to the K-times tiled
    # normalized IFFT of the symbol vector.
    m, k = bank.M, bank.K
    s = np.fft.ifft(a_col) * np.sqrt(m)
    return np.tile(s, k) * bank.filter.coeffs


def fbmc_modulate(frame: QamFrame, bank: FilterBank,
                  sample_rate: float = DEFAULT_SAMPLE_RATE) -> TimeSignal:
    """Overlap-add modulation: window n starts at sample n*M.

    Output length is (N-1)*M + K*M.
    """
    if frame.m != bank.M:
        raise ValueError(f"frame has {frame.m} subcarriers, bank expects {bank.M}")
    m, gamma, n = bank.M, bank.length, frame.n
    out = np.zeros((n - 1) * m + gamma, dtype=complex)
    for j in range(n):
        out[j * m : j * m + gamma] += _fbmc_symbol(frame.symbols[:, j], bank)
    return TimeSignal(out, sample_rate, symbol_spacing=m)


def _fbmc_window(samples: np.ndarray, bank: FilterBank) -> np.ndarray:
    # Phi @ G^H @ window: per-branch weighted fold of the K segments,
    # then the normalized FFT.
    m, k = bank.M, bank.K
    folded = (samples.reshape(k, m) * bank.filter.coeffs.reshape(k, m)).sum(axis=0)
    return np.fft.fft(folded) / np.sqrt(m)


def fbmc_demodulate(signal: TimeSignal, bank: FilterBank, n: int) -> QamFrame:
    """Demodulate ``n`` analysis windows at offsets 0, M, ..., (n-1)*M."""
    m, gamma = bank.M, bank.length
    samples = signal.samples
    if len(samples) < (n - 1) * m + gamma:
        raise ValueError("signal too short for the requested number of windows")
    out = np.empty((m, n), dtype=complex)
    for j in range(n):
        out[:, j] = _fbmc_window(samples[j * m : j * m + gamma], bank)
    return QamFrame(out)


def ofdm_modulate(frame: QamFrame, l_cp: int,
                  sample_rate: float = DEFAULT_SAMPLE_RATE) -> TimeSignal:
    """Per-symbol unitary IDFT with the last ``l_cp`` samples prepended."""
    m, n = frame.m, frame.n
    if not 0 <= l_cp < m:
        raise ValueError(f"cyclic prefix length {l_cp} outside [0, {m})")
    span = m + l_cp
    out = np.empty(n * span, dtype=complex)
    for j in range(n):
        body = np.fft.ifft(frame.symbols[:, j]) * np.sqrt(m)
        out[j * span : j * span + l_cp] = body[m - l_cp :]
        out[j * span + l_cp : (j + 1) * span] = body
    return TimeSignal(out, sample_rate, symbol_spacing=span)


def ofdm_demodulate(signal: TimeSignal, l_cp: int, n: int, m: int | None = None) -> QamFrame:
    """Strip the prefix of each symbol and apply the unitary DFT.

    ``m`` defaults to the signal's recorded symbol spacing minus ``l_cp``.
    """
    if m is None:
        m = signal.symbol_spacing - l_cp
        if m <= 0:
            raise ValueError("cannot infer subcarrier count; pass m explicitly")
    return _ofdm_demodulate_m(signal.samples, l_cp, n, m)


def _ofdm_demodulate_m(samples, l_cp, n, m):
    span = m + l_cp
    if len(samples) < n * span:
        raise ValueError("signal too short for the requested number of symbols")
    out = np.empty((m, n), dtype=complex)
    for j in range(n):
        w = samples[j * span + l_cp : j * span + l_cp + m]
        out[:, j] = np.fft.fft(w) / np.sqrt(m)
    return QamFrame(out)


class _OpCounter:
    """Complex-multiplication tally, FFT counted as M/2 log2 M."""

    def __init__(self):
        self.complex_mults = 0.0

    def reset(self):
        self.complex_mults = 0.0


class FbmcModem(_OpCounter):
    """Filter-bank modem bound to one synthesis/analysis bank.

    Counts M/2 log2(M) + K*M complex multiplications per symbol
    modulated and per window demodulated.
    """

    def __init__(self, bank: FilterBank, sample_rate: float = DEFAULT_SAMPLE_RATE):
        super().__init__()
        self.bank = bank
        self.sample_rate = sample_rate

    @property
    def m(self) -> int:
        return self.bank.M

    @property
    def window_len(self) -> int:
        return self.bank.length

    @property
    def spacing(self) -> int:
        return self.bank.M

    @property
    def window_offset(self) -> int:
        # analysis window n starts at n*spacing + window_offset
        return 0

    @property
    def unit_mults(self) -> float:
        m = self.bank.M
        return m / 2 * math.log2(m) + self.bank.K * m

    def frame_len(self, n: int) -> int:
        return (n - 1) * self.spacing + self.window_len

    def modulate(self, frame: QamFrame) -> TimeSignal:
        self.complex_mults += self.unit_mults * frame.n
        return fbmc_modulate(frame, self.bank, self.sample_rate)

    def demodulate(self, signal: TimeSignal, n: int) -> QamFrame:
        self.complex_mults += self.unit_mults * n
        return fbmc_demodulate(signal, self.bank, n)

    def demod_window(self, samples: np.ndarray) -> np.ndarray:
        return _fbmc_window(samples, self.bank)

    def noise_gain(self) -> np.ndarray:
        """Per-subcarrier variance gain for white input noise.

        diag(Phi G^H G Phi^H): the mean polyphase-branch energy, constant
        across subcarriers because the branch energies are circularly
        averaged by the DFT.
        """
        energies = (np.abs(self.bank.synthesis) ** 2).sum(axis=0).real
        return np.full(self.m, energies.mean())


class CpOfdmModem(_OpCounter):
    """Cyclic-prefix OFDM reference modem.

    Counts M/2 log2(M) complex multiplications per symbol/window.
    """

    def __init__(self, m: int, l_cp: int, sample_rate: float = DEFAULT_SAMPLE_RATE):
        super().__init__()
        if not 0 <= l_cp < m:
            raise ValueError(f"cyclic prefix length {l_cp} outside [0, {m})")
        self.m_sub = m
        self.l_cp = l_cp
        self.sample_rate = sample_rate

    @property
    def m(self) -> int:
        return self.m_sub

    @property
    def window_len(self) -> int:
        return self.m_sub

    @property
    def spacing(self) -> int:
        return self.m_sub + self.l_cp

    @property
    def window_offset(self) -> int:
        return self.l_cp

    @property
    def unit_mults(self) -> float:
        return self.m_sub / 2 * math.log2(self.m_sub)

    def frame_len(self, n: int) -> int:
        return n * self.spacing

    def modulate(self, frame: QamFrame) -> TimeSignal:
        self.complex_mults += self.unit_mults * frame.n
        return ofdm_modulate(frame, self.l_cp, self.sample_rate)

    def demodulate(self, signal: TimeSignal, n: int) -> QamFrame:
        self.complex_mults += self.unit_mults * n
        return _ofdm_demodulate_m(signal.samples, self.l_cp, n, self.m_sub)

    def demod_window(self, samples: np.ndarray) -> np.ndarray:
        return np.fft.fft(samples) / np.sqrt(self.m_sub)

    def noise_gain(self) -> np.ndarray:
        return np.ones(self.m_sub)


def signal_to_binary(signal: TimeSignal, path) -> None:
    """Interleaved re/im little-endian float64 dump."""
    inter = np.empty(2 * len(signal.samples))
    inter[0::2] = signal.samples.real
    inter[1::2] = signal.samples.imag
    inter.astype("<f8").tofile(path)


def signal_to_csv(signal: TimeSignal, path) -> None:
    with open(path, "w") as fh:
        fh.write("re,im\n")
        for v in signal.samples:
            fh.write(f"{float(v.real)!r},{float(v.imag)!r}\n")
