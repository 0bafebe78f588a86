"""Tapped-delay-line fading channels and the post-filter-bank view of them.

Covers the standardized LTE power-delay profiles (EPA/EVA/ETU), random
sample-spaced realizations, the effective per-window channel operators
obtained by probing the actual modulate/convolve/demodulate chain, the
single-block convolution-tail matrix, the desired/ICI/ISI decomposition
of a received window, and the one-tap zero-forcing equalizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy.linalg import toeplitz

from .modem import QamFrame, TimeSignal

__all__ = [
    "ChannelProfile",
    "ChannelRealization",
    "EffectiveChannel",
    "lte_profile",
    "awgn_profile",
    "profile_from_dict",
    "load_profile",
    "sample_realization",
    "effective_channel",
    "channel_tail_matrix",
    "decompose_received",
    "zf_equalize",
    "export_realization_csv",
    "DEEP_FADE_THRESHOLD",
]

DEEP_FADE_THRESHOLD = 1e-12

# Standardized LTE delay (ns) and power (dB) profiles.
_LTE_PROFILES = {
    "EPA": (
        (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0),
        (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8),
    ),
    "EVA": (
        (0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0),
        (0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9),
    ),
    "ETU": (
        (0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0),
        (-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0),
    ),
}


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile: tap delays in ns and mean powers in dB."""

    name: str
    delays_ns: np.ndarray
    powers_db: np.ndarray

    def __post_init__(self):
        delays = np.asarray(self.delays_ns, dtype=float)
        powers = np.asarray(self.powers_db, dtype=float)
        if delays.shape != powers.shape or delays.ndim != 1:
            raise ValueError("delays and powers must be equal-length vectors")
        if np.any(delays < 0) or np.any(np.diff(delays) <= 0):
            raise ValueError("delays must be nonnegative and strictly increasing")
        delays.flags.writeable = False
        powers.flags.writeable = False
        object.__setattr__(self, "delays_ns", delays)
        object.__setattr__(self, "powers_db", powers)

    @property
    def max_delay_ns(self) -> float:
        return float(self.delays_ns[-1])


def lte_profile(name: str) -> ChannelProfile:
    """Return one of the standardized LTE profiles (EPA, EVA, ETU)."""
    key = name.upper()
    if key not in _LTE_PROFILES:
        raise ValueError(f"unknown LTE profile {name!r}; choose from EPA/EVA/ETU")
    delays, powers = _LTE_PROFILES[key]
    return ChannelProfile(key, np.array(delays), np.array(powers))


def awgn_profile() -> ChannelProfile:
    """Single unit tap at zero delay (no fading)."""
    return ChannelProfile("AWGN", np.array([0.0]), np.array([0.0]))


def profile_from_dict(d: dict) -> ChannelProfile:
    name = str(d.get("name", "CUSTOM")).upper()
    if name in _LTE_PROFILES and "delays_ns" not in d:
        return lte_profile(name)
    if name == "AWGN" and "delays_ns" not in d:
        return awgn_profile()
    return ChannelProfile(name, np.asarray(d["delays_ns"], dtype=float),
                          np.asarray(d["powers_db"], dtype=float))


def load_profile(path) -> ChannelProfile:
    """Load a profile from a YAML file with keys name, delays_ns, powers_db."""
    with open(path) as fh:
        return profile_from_dict(yaml.safe_load(fh))


@dataclass
class ChannelRealization:
    """Sample-spaced impulse response drawn from a profile.

    ``sigma2`` is the complex noise variance per sample; it defaults to 0
    and is filled in by whichever harness adds the noise.
    """

    h: np.ndarray
    sample_rate: float
    profile_name: str = "CUSTOM"
    sigma2: float = 0.0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        if self.h.ndim != 1 or len(self.h) < 1:
            raise ValueError("impulse response must be a nonempty vector")

    @property
    def l_ch(self) -> int:
        return len(self.h)

    def toeplitz_matrix(self, size: int) -> np.ndarray:
        """Lower-triangular convolution matrix of shape (size, size)."""
        if self.l_ch > size:
            raise ValueError("channel longer than the requested window")
        col = np.zeros(size, dtype=complex)
        col[: self.l_ch] = self.h
        row = np.zeros(size, dtype=complex)
        row[0] = self.h[0]
        return toeplitz(col, row)

    def apply(self, signal: TimeSignal) -> TimeSignal:
        """Full linear convolution (length grows by l_ch - 1)."""
        out = np.convolve(signal.samples, self.h)
        return TimeSignal(out, signal.sample_rate, signal.symbol_spacing)


def sample_realization(profile: ChannelProfile, sample_rate_hz: float = 1.92e6,
                       rng: np.random.Generator | None = None) -> ChannelRealization:
    """Draw a block-static realization of ``profile``.

    Tap powers are normalized to sum to one, each tap is circular complex
    Gaussian, and taps are placed on the nearest sample index (colliding
    taps add).  The AWGN profile is deterministic (h = [1]).
    """
    if profile.name == "AWGN":
        return ChannelRealization(np.array([1.0 + 0j]), sample_rate_hz, "AWGN")
    if rng is None:
        rng = np.random.default_rng()
    powers = 10.0 ** (profile.powers_db / 10.0)
    powers = powers / powers.sum()
    idx = np.rint(profile.delays_ns * 1e-9 * sample_rate_hz).astype(int)
    h = np.zeros(idx.max() + 1, dtype=complex)
    gains = (rng.standard_normal(len(powers)) + 1j * rng.standard_normal(len(powers)))
    gains = gains * np.sqrt(powers / 2.0)
    np.add.at(h, idx, gains)
    return ChannelRealization(h, sample_rate_hz, profile.name)


@dataclass
class EffectiveChannel:
    """Per-window frequency-domain channel operators.

    ``same_symbol`` maps the current symbol vector to its own window;
    ``cross_symbol[d]`` maps the symbol at offset d (d != 0) onto the
    current window.  Both are measured by probing the full transmit ->
    convolve -> analyze chain, so they are exact for overlap-add frames.
    ``h`` records the impulse response the operators were probed with.
    """

    same_symbol: np.ndarray
    cross_symbol: dict[int, np.ndarray] = field(default_factory=dict)
    h: np.ndarray = field(default_factory=lambda: np.array([1.0 + 0j]))

    @property
    def m(self) -> int:
        return self.same_symbol.shape[0]

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.same_symbol)

    def offsets(self) -> list[int]:
        return sorted(self.cross_symbol)


def effective_channel(modem, realization: ChannelRealization,
                      drop_tol: float = 1e-12) -> EffectiveChannel:
    """Probe ``modem`` through ``realization`` column by column.

    A unit symbol is injected on each subcarrier of one multicarrier
    symbol; the demodulated response in every overlapping analysis window
    gives one column of the corresponding operator.  Cross-symbol
    operators whose largest entry falls below ``drop_tol`` (relative to
    the desired-path peak) are dropped.
    """
    m = modem.m
    h = realization.h
    e = realization.l_ch - 1
    sp, wl, off = modem.spacing, modem.window_len, modem.window_offset
    sym_len = modem.frame_len(1)
    # window w spans [w*sp + off, w*sp + off + wl); the probed symbol's
    # channel output spans [0, sym_len + e)
    w_min = -((wl - 1 + off) // sp)
    w_max = (sym_len + e - 1 - off) // sp
    responses = {w: np.zeros((m, m), dtype=complex) for w in range(w_min, w_max + 1)}
    saved_mults = modem.complex_mults  # probing is setup, not receiver work
    for i in range(m):
        unit = np.zeros((m, 1), dtype=complex)
        unit[i, 0] = 1.0
        x = modem.modulate(QamFrame(unit))
        y = np.convolve(x.samples, h)
        for w in range(w_min, w_max + 1):
            start = w * sp + off
            win = np.zeros(wl, dtype=complex)
            lo, hi = max(start, 0), min(start + wl, len(y))
            if lo < hi:
                win[lo - start : hi - start] = y[lo:hi]
            responses[w][:, i] = modem.demod_window(win)
    modem.complex_mults = saved_mults
    same = responses.pop(0)
    scale = np.abs(same).max()
    cross = {}
    for w, mat in responses.items():
        if np.abs(mat).max() > drop_tol * max(scale, 1.0):
            # window w sees the probed symbol at relative offset -w
            cross[-w] = mat
    return EffectiveChannel(same_symbol=same, cross_symbol=cross, h=h.copy())


def channel_tail_matrix(realization: ChannelRealization, m: int) -> np.ndarray:
    """Single-block leakage matrix of the previous length-m block.

    The E x E upper-triangular Toeplitz corner (E = l_ch - 1, constant
    diagonal h[E], first row h[E], h[E-1], ..., h[1]) sits in the top
    right; everything else is zero.  This is exactly the tail a length-m
    block convolution spills into its successor, under back-to-back
    blocks of length m with no transmit windowing.
    """
    e = realization.l_ch - 1
    if e > m:
        raise ValueError("channel tail longer than the block")
    out = np.zeros((m, m), dtype=complex)
    if e == 0:
        return out
    h = realization.h
    for i in range(e):
        for j in range(i, e):
            out[i, m - e + j] = h[e - (j - i)]
    return out


def decompose_received(r_window: np.ndarray, frame: QamFrame,
                       eff: EffectiveChannel, n: int):
    """Split window ``n`` into desired, same-symbol ICI, cross-symbol ISI
    and whatever remains (filtered noise when the model is exact).
    """
    a_n = frame.symbols[:, n]
    diag = eff.diag
    desired = diag * a_n
    ici = eff.same_symbol @ a_n - desired
    isi = np.zeros(eff.m, dtype=complex)
    for d, mat in eff.cross_symbol.items():
        j = n + d
        if 0 <= j < frame.n:
            isi += mat @ frame.symbols[:, j]
    residual = r_window - desired - ici - isi
    return desired, ici, isi, residual


def zf_equalize(r_window: np.ndarray, eff: EffectiveChannel):
    """One-tap zero forcing: divide by the same-symbol diagonal.

    Subcarriers in a deep fade (|diag| < DEEP_FADE_THRESHOLD) are zeroed
    and flagged as erasures instead of dividing by ~0.
    """
    diag = eff.diag
    erasure = np.abs(diag) < DEEP_FADE_THRESHOLD
    safe = np.where(erasure, 1.0, diag)
    out = np.where(erasure, 0.0, r_window / safe)
    return out, erasure


def export_realization_csv(realization: ChannelRealization, path) -> None:
    """Tap list as CSV for reproducibility records."""
    with open(path, "w") as fh:
        fh.write("tap_index,re,im\n")
        for i, v in enumerate(realization.h):
            fh.write(f"{i},{float(v.real)!r},{float(v.imag)!r}\n")
