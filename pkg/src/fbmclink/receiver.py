"""Iterative interference-cancelling BICM-ID receiver.

One receiver pass demodulates the (interference-cancelled) windows,
zero-forces, soft-demaps with the decoder's fed-back priors, runs the
LDPC decoder for a fixed number of inner iterations, then soft-remaps
the decoder extrinsics and reconstructs the intrinsic interference for
the next pass.  Cancellation is applied to the per-window frequency
domain vectors (after the FFT, before the equalizer).

The full receiver rebuilds the interference estimate through the actual
modulator/channel/demodulator chain; the hybrid variant reuses the
frequency-domain effective operators from the second cancellation pass
onward, skipping the modem entirely (identical estimates, cheaper).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import EffectiveChannel, zf_equalize
from .exit_chart import (
    interference_estimate_grid,
    interference_variance_grid,
    mi_from_samples,
)
from .ldpc import (
    LLR_CLAMP,
    Interleaver,
    LdpcCode,
    deinterleave,
    interleave,
    sum_product_decode,
)
from .mapping import Constellation, SoftSymbolFrame, hard_decision, soft_demap, soft_map
from .modem import QamFrame, TimeSignal

__all__ = [
    "ReceiverConfig",
    "TraceRecord",
    "IterationTrace",
    "FrameLayout",
    "FrameTruth",
    "BicmIdReceiver",
    "estimate_interference",
    "cancel",
]


@dataclass
class ReceiverConfig:
    """Iteration budget and variant switches for the receiver.

    ``variance_source`` picks the demapper's effective noise variance:
    "analytic" propagates noise gain plus residual-interference power per
    subcarrier; "pilot" calibrates one variance per pass from the sample
    error at the known pilot slots (falls back to analytic without pilots).
    """

    i_iic: int = 3
    i_dec: int = 2
    hybrid: bool = False
    early_stop: bool = True
    mapping_scheme: str = "gray"
    equalizer: str = "zf"
    variance_source: str = "analytic"

    def __post_init__(self):
        if self.i_iic < 0:
            raise ValueError("i_iic must be >= 0")
        if self.i_dec < 1:
            raise ValueError("i_dec must be >= 1")
        if self.equalizer != "zf":
            raise ValueError("only the one-tap zf equalizer is implemented")
        if self.variance_source not in ("analytic", "pilot"):
            raise ValueError("variance_source must be 'analytic' or 'pilot'")


@dataclass
class TraceRecord:
    iic_pass: int
    mi_dem_e: float
    mi_dec_e: float
    residual_power: float
    checks_ok: bool
    dec_iterations: int


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    modem_mults: float = 0.0

    def __len__(self):
        return len(self.records)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iic_pass,mi_dem_e,mi_dec_e,residual_power,checks_ok\n")
            for r in self.records:
                fh.write(f"{r.iic_pass},{float(r.mi_dem_e)!r},{float(r.mi_dec_e)!r},"
                         f"{float(r.residual_power)!r},{int(r.checks_ok)}\n")


@dataclass
class FrameLayout:
    """Placement of coded bits and pilots on the subcarrier/time grid.

    Slots are ordered symbol-time major over the active subcarriers.
    Whatever does not fit an integer number of codewords carries
    receiver-known pilot symbols, spread evenly across the frame so their
    local interference environment matches the data slots.
    """

    active: np.ndarray
    n_symbols: int
    bits_per_symbol: int
    codeword_len: int

    def __post_init__(self):
        self.active = np.asarray(self.active, dtype=int)
        slots = len(self.active) * self.n_symbols
        self.n_codewords = (slots * self.bits_per_symbol) // self.codeword_len
        if self.n_codewords < 1:
            raise ValueError("grid too small for a single codeword")
        self.data_slots = self.n_codewords * self.codeword_len // self.bits_per_symbol
        self.pilot_slots = slots - self.data_slots
        if self.pilot_slots:
            step = slots / self.pilot_slots
            pilot_idx = np.floor(np.arange(self.pilot_slots) * step
                                 + step / 2.0).astype(int)
            self.pilot_idx = pilot_idx
        else:
            self.pilot_idx = np.empty(0, dtype=int)
        self.data_idx = np.setdiff1d(np.arange(slots), self.pilot_idx)

    @property
    def n_slots(self) -> int:
        return len(self.active) * self.n_symbols

    def grid_from_slots(self, values: np.ndarray, m: int, fill=0) -> np.ndarray:
        out = np.full((m, self.n_symbols), fill,
                      dtype=np.asarray(values).dtype)
        out[self.active, :] = values.reshape(self.n_symbols, len(self.active)).T
        return out

    def slots_from_grid(self, grid: np.ndarray) -> np.ndarray:
        return grid[self.active, :].T.ravel()


@dataclass
class FrameTruth:
    """Transmit-side knowledge used for instrumentation (MI, residual)."""

    coded_bits: np.ndarray       # (n_codewords, codeword_len), decoder order
    interleaved_signs: np.ndarray  # bipolar, data-slot demapper order
    frame: QamFrame              # the transmitted grid incl. pilots


def estimate_interference(soft: SoftSymbolFrame, eff: EffectiveChannel,
                          n: int) -> np.ndarray:
    """ICI+ISI reconstruction for window ``n`` from soft symbol means."""
    return interference_estimate_grid(soft.means, eff)[:, n]


def cancel(r_window: np.ndarray, i_hat: np.ndarray) -> np.ndarray:
    """Subtract the interference estimate from one received window."""
    return np.asarray(r_window) - np.asarray(i_hat)


@dataclass
class ReceiverResult:
    info_bits: np.ndarray
    trace: IterationTrace
    post_llrs: np.ndarray
    checks_ok: bool


class BicmIdReceiver:
    """BICM-ID receiver with iterative intrinsic-interference cancellation.

    Parameters
    ----------
    modem : FbmcModem or CpOfdmModem
    code : LdpcCode
    interleaver : Interleaver
        One codeword-length permutation, reused per codeword.
    constellation : Constellation
    layout : FrameLayout
    config : ReceiverConfig
    """

    def __init__(self, modem, code: LdpcCode, interleaver: Interleaver,
                 constellation: Constellation, layout: FrameLayout,
                 config: ReceiverConfig):
        if len(interleaver) != code.n:
            raise ValueError("interleaver length must equal the code length")
        self.modem = modem
        self.code = code
        self.interleaver = interleaver
        self.constellation = constellation
        self.layout = layout
        self.config = config

    # -- helpers -------------------------------------------------------

    def _soft_grid(self, dem_apriori: np.ndarray,
                   pilots: np.ndarray | None) -> SoftSymbolFrame:
        lay = self.layout
        m = self.modem.m
        mm = lay.bits_per_symbol
        means_d, vars_d = soft_map(dem_apriori.reshape(-1, mm),
                                   self.constellation)
        slot_means = np.zeros(lay.n_slots, dtype=complex)
        slot_vars = np.zeros(lay.n_slots)
        slot_means[lay.data_idx] = means_d
        slot_vars[lay.data_idx] = vars_d
        if lay.pilot_slots:
            if pilots is not None:
                slot_means[lay.pilot_idx] = pilots
            else:
                # unknown unit-energy filler: nothing to subtract,
                # full power left as residual uncertainty
                slot_vars[lay.pilot_idx] = 1.0
        means = lay.grid_from_slots(slot_means.astype(complex), m)
        variances = lay.grid_from_slots(slot_vars, m)
        return SoftSymbolFrame(means, variances)

    def _interference_full(self, soft: SoftSymbolFrame,
                           eff: EffectiveChannel) -> np.ndarray:
        """Time-domain reconstruction through the real modem and channel."""
        sig = self.modem.modulate(QamFrame(soft.means))
        y = np.convolve(sig.samples, eff.h)
        est_all = self.modem.demodulate(
            TimeSignal(y, sig.sample_rate, sig.symbol_spacing),
            self.layout.n_symbols).symbols
        return est_all - eff.diag[:, None] * soft.means

    # -- main entry ------------------------------------------------------

    def receive(self, signal: TimeSignal, eff: EffectiveChannel,
                noise_var: float, *, pilots: np.ndarray | None = None,
                truth: FrameTruth | None = None,
                genie_feedback: bool = False) -> ReceiverResult:
        cfg = self.config
        lay = self.layout
        mm = lay.bits_per_symbol
        mults0 = self.modem.complex_mults

        r0 = self.modem.demodulate(signal, lay.n_symbols).symbols
        gain = self.modem.noise_gain()
        diag = eff.diag
        # deep fades are zeroed by the equalizer; keep their variance finite
        abs_diag2 = np.maximum(np.abs(diag[lay.active]) ** 2, 1e-24)

        true_int = None
        if truth is not None:
            true_int = interference_estimate_grid(truth.frame.symbols, eff)

        # pass 0: zero priors, so data means are 0 with unit variance;
        # known pilot interference is deterministic and cancelled upfront
        dem_apriori = np.zeros((lay.data_slots, mm))
        soft0 = self._soft_grid(dem_apriori, pilots)
        i_hat = interference_estimate_grid(soft0.means, eff)
        int_var = interference_variance_grid(soft0.variances, eff)
        trace = IterationTrace()
        result = None
        for p in range(cfg.i_iic + 1):
            rc = r0 - i_hat
            eq = np.empty((len(lay.active), lay.n_symbols), dtype=complex)
            erasures = np.zeros((len(lay.active), lay.n_symbols), dtype=bool)
            for j in range(lay.n_symbols):
                eqj, erasj = zf_equalize(rc[:, j], eff)
                eq[:, j] = eqj[lay.active]
                erasures[:, j] = erasj[lay.active]
            var_eff = (noise_var * gain[lay.active, None]
                       + int_var[lay.active, :]) / abs_diag2[:, None]
            eq_slots = eq.T.ravel()
            r_slots = eq_slots[lay.data_idx]
            v_slots = np.maximum(var_eff.T.ravel()[lay.data_idx], 1e-30)
            if (cfg.variance_source == "pilot" and pilots is not None
                    and lay.pilot_slots):
                pilot_err = np.mean(np.abs(eq_slots[lay.pilot_idx]
                                           - pilots) ** 2)
                v_slots = np.full_like(v_slots, max(pilot_err, 1e-30))
            dem_ext = soft_demap(r_slots, v_slots, dem_apriori,
                                 self.constellation)
            erased = erasures.T.ravel()[lay.data_idx]
            dem_ext[erased, :] = 0.0

            dec_apriori = deinterleave(
                dem_ext.ravel().reshape(lay.n_codewords, self.code.n),
                self.interleaver)
            # without early stop the decoder must run its full budget, or a
            # check-satisfying input would yield zero extrinsics and starve
            # the cancellation feedback of later passes
            res = sum_product_decode(self.code, dec_apriori, cfg.i_dec,
                                     early_stop=cfg.early_stop)
            dec_ext = res.ext.values
            dem_apriori_next = interleave(dec_ext, self.interleaver).reshape(
                lay.data_slots, mm)
            if genie_feedback:
                if truth is None:
                    raise ValueError("genie feedback needs the frame truth")
                dem_apriori_next = (
                    LLR_CLAMP * truth.interleaved_signs.reshape(lay.data_slots, mm)
                ).astype(float)

            mi_dem = mi_dec = float("nan")
            residual = float("nan")
            if truth is not None:
                mi_dem = mi_from_samples(truth.interleaved_signs,
                                         dem_ext.ravel())
                signs_dec = deinterleave(
                    truth.interleaved_signs.reshape(lay.n_codewords,
                                                    self.code.n),
                    self.interleaver)
                mi_dec = mi_from_samples(signs_dec.ravel(), dec_ext.ravel())
                diff = (true_int - i_hat)[lay.active, :]
                residual = float(np.mean(np.abs(diff) ** 2))
            trace.records.append(TraceRecord(p, mi_dem, mi_dec, residual,
                                             res.converged, res.iterations))
            result = res
            dem_apriori = dem_apriori_next
            if cfg.early_stop and res.converged:
                break
            if p < cfg.i_iic:
                soft = self._soft_grid(dem_apriori, pilots)
                if cfg.hybrid and p >= 1:
                    i_hat = interference_estimate_grid(soft.means, eff)
                else:
                    i_hat = self._interference_full(soft, eff)
                int_var = interference_variance_grid(soft.variances, eff)

        trace.modem_mults = self.modem.complex_mults - mults0
        hard = hard_decision(result.post.values)
        info = self.code.extract_info(hard)
        return ReceiverResult(info.ravel(), trace, result.post.values,
                              result.converged)
