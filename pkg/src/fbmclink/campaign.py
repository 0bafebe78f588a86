"""Monte-Carlo campaigns: configuration, seeding, BER sweeps, PSD, EXIT runs.

Every random draw comes from a stream derived by hashing
(master_seed, task_id), so campaigns replicate bit-for-bit across
machines and across worker counts.  BER frames are processed in fixed
chunks; the early-stop decision is taken on chunk boundaries only, which
makes serial and parallel runs identical.

SNR convention (stated in every output): Es/N0 per active subcarrier at
the demodulator input, with unit-energy constellations, unit average
channel power and the unit-gain filter normalization; noise variance per
complex sample is 10^(-snr_db/10).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml
from scipy.signal import welch

from .channel import (
    ChannelProfile,
    awgn_profile,
    effective_channel,
    lte_profile,
    sample_realization,
    zf_equalize,
)
from .exit_chart import (
    default_grid,
    inner_exit_curve,
    interference_variance_grid,
    outer_exit_curve,
    percentile_curves,
    trajectory,
)
from .filterbank import build_filter_bank, phydyas_coeffs
from .ldpc import LdpcCode, default_code, interleave, random_interleaver
from .mapping import hard_decision, load_constellation, map_bits, soft_demap
from .modem import CpOfdmModem, FbmcModem, QamFrame, TimeSignal
from .receiver import (
    BicmIdReceiver,
    FrameLayout,
    FrameTruth,
    ReceiverConfig,
)

__all__ = [
    "CampaignConfig",
    "BerPoint",
    "SimContext",
    "derive_seed",
    "rng_for",
    "build_context",
    "run_ber",
    "run_exit",
    "psd_estimate",
    "git_blob_sha",
    "write_ber_csv",
    "write_psd_csv",
]

WAVEFORMS = ("FBMC_QAM", "CP_OFDM")


def derive_seed(master_seed: int, task_id: str) -> int:
    """Stable 64-bit stream seed from (master seed, task name).

    sha256 of "<master>|<task>" truncated to its first 8 little-endian
    bytes; documented so runs replicate across machines.
    """
    digest = hashlib.sha256(f"{master_seed}|{task_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(master_seed: int, task_id: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, task_id))


def git_blob_sha(path) -> str:
    """Git-style content hash (sha1 over 'blob <len>\\0<bytes>')."""
    data = path.read_bytes() if hasattr(path, "read_bytes") else Path(path).read_bytes()
    return hashlib.sha1(b"blob %d\0%s" % (len(data), data)).hexdigest()


def default_active(m: int, count: int) -> np.ndarray:
    """``count`` subcarriers centered on (and excluding) DC."""
    if count >= m:
        raise ValueError("active set must leave room for guards")
    half = count // 2
    offsets = [o for o in range(-half, half + 1) if o != 0][:count]
    return np.array(sorted(o % m for o in offsets))


@dataclass
class CampaignConfig:
    """Resolved campaign parameters (defaults are desk-scale)."""

    waveform: str = "FBMC_QAM"
    m: int = 128
    k: int = 4
    n_active: int = 72
    n_symbols: int = 14
    sample_rate: float = 1.92e6
    snr_db: list = field(default_factory=lambda: [10.0, 12.0, 14.0, 16.0])
    profile: str = "EPA"
    channel_mode: str = "fixed"  # fixed | per_frame
    i_dec: int = 2
    i_iic: int = 3
    hybrid: bool = False
    mapping_scheme: str = "gray"
    coded: bool = True
    code_length: int = 1296
    code_seed: int = 1
    alist_path: str | None = None
    interleaver_seed: int = 2024
    frames: int = 200
    target_errors: int = 200
    chunk_size: int = 8
    workers: int = 1
    master_seed: int = 1
    out_dir: str = "out"

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_yaml(cls, path) -> "CampaignConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_dict(data)

    def validate(self) -> list[str]:
        """All problems at once, before any simulation starts."""
        errs = []
        if self.waveform.upper() not in WAVEFORMS:
            errs.append(f"waveform must be one of {WAVEFORMS}, got {self.waveform!r}")
        if self.m < 2 or self.m & (self.m - 1):
            errs.append(f"m must be a power of two >= 2, got {self.m}")
        if self.k < 1:
            errs.append(f"k must be >= 1, got {self.k}")
        if not 0 < self.n_active < self.m:
            errs.append(f"n_active must lie in (0, m), got {self.n_active}")
        if self.n_symbols < 1:
            errs.append("n_symbols must be >= 1")
        if not self.snr_db:
            errs.append("snr_db list must be nonempty")
        if self.profile.upper() not in ("EPA", "EVA", "ETU", "AWGN"):
            errs.append(f"unknown channel profile {self.profile!r}")
        if self.channel_mode not in ("fixed", "per_frame"):
            errs.append("channel_mode must be 'fixed' or 'per_frame'")
        if self.i_dec < 1:
            errs.append("i_dec must be >= 1")
        if self.i_iic < 0:
            errs.append("i_iic must be >= 0")
        try:
            load_constellation(self.mapping_scheme)
        except ValueError as err:
            errs.append(str(err))
        if self.frames < 1:
            errs.append("frames must be >= 1")
        if self.chunk_size < 1:
            errs.append("chunk_size must be >= 1")
        if self.workers < 1:
            errs.append("workers must be >= 1")
        if self.alist_path and not Path(self.alist_path).exists():
            errs.append(f"alist file not found: {self.alist_path}")
        return errs

    def resolved(self) -> dict:
        return asdict(self)


def _profile(cfg: CampaignConfig) -> ChannelProfile:
    name = cfg.profile.upper()
    return awgn_profile() if name == "AWGN" else lte_profile(name)


def sufficient_cp(profile: ChannelProfile, sample_rate: float) -> int:
    """Reference prefix length: the max profile delay in samples, rounded up."""
    return int(np.ceil(profile.max_delay_ns * 1e-9 * sample_rate))


class SimContext:
    """Everything a worker needs, built once from the config."""

    def __init__(self, cfg: CampaignConfig):
        errs = cfg.validate()
        if errs:
            raise ValueError("invalid campaign config: " + "; ".join(errs))
        self.cfg = cfg
        self.profile = _profile(cfg)
        self.constellation = load_constellation(cfg.mapping_scheme)
        self.active = default_active(cfg.m, cfg.n_active)
        if cfg.coded:
            if cfg.alist_path:
                self.code = LdpcCode.from_alist(cfg.alist_path)
            elif cfg.code_length == 1296 and cfg.code_seed == 1:
                self.code = default_code()
            else:
                self.code = LdpcCode.peg(cfg.code_length, 0.5, cfg.code_seed)
            self.interleaver = random_interleaver(self.code.n, cfg.interleaver_seed)
            try:
                self.layout = FrameLayout(self.active, cfg.n_symbols,
                                          self.constellation.bits_per_symbol,
                                          self.code.n)
            except ValueError:
                # EXIT-only runs may use grids smaller than one codeword;
                # the coded BER path checks for a layout explicitly
                self.layout = None
        else:
            self.code = None
            self.interleaver = None
            self.layout = None

    def data_files(self) -> list:
        """Input data files whose content hashes go into output headers."""
        from importlib.resources import files

        out = [files("fbmclink").joinpath(
            f"data/labeling_{self.cfg.mapping_scheme}.csv")]
        if self.cfg.coded:
            if self.cfg.alist_path:
                out.append(Path(self.cfg.alist_path))
            elif self.cfg.code_length == 1296 and self.cfg.code_seed == 1:
                out.append(files("fbmclink").joinpath("data/peg_n1296_r12.alist"))
        return out

    def new_modem(self):
        cfg = self.cfg
        if cfg.waveform.upper() == "FBMC_QAM":
            bank = build_filter_bank(
                phydyas_coeffs(cfg.k, cfg.m).normalized())
            return FbmcModem(bank, cfg.sample_rate)
        l_cp = sufficient_cp(self.profile, cfg.sample_rate)
        return CpOfdmModem(cfg.m, l_cp, cfg.sample_rate)

    def new_receiver(self, modem) -> BicmIdReceiver:
        if self.layout is None:
            raise ValueError(
                "grid smaller than one codeword: enlarge n_symbols/n_active "
                "or shorten the code for coded transmission")
        rc = ReceiverConfig(i_iic=self.cfg.i_iic, i_dec=self.cfg.i_dec,
                            hybrid=self.cfg.hybrid,
                            mapping_scheme=self.cfg.mapping_scheme)
        return BicmIdReceiver(modem, self.code, self.interleaver,
                              self.constellation, self.layout, rc)


@dataclass
class BerPoint:
    snr_db: float
    bits_sent: int
    bit_errors: int
    frames: int
    i_iic: int
    i_dec: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent if self.bits_sent else 0.0


def build_context(cfg: CampaignConfig) -> SimContext:
    return SimContext(cfg)


# ---------------------------------------------------------------------------
# frame simulation
# ---------------------------------------------------------------------------

def make_frame(ctx: SimContext, rng: np.random.Generator):
    """Draw data, encode, interleave, map and place one coded frame."""
    cfg = ctx.cfg
    lay = ctx.layout
    const = ctx.constellation
    info = rng.integers(0, 2, (lay.n_codewords, ctx.code.k)).astype(np.uint8)
    coded = ctx.code.encode(info)
    inter = interleave(coded, ctx.interleaver)
    bits = inter.ravel()
    syms = map_bits(bits, const)
    pilots = None
    slot_syms = np.empty(lay.n_slots, dtype=complex)
    slot_syms[lay.data_idx] = syms
    if lay.pilot_slots:
        pilot_bits = rng.integers(0, 2, lay.pilot_slots
                                  * const.bits_per_symbol).astype(np.uint8)
        pilots = map_bits(pilot_bits, const)
        slot_syms[lay.pilot_idx] = pilots
    grid = lay.grid_from_slots(slot_syms, cfg.m)
    frame = QamFrame(grid)
    signs = 1.0 - 2.0 * bits.astype(float)
    truth = FrameTruth(coded_bits=coded, interleaved_signs=signs, frame=frame)
    return info, frame, pilots, truth


def simulate_coded_frame(ctx: SimContext, modem, eff, snr_db: float,
                         frame_idx: int, realization=None):
    """One frame through the full chain; returns (bits, errors, converged)."""
    cfg = ctx.cfg
    rng = rng_for(cfg.master_seed,
                  f"ber/{cfg.waveform}/snr={snr_db!r}/frame={frame_idx}")
    if realization is None:
        realization = sample_realization(ctx.profile, cfg.sample_rate, rng)
        eff = effective_channel(modem, realization)
    info, frame, pilots, truth = make_frame(ctx, rng)
    sig = modem.modulate(frame)
    y = np.convolve(sig.samples, eff.h)
    noise_var = 10.0 ** (-snr_db / 10.0)
    noise = rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y))
    y = y + np.sqrt(noise_var / 2.0) * noise
    rx = ctx.new_receiver(modem)
    res = rx.receive(TimeSignal(y, sig.sample_rate, sig.symbol_spacing), eff,
                     noise_var, pilots=pilots)
    errors = int((res.info_bits != info.ravel()).sum())
    return info.size, errors, res.checks_ok


def simulate_uncoded_frame(ctx: SimContext, modem, eff, snr_db: float,
                           frame_idx: int):
    """Uncoded bypass: map, transmit, equalize, demap, harden."""
    cfg = ctx.cfg
    const = ctx.constellation
    rng = rng_for(cfg.master_seed,
                  f"ber/{cfg.waveform}/snr={snr_db!r}/frame={frame_idx}")
    mm = const.bits_per_symbol
    n_slots = len(ctx.active) * cfg.n_symbols
    bits = rng.integers(0, 2, n_slots * mm).astype(np.uint8)
    syms = map_bits(bits, const)
    grid = np.zeros((cfg.m, cfg.n_symbols), dtype=complex)
    grid[ctx.active, :] = syms.reshape(cfg.n_symbols, len(ctx.active)).T
    sig = modem.modulate(QamFrame(grid))
    y = np.convolve(sig.samples, eff.h)
    noise_var = 10.0 ** (-snr_db / 10.0)
    noise = rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y))
    y = y + np.sqrt(noise_var / 2.0) * noise
    r0 = modem.demodulate(TimeSignal(y, sig.sample_rate, sig.symbol_spacing),
                          cfg.n_symbols).symbols
    diag = eff.diag
    int_var = interference_variance_grid(
        (np.abs(grid) > 0).astype(float), eff)
    gain = modem.noise_gain()
    eq = np.empty((len(ctx.active), cfg.n_symbols), dtype=complex)
    for j in range(cfg.n_symbols):
        eqj, _ = zf_equalize(r0[:, j], eff)
        eq[:, j] = eqj[ctx.active]
    var_eff = (noise_var * gain[ctx.active, None]
               + int_var[ctx.active, :]) / np.maximum(
        np.abs(diag[ctx.active, None]) ** 2, 1e-24)
    llr = soft_demap(eq.T.ravel(), np.maximum(var_eff.T.ravel(), 1e-30),
                     np.zeros((n_slots, mm)), const)
    hard = hard_decision(llr).ravel()
    errors = int((hard != bits).sum())
    return len(bits), errors, True


# worker-side globals for the process pool
_CTX = None
_MODEM = None
_FIXED = None  # (realization, eff) when channel_mode == fixed


def _worker_init(cfg_dict):
    global _CTX, _MODEM, _FIXED
    cfg = CampaignConfig.from_dict(cfg_dict)
    _CTX = SimContext(cfg)
    _MODEM = _CTX.new_modem()
    if cfg.channel_mode == "fixed":
        rng = rng_for(cfg.master_seed, "channel/fixed")
        real = sample_realization(_CTX.profile, cfg.sample_rate, rng)
        _FIXED = (real, effective_channel(_MODEM, real))
    else:
        _FIXED = None


def _worker_frame(args):
    snr_db, frame_idx = args
    if _FIXED is not None:
        real, eff = _FIXED
        if _CTX.cfg.coded:
            return simulate_coded_frame(_CTX, _MODEM, eff, snr_db, frame_idx,
                                        realization=real)
        return simulate_uncoded_frame(_CTX, _MODEM, eff, snr_db, frame_idx)
    if not _CTX.cfg.coded:
        raise ValueError("per-frame channel redraw requires the coded chain")
    return simulate_coded_frame(_CTX, _MODEM, None, snr_db, frame_idx)


def run_ber(cfg: CampaignConfig) -> list[BerPoint]:
    """BER sweep over cfg.snr_db with deterministic chunked early stop."""
    ctx = SimContext(cfg)  # validate early, in the parent
    points = []
    pool = None
    try:
        if cfg.workers > 1:
            pool = ProcessPoolExecutor(cfg.workers, initializer=_worker_init,
                                       initargs=(cfg.resolved(),))
        else:
            _worker_init(cfg.resolved())
        for snr in cfg.snr_db:
            bits = errors = frames = 0
            for start in range(0, cfg.frames, cfg.chunk_size):
                chunk = [(snr, i) for i in
                         range(start, min(start + cfg.chunk_size, cfg.frames))]
                if pool is not None:
                    results = list(pool.map(_worker_frame, chunk))
                else:
                    results = [_worker_frame(a) for a in chunk]
                for nb, ne, _ok in results:
                    bits += nb
                    errors += ne
                    frames += 1
                if errors >= cfg.target_errors:
                    break
            points.append(BerPoint(snr, bits, errors, frames,
                                   cfg.i_iic if cfg.coded else 0,
                                   cfg.i_dec if cfg.coded else 0))
    finally:
        if pool is not None:
            pool.shutdown()
    return points


# ---------------------------------------------------------------------------
# PSD
# ---------------------------------------------------------------------------

def psd_estimate(signal: TimeSignal, nfft: int = 1024, overlap: float = 0.5):
    """Welch PSD, Hann window, peak-normalized to 0 dB.

    Returns (freq_hz, psd_db), frequencies centered around 0.
    """
    x = signal.samples
    if len(x) < nfft:
        raise ValueError(f"signal shorter than nfft ({len(x)} < {nfft})")
    freq, pxx = welch(x, fs=signal.sample_rate, window="hann", nperseg=nfft,
                      noverlap=int(nfft * overlap), return_onesided=False,
                      detrend=False, scaling="density")
    freq = np.fft.fftshift(freq)
    pxx = np.fft.fftshift(pxx)
    pxx = np.maximum(pxx, 1e-300)
    psd_db = 10.0 * np.log10(pxx / pxx.max())
    return freq, psd_db


def reference_signals(cfg: CampaignConfig, n_symbols: int = 600):
    """Long random FBMC and CP-OFDM signals on the same active grid."""
    out = {}
    for waveform in WAVEFORMS:
        wf_cfg = CampaignConfig.from_dict({**cfg.resolved(), "coded": False,
                                           "waveform": waveform})
        wf_ctx = SimContext(wf_cfg)
        modem = wf_ctx.new_modem()
        rng = rng_for(cfg.master_seed, f"psd/{waveform}")
        const = wf_ctx.constellation
        mm = const.bits_per_symbol
        bits = rng.integers(0, 2, len(wf_ctx.active) * n_symbols * mm)
        syms = map_bits(bits.astype(np.uint8), const)
        grid = np.zeros((cfg.m, n_symbols), dtype=complex)
        grid[wf_ctx.active, :] = syms.reshape(n_symbols, len(wf_ctx.active)).T
        out[waveform] = modem.modulate(QamFrame(grid))
    return out


# ---------------------------------------------------------------------------
# EXIT orchestration
# ---------------------------------------------------------------------------

def run_exit(cfg: CampaignConfig, snr_list=None, i_dec_list=(1, 2),
             percentile_mode: bool = False, n_realizations: int = 50,
             percentiles=(90.0,), frames: int = 3):
    """Inner/outer curves (plus trajectories), or percentile mode.

    Returns a dict of labeled ExitCurve/Trajectory objects; writing files
    is the CLI's job.
    """
    ctx = SimContext(cfg)
    grid = default_grid()
    if snr_list is None:
        snr_list = cfg.snr_db
    results = {"inner": [], "outer": [], "trajectories": [],
               "percentile": None, "individual": []}
    if percentile_mode:
        pc = percentile_curves(ctx.profile, snr_list[0], n_realizations,
                               percentiles, ctx.new_modem, ctx.constellation,
                               active=ctx.active, n_symbols=cfg.n_symbols,
                               frames=frames, grid=grid,
                               seed=derive_seed(cfg.master_seed, "exit/pct"),
                               sample_rate=cfg.sample_rate)
        results["percentile"] = pc.percentile
        results["individual"] = pc.individual
        return results
    modem = ctx.new_modem()
    rng = rng_for(cfg.master_seed, "channel/fixed")
    real = sample_realization(ctx.profile, cfg.sample_rate, rng)
    eff = effective_channel(modem, real)
    for snr in snr_list:
        curve = inner_exit_curve(snr, eff, modem, ctx.constellation,
                                 active=ctx.active, n_symbols=cfg.n_symbols,
                                 frames=frames, grid=grid,
                                 seed=derive_seed(cfg.master_seed,
                                                  f"exit/inner/{snr!r}"))
        results["inner"].append(curve)
    for i_dec in i_dec_list:
        curve = outer_exit_curve(ctx.code, i_dec, grid=grid, frames=50,
                                 seed=derive_seed(cfg.master_seed,
                                                  f"exit/outer/{i_dec}"))
        results["outer"].append(curve)
    for ic, oc in zip(results["inner"], results["outer"]):
        tr = trajectory(ic, oc)
        results["trajectories"].append((ic.meta, oc.meta, tr))
    return results


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------

def config_header(cfg: CampaignConfig, data_files=None) -> list[str]:
    if data_files is None:
        try:
            data_files = SimContext(cfg).data_files()
        except ValueError:
            data_files = ()
    lines = ["config: " + json.dumps(cfg.resolved(), sort_keys=True),
             "snr convention: Es/N0 per active subcarrier (dB); noise "
             "variance per complex sample = 10^(-snr_db/10)"]
    hashes = {Path(str(p)).name: git_blob_sha(p) for p in data_files}
    if hashes:
        lines.append("data_hashes: " + json.dumps(hashes, sort_keys=True))
    return lines


def write_ber_csv(points: list[BerPoint], cfg: CampaignConfig, path,
                  data_files=None) -> None:
    with open(path, "w") as fh:
        for line in config_header(cfg, data_files):
            fh.write(f"# {line}\n")
        fh.write("snr_db,waveform,i_dec,i_iic,frames,bits_sent,bit_errors,ber\n")
        for p in points:
            fh.write(f"{float(p.snr_db)!r},{cfg.waveform},{p.i_dec},{p.i_iic},"
                     f"{p.frames},{p.bits_sent},{p.bit_errors},{float(p.ber)!r}\n")


def write_psd_csv(freq, curves: dict, cfg: CampaignConfig, path) -> None:
    names = sorted(curves)
    with open(path, "w") as fh:
        for line in config_header(cfg):
            fh.write(f"# {line}\n")
        fh.write("freq_hz," + ",".join(n.lower() + "_db" for n in names) + "\n")
        for i, f in enumerate(freq):
            row = ",".join(repr(float(curves[n][i])) for n in names)
            fh.write(f"{float(f)!r},{row}\n")
