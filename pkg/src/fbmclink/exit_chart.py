"""Mutual-information estimation and EXIT transfer-curve machinery.

MI between bipolar bits and their LLRs is measured by the time-average
log2(1+exp(-x*L)) estimator; the consistent-Gaussian model provides the
J-function (by quadrature) and its approximate inverse (the 3-constant
fit H1=0.3073, H2=0.8935, H3=1.1064).  Transfer curves are measured for
the inner decoder (demapper plus interference cancellation, driven by
synthetic a-priori LLRs at fixed channel/noise) and the outer LDPC
decoder; the staircase trajectory between a curve pair predicts
convergence of the iterative receiver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .channel import EffectiveChannel, zf_equalize
from .ldpc import LdpcCode, sum_product_decode
from .mapping import Constellation, soft_demap, soft_map

__all__ = [
    "ExitCurve",
    "Trajectory",
    "PercentileCurves",
    "mi_from_samples",
    "mi_from_sigma",
    "sigma_from_mi",
    "gen_apriori_llrs",
    "default_grid",
    "inner_exit_curve",
    "outer_exit_curve",
    "trajectory",
    "percentile_curves",
]

_H1, _H2, _H3 = 0.3073, 0.8935, 1.1064
_LN2 = math.log(2.0)


@dataclass
class ExitCurve:
    """Sampled a-priori -> extrinsic MI transfer function."""

    ia: np.ndarray
    ie: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ia = np.asarray(self.ia, dtype=float)
        self.ie = np.asarray(self.ie, dtype=float)
        if self.ia.shape != self.ie.shape or self.ia.ndim != 1:
            raise ValueError("ia and ie must be equal-length vectors")
        if np.any(np.diff(self.ia) <= 0) or self.ia[0] < 0 or self.ia[-1] > 1:
            raise ValueError("ia grid must be strictly increasing within [0, 1]")
        if np.any((self.ie < 0) | (self.ie > 1)):
            raise ValueError("ie values must lie in [0, 1]")

    def __call__(self, x) -> np.ndarray:
        """Linear interpolation (constant beyond the sampled range)."""
        return np.interp(x, self.ia, self.ie)

    def to_csv(self, path, header_lines=()) -> None:
        meta = " ".join(f"{k}={v}" for k, v in self.meta.items())
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write(f"# {meta}\n")
            fh.write("ia,ie\n")
            for a, e in zip(self.ia, self.ie):
                fh.write(f"{float(a)!r},{float(e)!r}\n")


@dataclass
class Trajectory:
    """Alternating (ia, ie) staircase between an inner/outer curve pair."""

    points: list
    converged: bool

    def to_csv(self, path, meta: dict | None = None, header_lines=()) -> None:
        head = " ".join(f"{k}={v}" for k, v in (meta or {}).items())
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write(f"# converged={self.converged} {head}\n")
            fh.write("step,ia,ie\n")
            for i, (a, e) in enumerate(self.points):
                fh.write(f"{i},{float(a)!r},{float(e)!r}\n")


def mi_from_samples(bits: np.ndarray, llrs: np.ndarray) -> float:
    """Time-average MI estimate between bipolar bits and their LLRs."""
    bits = np.asarray(bits, dtype=float).ravel()
    llrs = np.asarray(llrs, dtype=float).ravel()
    if bits.shape != llrs.shape or len(bits) < 1:
        raise ValueError("need equal-length, nonempty bit and LLR vectors")
    terms = np.logaddexp(0.0, -bits * llrs) / _LN2
    return float(np.clip(1.0 - terms.mean(), 0.0, 1.0))


def mi_from_sigma(sigma_l: float) -> float:
    """J-function: MI of a consistent Gaussian LLR with std ``sigma_l``."""
    if sigma_l < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma_l < 1e-9:
        return 0.0
    mu = sigma_l**2 / 2.0

    def integrand(lam):
        gauss = math.exp(-((lam - mu) ** 2) / (2.0 * sigma_l**2))
        return gauss / (math.sqrt(2.0 * math.pi) * sigma_l) * (
            np.logaddexp(0.0, -lam) / _LN2
        )

    val, _ = quad(integrand, mu - 10.0 * sigma_l, mu + 10.0 * sigma_l,
                  epsabs=1e-9, limit=200)
    return float(np.clip(1.0 - val, 0.0, 1.0))


def sigma_from_mi(i: float) -> float:
    """Approximate inverse J-function (3-constant fit)."""
    if not 0.0 <= i < 1.0:
        raise ValueError("MI must lie in [0, 1); sigma is unbounded at 1")
    if i == 0.0:
        return 0.0
    return (-(1.0 / _H1) * math.log2(1.0 - i ** (1.0 / _H3))) ** (1.0 / (2.0 * _H2))


def gen_apriori_llrs(i: float, bits: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
    """Synthetic consistent-Gaussian a-priori LLRs at MI level ``i``.

    L = (sigma^2/2) x + N(0, sigma^2) with sigma = sigma_from_mi(i).
    """
    sigma = sigma_from_mi(i)
    bits = np.asarray(bits, dtype=float)
    return (sigma**2 / 2.0) * bits + sigma * rng.standard_normal(bits.shape)


def default_grid(points: int = 21) -> np.ndarray:
    """Uniform a-priori MI grid on [0, 0.999] (1 excluded: sigma unbounded)."""
    return np.linspace(0.0, 0.999, points)


# ---------------------------------------------------------------------------
# inner decoder (demapper + interference cancellation) transfer curve
# ---------------------------------------------------------------------------

def _interference_ops(eff: EffectiveChannel):
    a0 = np.abs(eff.same_symbol) ** 2
    np.fill_diagonal(a0, 0.0)
    return a0, {d: np.abs(m) ** 2 for d, m in eff.cross_symbol.items()}


def interference_estimate_grid(means: np.ndarray, eff: EffectiveChannel) -> np.ndarray:
    """Frequency-domain ICI+ISI reconstruction for a whole mean grid."""
    off_diag = eff.same_symbol - np.diag(eff.diag)
    est = off_diag @ means
    n = means.shape[1]
    for d, mat in eff.cross_symbol.items():
        contrib = mat @ means
        if d > 0:
            est[:, : n - d] += contrib[:, d:]
        else:
            est[:, -d:] += contrib[:, : n + d]
    return est


def interference_variance_grid(variances: np.ndarray, eff: EffectiveChannel) -> np.ndarray:
    """Residual interference power per slot from soft-symbol variances."""
    a0, cross = _interference_ops(eff)
    var = a0 @ variances
    n = variances.shape[1]
    for d, mat in cross.items():
        contrib = mat @ variances
        if d > 0:
            var[:, : n - d] += contrib[:, d:]
        else:
            var[:, -d:] += contrib[:, : n + d]
    return var


def inner_exit_curve(snr_db: float, eff: EffectiveChannel, modem,
                     constellation: Constellation, *,
                     active: np.ndarray | None = None,
                     n_symbols: int = 8, frames: int = 4,
                     grid: np.ndarray | None = None,
                     seed: int = 0,
                     genie_variance: bool = False) -> ExitCurve:
    """Measure the demapper+IIC transfer curve at one SNR.

    Random coded-equivalent bits are transmitted through the fixed
    channel realization behind ``eff``; per grid point, consistent
    Gaussian a-priori LLRs for the true bits drive one soft-map /
    cancel / demap pass and the extrinsic MI is measured against the
    true bits.  The same data/noise draws are reused across the grid
    (common random numbers) so curves are smooth in ia.
    """
    from .mapping import map_bits
    from .modem import QamFrame, TimeSignal

    m = eff.m
    if active is None:
        active = np.arange(m)
    active = np.asarray(active)
    if grid is None:
        grid = default_grid()
    mm = constellation.bits_per_symbol
    n_slots = len(active) * n_symbols
    noise_var = 10.0 ** (-snr_db / 10.0)
    gain = modem.noise_gain()[active]
    diag = eff.diag[active]

    samples_x = [[] for _ in grid]
    samples_l = [[] for _ in grid]
    for fr in range(frames):
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, 0x1C, fr]))
        bits = rng.integers(0, 2, n_slots * mm).astype(np.uint8)
        syms = map_bits(bits, constellation)
        frame = np.zeros((m, n_symbols), dtype=complex)
        frame[active, :] = syms.reshape(n_symbols, len(active)).T
        x = modem.modulate(QamFrame(frame))
        y = np.convolve(x.samples, eff.h)
        noise = (rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y)))
        y = y + np.sqrt(noise_var / 2.0) * noise
        r0 = modem.demodulate(TimeSignal(y, x.sample_rate, x.symbol_spacing),
                              n_symbols).symbols
        signs = 1.0 - 2.0 * bits.astype(float)
        apriori_noise = rng.standard_normal(n_slots * mm)
        for gi, ia in enumerate(grid):
            sigma = sigma_from_mi(ia)
            la = (sigma**2 / 2.0) * signs + sigma * apriori_noise
            la_slots = la.reshape(n_slots, mm)
            means_v, vars_v = soft_map(la_slots, constellation)
            means = np.zeros((m, n_symbols), dtype=complex)
            variances = np.zeros((m, n_symbols))
            means[active, :] = means_v.reshape(n_symbols, len(active)).T
            variances[active, :] = vars_v.reshape(n_symbols, len(active)).T
            est = interference_estimate_grid(means, eff)
            rc = r0 - est
            if genie_variance:
                int_var = np.zeros_like(variances)
            else:
                int_var = interference_variance_grid(variances, eff)
            eq = np.empty((len(active), n_symbols), dtype=complex)
            for j in range(n_symbols):
                eqj, _ = zf_equalize(rc[:, j], eff)
                eq[:, j] = eqj[active]
            var_eff = (noise_var * gain[:, None] + int_var[active, :]) / (
                np.maximum(np.abs(diag[:, None]) ** 2, 1e-24))
            r_vec = eq.T.ravel()
            var_vec = np.maximum(var_eff.T.ravel(), 1e-30)
            le = soft_demap(r_vec, var_vec, la_slots, constellation)
            samples_x[gi].append(signs)
            samples_l[gi].append(le.ravel())
    ie = np.array([
        mi_from_samples(np.concatenate(xs), np.concatenate(ls))
        for xs, ls in zip(samples_x, samples_l)
    ])
    return ExitCurve(grid, ie, {"kind": "inner", "snr_db": snr_db, "seed": seed,
                                "frames": frames})


def outer_exit_curve(code: LdpcCode, i_dec: int,
                     grid: np.ndarray | None = None,
                     frames: int = 50, seed: int = 0) -> ExitCurve:
    """LDPC decoder transfer curve at ``i_dec`` iterations."""
    if grid is None:
        grid = default_grid()
    ie = np.zeros(len(grid))
    all_x = []
    all_noise = []
    all_cw = []
    for fr in range(frames):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x0D, fr]))
        bits = rng.integers(0, 2, code.k).astype(np.uint8)
        cw = code.encode(bits)
        all_cw.append(cw)
        all_x.append(1.0 - 2.0 * cw.astype(float))
        all_noise.append(rng.standard_normal(code.n))
    x = np.stack(all_x)
    noise = np.stack(all_noise)
    samples = []
    for gi, ia in enumerate(grid):
        sigma = sigma_from_mi(ia)
        la = (sigma**2 / 2.0) * x + sigma * noise
        res = sum_product_decode(code, la, i_dec, early_stop=False)
        ie[gi] = mi_from_samples(x.ravel(), res.ext.values.ravel())
    return ExitCurve(grid, ie, {"kind": "outer", "i_dec": i_dec, "seed": seed,
                                "frames": frames})


def trajectory(inner: ExitCurve, outer: ExitCurve, max_steps: int = 64,
               eps: float = 1e-3) -> Trajectory:
    """Staircase MI exchange: inner lifts ie, outer advances ia.

    Converged means the staircase reached ia >= 1-eps, i.e. the outer
    decoder's extrinsic MI hit (almost) one, which is what successful
    decoding requires; the inner extrinsic axis saturates below one at
    any finite SNR, so the (1,1) target is judged on the decoder axis.
    Curves intersecting earlier stall the staircase and block the tunnel.
    """
    points = []
    ia = 0.0
    converged = False
    for _ in range(max_steps):
        ie = float(inner(ia))
        points.append((ia, ie))
        ia_next = float(outer(ie))
        points.append((ia_next, ie))
        if ia_next >= 1.0 - eps:
            converged = True
            break
        if ia_next <= ia + 1e-9:
            break
        ia = ia_next
    return Trajectory(points, converged)


@dataclass
class PercentileCurves:
    """Individual inner curves plus their pointwise coverage percentiles."""

    individual: list
    percentile: dict


def percentile_curves(profile, snr_db: float, n_realizations: int,
                      percentiles, modem_factory, constellation,
                      *, active=None, n_symbols: int = 8, frames: int = 2,
                      grid=None, seed: int = 0,
                      sample_rate: float = 1.92e6) -> PercentileCurves:
    """Pointwise outage percentiles of inner curves over random channels.

    The percentile parameter is coverage: the value returned at level p
    is achieved (met or exceeded) by at least p percent of realizations,
    i.e. the (100 - p)-th order percentile with the 'lower' method.
    Measurement seeds are shared across realizations (common random
    numbers) so a deterministic profile yields identical curves.
    """
    from .channel import effective_channel, sample_realization

    if grid is None:
        grid = default_grid()
    curves = []
    for i in range(n_realizations):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC4, i]))
        real = sample_realization(profile, sample_rate, rng)
        modem = modem_factory()
        eff = effective_channel(modem, real)
        curve = inner_exit_curve(snr_db, eff, modem, constellation,
                                 active=active, n_symbols=n_symbols,
                                 frames=frames, grid=grid, seed=seed)
        curve.meta.update({"realization": i, "profile": profile.name})
        curves.append(curve)
    stack = np.stack([c.ie for c in curves])
    out = {}
    for p in percentiles:
        vals = np.percentile(stack, 100.0 - p, axis=0, method="lower")
        out[p] = ExitCurve(np.asarray(grid), vals,
                           {"kind": "percentile", "percentile": p,
                            "snr_db": snr_db, "seed": seed,
                            "n_realizations": n_realizations})
    return PercentileCurves(curves, out)
