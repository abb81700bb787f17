"""Seeded Monte Carlo execution of the transceiver chains.

A sweep point is a set of independent bursts; burst i draws its noise and
data from the (seed, i) substream, so results are bit-identical for any
worker count.  Per-process context (pulse taps, lambda grids, warm power
scale) is cached keyed by the config hash.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from nfdmlab import channel as ch
from nfdmlab import modem as md
from nfdmlab.core import (
    ComplexSignal,
    NonlinearSpectrum,
    NormalizationScheme,
    RandomStream,
    conjugate_lambda_grid,
    denormalize,
    normalize,
)
from nfdmlab.errors import InvalidConfigurationError
from nfdmlab.harness.config import SWEEP_AXES, ExperimentConfig
from nfdmlab.metrics import PerformanceReport, SoftStats
from nfdmlab.nft.glm import bnft
from nfdmlab.nft.zs import WindowSpec, fnft_continuous, fnft_windowed


@dataclass
class _Context:
    """Per-config immutable precomputation shared by all bursts."""

    cfg: ExperimentConfig
    scheme: NormalizationScheme
    length_norm: float
    grid: ComplexSignal
    lambda_grid: np.ndarray
    inband: np.ndarray
    warm_scale: float | None = None


_CTX_CACHE: dict[str, _Context] = {}


def _context(cfg: ExperimentConfig) -> _Context:
    key = cfg.config_hash()
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        scheme = NormalizationScheme.from_fiber(cfg.T_s, cfg.fiber)
        n = (cfg.n_burst + cfg.n_guard) * cfg.oversampling
        dtn = 1.0 / cfg.oversampling
        grid = ComplexSignal(np.zeros(n), dt=dtn, t_start=-0.5 * n * dtn,
                             units_mode="normalized")
        lam = conjugate_lambda_grid(n, dtn)
        # receiver band: the RRC spectrum is confined to |f| <= (1+b)/2 in
        # symbol-rate units; keep a small margin
        lam_band = np.pi * 0.5 * (1.0 + cfg.rolloff) * 1.1
        inband = np.abs(lam) <= lam_band
        ctx = _Context(cfg, scheme, cfg.fiber.length / scheme.Z0, grid, lam, inband)
        _CTX_CACHE[key] = ctx
    return ctx


def _nfdm_burst(ctx: _Context, burst_index: int) -> tuple[SoftStats, float]:
    cfg = ctx.cfg
    rng = RandomStream(cfg.seed, burst_index).generator()
    frame = md.random_frame(cfg.n_burst, cfg.n_guard, cfg.launch_power_dbm, rng)
    w = md.shape_burst(frame, cfg.rolloff, cfg.oversampling)
    spec = md.nis_encode(w)
    if cfg.precompensation:
        spec = md.apply_phase_rotation(spec, "half", ctx.length_norm)

    def synth(s):
        return bnft(s, ctx.grid, validate=False)

    p_norm = 10 ** (cfg.launch_power_dbm / 10.0) * 1e-3 / ctx.scheme.P0
    denom = cfg.n_burst if cfg.power_mode == "burst" else (cfg.n_burst + cfg.n_guard)
    init = ctx.warm_scale or float(np.sqrt(p_norm * denom / w.energy()))
    scale, q0 = md.scale_spectrum_to_power(
        spec, synth, cfg.launch_power_dbm, cfg.n_burst, cfg.T_s, ctx.scheme,
        mode=cfg.power_mode, initial_scale=init)
    ctx.warm_scale = scale

    tx = md.dac_adc_filter(denormalize(q0, ctx.scheme))
    if cfg.system == "nfdm_awgn":
        rx_phys = ch.awgn_channel(tx, cfg.fiber, rng) if cfg.noise else tx
        rotation_length = 0.0
    else:
        noise_model = ch.NoiseModel(enabled=cfg.noise, eta_sp=cfg.fiber.eta_sp,
                                    granularity=cfg.noise_granularity)
        rx_phys = ch.ssfm_propagate(tx, cfg.fiber, noise_model, rng, dz=cfg.dz,
                                    pad_bandwidth=cfg.signal_bandwidth)
        rotation_length = ctx.length_norm
    rx_phys = md.dac_adc_filter(rx_phys)
    rx = normalize(rx_phys, ctx.scheme)

    lam_rx = ctx.lambda_grid[ctx.inband]
    if cfg.window_fraction is not None:
        effective_L = cfg.fiber.length * (0.5 if cfg.precompensation else 1.0)
        window = WindowSpec(T_w=cfg.window_fraction * rx.duration * ctx.scheme.T0,
                            link_beta2=cfg.fiber.beta2,
                            link_length=effective_L,
                            T0=ctx.scheme.T0)
        sub = fnft_windowed(rx, lam_rx, window)
    else:
        sub = fnft_continuous(rx, lam_rx)
    repaired = int(sub.flags.sum())

    rho_full = np.zeros(ctx.lambda_grid.size, dtype=np.complex128)
    rho_full[ctx.inband] = sub.rho
    spec_rx = NonlinearSpectrum(ctx.lambda_grid, rho_full)
    if rotation_length > 0.0:
        if cfg.precompensation:
            spec_rx = md.apply_phase_rotation(spec_rx, "half", rotation_length)
        else:
            spec_rx = md.apply_phase_rotation(spec_rx, "full_rx", rotation_length)
    w_rx = md.nis_decode(spec_rx, rx.dt, rx.t_start)
    soft = md.matched_filter_and_sample(w_rx, cfg.n_burst, cfg.n_guard,
                                        cfg.rolloff) / scale
    stats = SoftStats()
    stats.add_burst(soft, frame.bits, repaired)
    return stats, scale


def _baseline_burst(ctx: _Context, burst_index: int) -> tuple[SoftStats, float]:
    cfg = ctx.cfg
    rng = RandomStream(cfg.seed, burst_index).generator()
    frame = md.random_frame(cfg.n_burst, cfg.n_guard, cfg.launch_power_dbm, rng)
    w = md.shape_burst(frame, cfg.rolloff, cfg.oversampling)
    p_norm = 10 ** (cfg.launch_power_dbm / 10.0) * 1e-3 / ctx.scheme.P0
    denom = cfg.n_burst if cfg.power_mode == "burst" else (cfg.n_burst + cfg.n_guard)
    alpha = float(np.sqrt(p_norm * denom / w.energy()))
    tx = md.dac_adc_filter(denormalize(w.with_samples(w.samples * alpha), ctx.scheme))

    noise_model = ch.NoiseModel(enabled=cfg.noise, eta_sp=cfg.fiber.eta_sp,
                                granularity=cfg.noise_granularity)
    n_steps = ch.plan_steps(cfg.fiber, float(np.max(np.abs(tx.samples) ** 2)),
                            dz=cfg.dz)
    rx_phys = ch.ssfm_propagate(tx, cfg.fiber, noise_model, rng, dz=cfg.dz,
                                pad_bandwidth=cfg.signal_bandwidth)
    rx_phys = md.dac_adc_filter(rx_phys)
    if cfg.system == "edc":
        comp = ch.edc_receiver(rx_phys, cfg.fiber)
    else:
        comp = ch.dbp_receiver(rx_phys, cfg.fiber, dz=cfg.fiber.length / n_steps)
    rx = normalize(comp, ctx.scheme)
    soft = md.matched_filter_and_sample(rx, cfg.n_burst, cfg.n_guard,
                                        cfg.rolloff) / alpha
    stats = SoftStats()
    stats.add_burst(soft, frame.bits, 0)
    return stats, alpha


def _run_burst(cfg: ExperimentConfig, burst_index: int) -> SoftStats:
    ctx = _context(cfg)
    if cfg.system in ("nfdm", "nfdm_awgn"):
        stats, _ = _nfdm_burst(ctx, burst_index)
    else:
        stats, _ = _baseline_burst(ctx, burst_index)
    return stats


def _run_burst_list(cfg: ExperimentConfig, indices: list[int]):
    return [(i, _run_burst(cfg, i)) for i in indices]


def run_point(cfg: ExperimentConfig, workers: int = 1) -> PerformanceReport:
    """Execute all bursts of one sweep point.

    Per-burst statistics are always reduced in burst order, so the report is
    bit-identical for any worker count given the same seed.
    """
    indices = list(range(cfg.bursts))
    if workers <= 1 or cfg.bursts == 1:
        pairs = _run_burst_list(cfg, indices)
    else:
        chunks = [indices[k::workers] for k in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_burst_list, [cfg] * len(chunks), chunks)
        pairs = [item for part in parts for item in part]
    total = SoftStats()
    for _, stats in sorted(pairs, key=lambda item: item[0]):
        total.merge(stats)
    return total.report()


def run_sweep(cfg: ExperimentConfig, axis: str, values, workers: int = 1):
    """One report per axis value; axis is one of power|n_burst|n_guard|window."""
    if axis not in SWEEP_AXES:
        raise InvalidConfigurationError(f"axis must be one of {sorted(SWEEP_AXES)}")
    field_name = SWEEP_AXES[axis]
    rows = []
    for value in values:
        if field_name in ("n_burst", "n_guard"):
            value = int(value)
        point = cfg.replace(**{field_name: value})
        rows.append((value, run_point(point, workers=workers)))
    return rows


def find_peak(values, q_db):
    """Optimum (axis value, Q) from a sampled sweep: quadratic fit around
    the sampled maximum, falling back to the raw sample at the edges."""
    values = np.asarray(values, dtype=float)
    q = np.asarray(q_db, dtype=float)
    k = int(np.nanargmax(q))
    if k == 0 or k == q.size - 1:
        return float(values[k]), float(q[k])
    x = values[k - 1:k + 2]
    y = q[k - 1:k + 2]
    coef = np.polyfit(x, y, 2)
    if coef[0] >= 0:
        return float(values[k]), float(q[k])
    x_opt = -coef[1] / (2 * coef[0])
    x_opt = float(np.clip(x_opt, x[0], x[-1]))
    return x_opt, float(np.polyval(coef, x_opt))
