"""Quick invariant and oracle spot checks behind the `validate` subcommand.

Each check is a cheap, deterministic distillation of the full test suite,
printing one pass/fail line; the heavy Monte Carlo criteria live in the
acceptance tests instead.
"""

from __future__ import annotations

import numpy as np

import nfdmlab.channel as ch
import nfdmlab.modem as md
from nfdmlab.core import (
    ComplexSignal,
    FiberParams,
    NormalizationScheme,
    RandomStream,
    conjugate_lambda_grid,
    denormalize,
    normalize,
)
from nfdmlab.metrics import channel_memory_symbols, rate_efficiency
from nfdmlab.nft.glm import bnft
from nfdmlab.nft.oracle import zs_scatter_ode
from nfdmlab.nft.zs import fnft_continuous, nft_energy, zs_scatter_lp


def _shaped_burst(n_burst, n_guard, power_dbm, seed, scheme, oversampling=4):
    rng = RandomStream(seed, 0).generator()
    frame = md.random_frame(n_burst, n_guard, power_dbm, rng)
    w = md.shape_burst(frame, oversampling=oversampling)
    p_norm = 10 ** (power_dbm / 10.0) * 1e-3 / scheme.P0
    w = w.with_samples(w.samples * np.sqrt(p_norm * n_burst / w.energy()))
    return frame, w


def run_validation(verbose: bool = True):
    fiber = FiberParams()
    scheme = NormalizationScheme.from_fiber(20e-12, fiber)
    results = []

    def check(name, ok, detail):
        results.append((name, bool(ok), detail))
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    # normalization closures and spot values
    ok = (abs(scheme.Z0 - 3.9235e4) / 3.9235e4 < 1e-3
          and abs(scheme.P0 - 0.041783) / 0.041783 < 1e-3)
    check("normalization closures", ok,
          f"Z0={scheme.Z0:.4g} m, P0={scheme.P0 * 1e3:.4g} mW")

    mem = channel_memory_symbols(fiber, 50e9, 0.2)
    check("channel memory formula", abs(mem - 768.7) < 0.2, f"{mem:.1f} symbols")

    eta = float(rate_efficiency(100, 800))
    check("rate efficiency", abs(eta - 1 / 9) < 1e-12, f"eta(100,800)={eta:.4f}")

    psd = ch.ase_accumulated_psd(fiber)
    check("accumulated ASE PSD", abs(psd - 4.72e-17) / 4.72e-17 < 5e-3,
          f"{psd:.3e} W/Hz")

    # scattering vs fine-step ODE oracle on a small burst
    _, w = _shaped_burst(16, 32, -10.0, 1, scheme)
    lam = np.linspace(-0.6 * np.pi, 0.6 * np.pi, 65)
    pair = zs_scatter_lp(w, lam)
    a_o, b_o = zs_scatter_ode(w, lam, resolution=32)
    err = (np.linalg.norm(pair.a - a_o) + np.linalg.norm(pair.b - b_o)) / \
          (np.linalg.norm(a_o) + np.linalg.norm(b_o))
    check("layer peeling vs ODE oracle", err < 1e-4, f"rel err {err:.2e}")

    unimod = np.abs(np.abs(pair.a) ** 2 + np.abs(pair.b) ** 2 - 1).max()
    check("unimodularity", unimod < 1e-6, f"max dev {unimod:.2e}")

    # Parseval on a solitonless pulse
    tt = (-np.arange(4096)[::-1] + 2048) / 64.0
    q = 0.4 / np.cosh(tt - tt.mean())
    sech = ComplexSignal(q.astype(complex), dt=1 / 64, t_start=float(tt[0]),
                         units_mode="normalized")
    spec = fnft_continuous(sech, np.linspace(-8, 8, 2049), repair=False)
    e_nft, e_t = nft_energy(spec), sech.energy()
    check("Parseval identity", abs(e_nft - e_t) / e_t < 1e-3,
          f"|dE|/E = {abs(e_nft - e_t) / e_t:.2e}")

    # backward/forward round trip on the burst spectrum
    spec_b = fnft_continuous(w, conjugate_lambda_grid(w.n_samples, w.dt),
                             repair=False)
    q_syn = bnft(spec_b, w, validate=False)
    back = fnft_continuous(q_syn, spec_b.lambda_grid, repair=False)
    rt = np.linalg.norm(back.rho - spec_b.rho) / np.linalg.norm(spec_b.rho)
    check("fnft(bnft) round trip", rt < 1e-3, f"rel err {rt:.2e}")

    # noise-free energy conservation of the integrator
    wp = denormalize(w, scheme)
    quiet = ch.NoiseModel(enabled=False)
    out = ch.ssfm_propagate(wp, fiber, quiet, np.random.default_rng(0), pad=False)
    de = abs(out.energy() - wp.energy()) / wp.energy()
    check("SSFM energy conservation", de < 1e-9, f"rel dE {de:.1e}")

    # evolution consistency: spectral law on the fast link
    fib_fast = FiberParams(length=500e3)
    _, wf = _shaped_burst(16, 256, -12.0, 3, scheme)
    lamg = conjugate_lambda_grid(wf.n_samples, wf.dt)
    tx_spec = fnft_continuous(wf, lamg, repair=False)
    prop = ch.ssfm_propagate(denormalize(wf, scheme), fib_fast, quiet,
                             np.random.default_rng(0), pad_bandwidth=60e9)
    rx_spec = fnft_continuous(normalize(prop, scheme), lamg, repair=False)
    law = md.channel_law(tx_spec, fib_fast.length / scheme.Z0)
    ev = np.linalg.norm(rx_spec.rho - law.rho) / np.linalg.norm(law.rho)
    check("spectral evolution law", ev < 5e-3, f"rel err {ev:.2e}")

    # determinism across substreams
    r1 = RandomStream(7, 3).generator().normal(size=8)
    r2 = RandomStream(7, 3).generator().normal(size=8)
    check("random stream determinism", np.array_equal(r1, r2),
          "identical (seed, stream) draws")

    return results
