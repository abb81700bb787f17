"""Backward NFT: synthesize q(t) from a purely continuous spectrum.

Two routes are provided.

``bnft`` is the production path: an inverse layer-peeling of the discrete
scattering lattice (one unitary reflector per output sample, unit delays in
between).  Marching from the late-time edge, each step reads the newest
reflector off the leading delay tap of the field ratio and removes it with
an exact Mobius update, so the whole synthesis is O(N * N_lambda) with tiny
constants.  The contract is the round trip: fnft(bnft(rho)) must reproduce
rho within tolerance; spectra carrying discrete eigenvalues fail that and
raise.

``bnft_glm_dense`` is a direct Nystrom solver for the Gelfand-Levitan-
Marchenko integral equations, solving one dense system per output time.
It is far too slow for production frames but serves as an independent
referee for the fast path in the tests.
"""

from __future__ import annotations

import numba
import numpy as np

from nfdmlab.core import NORMALIZED, ComplexSignal, NonlinearSpectrum
from nfdmlab.errors import InvalidConfigurationError, SynthesisAccuracyError


def _check_conjugate_grid(spectrum: NonlinearSpectrum, n: int, dt: float):
    lam = spectrum.lambda_grid
    if lam.size != n:
        raise InvalidConfigurationError(
            f"lambda grid ({lam.size}) must match the time grid ({n})")
    span = lam[-1] - lam[0] + spectrum.d_lambda
    if not np.isclose(span, np.pi / dt, rtol=1e-6):
        raise InvalidConfigurationError(
            "lambda grid is not conjugate to the time grid")


@numba.njit(cache=True, fastmath=True)
def _dlp_peel(r, zeta, dt):  # pragma: no cover - jitted
    """Inverse layer peeling; consumes r in place, returns potential samples."""
    n_lam = r.shape[0]
    n_out = n_lam
    q = np.empty(n_out, dtype=np.complex128)
    for j in range(n_out - 1, -1, -1):
        acc = 0.0 + 0.0j
        for m in range(n_lam):
            acc += zeta[m] * r[m]
        rho = -acc / n_lam
        ar = abs(rho)
        if ar > 0.0:
            q[j] = np.conj(rho) / ar * (np.arctan(ar) / dt)
        else:
            q[j] = 0.0
        # remove reflector j and its delay: r_{j} -> r_{j-1}
        for m in range(n_lam):
            y = zeta[m] * r[m]
            r[m] = (y + rho) / (1.0 - np.conj(rho) * y)
    return q


def bnft(spectrum: NonlinearSpectrum, time_grid: ComplexSignal, *,
         validate: bool = True,
         roundtrip_tol: float = 1e-3) -> ComplexSignal:
    """Synthesize the normalized waveform whose continuous spectrum is rho.

    ``time_grid`` supplies the output grid (a normalized-units template
    signal; its samples are ignored).  The lambda grid must be conjugate to
    it.  With ``validate`` the round trip through the forward transform is
    checked and a :class:`SynthesisAccuracyError` raised beyond
    ``roundtrip_tol`` (relative L2), which is the symptom of discrete
    eigenvalues in the spectrum.
    """
    if time_grid.units_mode != NORMALIZED:
        raise InvalidConfigurationError("bnft expects a normalized time grid")
    n = time_grid.n_samples
    dt = time_grid.dt
    _check_conjugate_grid(spectrum, n, dt)

    lam = spectrum.lambda_grid
    # field ratio referenced at the early-time edge (Born-exact alignment)
    r = spectrum.rho * np.exp(2j * lam * time_grid.t_start)
    zeta = np.exp(-2j * lam * dt)
    q = _dlp_peel(np.ascontiguousarray(r, dtype=np.complex128),
                  np.ascontiguousarray(zeta), dt)
    if not np.all(np.isfinite(q.view(np.float64))):
        raise SynthesisAccuracyError("inverse layer peeling diverged "
                                     "(spectrum implies discrete eigenvalues)")
    out = ComplexSignal(q, dt=dt, t_start=time_grid.t_start, units_mode=NORMALIZED)
    if validate:
        from nfdmlab.nft.zs import fnft_continuous

        check = fnft_continuous(out, lam, repair=False)
        num = np.linalg.norm(check.rho - spectrum.rho)
        den = np.linalg.norm(spectrum.rho)
        residual = float(num / den) if den > 0 else float(num)
        if den > 0 and residual > roundtrip_tol:
            raise SynthesisAccuracyError(
                f"round-trip residual {residual:.3e} exceeds {roundtrip_tol:.1e}",
                residual=residual)
    return out


def born_synthesis(spectrum: NonlinearSpectrum, time_grid: ComplexSignal) -> ComplexSignal:
    """Linearized inverse: q(t) = -(1/pi) int conj(rho) exp(-2j lam t) dlam."""
    if time_grid.units_mode != NORMALIZED:
        raise InvalidConfigurationError("born_synthesis expects a normalized grid")
    lam = spectrum.lambda_grid
    t = time_grid.time_grid
    phase = np.exp(-2j * np.outer(t, lam))
    q = -(spectrum.d_lambda / np.pi) * phase @ np.conj(spectrum.rho)
    return time_grid.with_samples(q)


def glm_kernel(spectrum: NonlinearSpectrum, x: np.ndarray) -> np.ndarray:
    """GLM input kernel F(x) = (1/2 pi) int rho(lam) exp(j lam x) dlam."""
    lam = spectrum.lambda_grid
    phase = np.exp(1j * np.outer(x, lam))
    return (spectrum.d_lambda / (2.0 * np.pi)) * phase @ spectrum.rho


def bnft_glm_dense(spectrum: NonlinearSpectrum, time_grid: ComplexSignal, *,
                   refine: int = 2) -> ComplexSignal:
    """Reference backward NFT: GLM equations by Nystrom quadrature.

    From the triangular representation of the right Jost solution, the
    Marchenko system for this scattering convention is

        K1(t,y) - int_t^T K2*(t,s) F*(s+y) ds = F*(t+y)
        K2*(t,y) + int_t^T K1(t,s) F(s+y) ds = 0
        q(t) = -2 K1(t,t)

    with F(x) = (1/2 pi) int rho(lam) exp(j lam x) dlam.  Each output time
    gets its own dense solve on a grid refined by ``refine``; cost grows
    like N^4, so this is for validating the fast path at test scale only.
    """
    if time_grid.units_mode != NORMALIZED:
        raise InvalidConfigurationError("bnft_glm_dense expects a normalized grid")
    n = time_grid.n_samples
    dt = time_grid.dt
    t0 = time_grid.t_start
    h = dt / refine
    m_total = n * refine
    nodes = t0 + h * np.arange(m_total)
    # kernel samples F(x_j + y_k) = f_sum[j + k] on the refined grid
    f_sum = glm_kernel(spectrum, 2.0 * nodes[0] + h * np.arange(2 * m_total - 1))
    q = np.empty(n, dtype=np.complex128)
    for i_out in range(n):
        i0 = i_out * refine
        m = m_total - i0
        idx = np.arange(i0, m_total)
        ker = f_sum[idx[:, None] + idx[None, :]]
        block = np.zeros((2 * m, 2 * m), dtype=np.complex128)
        block[:m, :m] = np.eye(m)
        block[:m, m:] = -h * np.conj(ker)
        block[m:, :m] = h * ker
        block[m:, m:] = np.eye(m)
        rhs = np.concatenate([np.conj(f_sum[i0 + idx]), np.zeros(m)])
        sol = np.linalg.solve(block, rhs)
        q[i_out] = -2.0 * sol[0]
    return time_grid.with_samples(q)
