"""NIS transceiver blocks: bit mapping, pulse shaping, spectral encode/decode.

The linear information spectrum is mapped onto the continuous nonlinear
spectrum under the fixed convention lam = -pi f (normalized frequency), for
which the linear limit of the scattering gives rho(lam) = -conj(W(-lam/pi)).
All DSP here runs in normalized units; only the DAC/ADC filter works on the
physical waveform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from nfdmlab.core import (
    NORMALIZED,
    PHYSICAL,
    ComplexSignal,
    NonlinearSpectrum,
    NormalizationScheme,
)
from nfdmlab.errors import InvalidConfigurationError, UnitsMismatchError

# Gray mapping, decision preference order resolves exact ties to 00
QPSK_BITS = ((0, 0), (0, 1), (1, 1), (1, 0))
QPSK_POINTS = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2.0)

RRC_SPAN_DEFAULT = 32  # symbols, keeps tails below -50 dB


def map_bits_qpsk(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size % 2:
        raise InvalidConfigurationError("bit count must be even")
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidConfigurationError("bits must be 0/1")
    idx = np.array([QPSK_BITS.index((int(b0), int(b1)))
                    for b0, b1 in bits.reshape(-1, 2)])
    return QPSK_POINTS[idx]


def decide_qpsk(soft_symbols) -> np.ndarray:
    """Minimum Euclidean distance decisions; returns the bit sequence."""
    soft = np.asarray(soft_symbols, dtype=np.complex128)
    d2 = np.abs(soft[:, None] - QPSK_POINTS[None, :]) ** 2
    idx = np.argmin(d2, axis=1)  # first minimum wins: ties resolve to 00
    bits = np.array([QPSK_BITS[i] for i in idx], dtype=np.int64)
    return bits.reshape(-1)


def rrc_taps(rolloff: float, oversampling: int,
             span: int = RRC_SPAN_DEFAULT) -> np.ndarray:
    """Root-raised-cosine taps over `span` symbols, normalized so that the
    shaper/matched-filter cascade has unit gain at the symbol instants."""
    if not (0.0 <= rolloff <= 1.0):
        raise InvalidConfigurationError("rolloff must be in [0, 1]")
    n = span * oversampling
    t = (np.arange(n + 1) - n / 2) / oversampling  # in symbol periods
    taps = np.empty(t.size)
    b = rolloff
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            taps[i] = 1.0 - b + 4.0 * b / np.pi
        elif b > 0 and abs(abs(ti) - 1.0 / (4.0 * b)) < 1e-9:
            taps[i] = (b / np.sqrt(2.0)) * ((1 + 2 / np.pi) * np.sin(np.pi / (4 * b))
                                            + (1 - 2 / np.pi) * np.cos(np.pi / (4 * b)))
        else:
            num = (np.sin(np.pi * ti * (1 - b))
                   + 4 * b * ti * np.cos(np.pi * ti * (1 + b)))
            den = np.pi * ti * (1 - (4 * b * ti) ** 2)
            taps[i] = num / den
    taps /= np.sqrt(np.sum(taps ** 2) / oversampling)
    return taps


@dataclass(frozen=True)
class BurstFrame:
    """One burst: information bits, QPSK symbols, guard geometry, power."""

    bits: np.ndarray
    symbols: np.ndarray
    n_guard: int
    launch_power_dbm: float

    def __post_init__(self):
        if self.symbols.size * 2 != self.bits.size:
            raise InvalidConfigurationError("bits/symbols size mismatch")
        if self.n_guard % 2:
            raise InvalidConfigurationError("guard length must be even "
                                            "(split equally around the burst)")

    @property
    def n_burst(self) -> int:
        return self.symbols.size


def random_frame(n_burst: int, n_guard: int, launch_power_dbm: float,
                 rng: np.random.Generator) -> BurstFrame:
    bits = rng.integers(0, 2, size=2 * n_burst)
    return BurstFrame(bits=bits, symbols=map_bits_qpsk(bits),
                      n_guard=n_guard, launch_power_dbm=launch_power_dbm)


def symbol_sample_indices(n_burst: int, n_guard: int, oversampling: int) -> np.ndarray:
    """Sample index of each symbol center in the frame."""
    k = np.arange(n_burst)
    return (n_guard // 2 + k) * oversampling + oversampling // 2


def shape_burst(frame: BurstFrame, rolloff: float = 0.2,
                oversampling: int = 4,
                span: int = RRC_SPAN_DEFAULT) -> ComplexSignal:
    """RRC pulse train in normalized units (T_s = 1), burst centered in the
    frame with the guard split equally before and after."""
    if oversampling % 2:
        raise InvalidConfigurationError("oversampling must be even "
                                        "(symbol centers must hit samples)")
    if span > frame.n_guard:
        raise InvalidConfigurationError(
            f"RRC span {span} exceeds the guard interval {frame.n_guard}")
    n_total = (frame.n_burst + frame.n_guard) * oversampling
    train = np.zeros(n_total, dtype=np.complex128)
    train[symbol_sample_indices(frame.n_burst, frame.n_guard, oversampling)] = \
        frame.symbols
    taps = rrc_taps(rolloff, oversampling, span)
    shaped = sfft.fft(train) * sfft.fft(np.roll(np.pad(taps, (0, n_total - taps.size)),
                                                -(taps.size // 2)))
    samples = sfft.ifft(shaped)
    dt = 1.0 / oversampling
    return ComplexSignal(samples, dt=dt, t_start=-0.5 * n_total * dt,
                         units_mode=NORMALIZED)


def matched_filter_and_sample(waveform: ComplexSignal, n_burst: int,
                              n_guard: int, rolloff: float = 0.2,
                              span: int = RRC_SPAN_DEFAULT) -> np.ndarray:
    """RRC matched filter then one complex sample per transmitted symbol."""
    if waveform.units_mode != NORMALIZED:
        raise UnitsMismatchError("matched filter runs on the normalized waveform")
    n_total = waveform.n_samples
    oversampling = round(1.0 / waveform.dt)
    if (n_burst + n_guard) * oversampling != n_total:
        raise InvalidConfigurationError("frame geometry mismatch")
    taps = rrc_taps(rolloff, oversampling, span)
    spec = sfft.fft(waveform.samples) * sfft.fft(
        np.roll(np.pad(taps, (0, n_total - taps.size)), -(taps.size // 2)))
    filtered = sfft.ifft(spec) / oversampling
    return filtered[symbol_sample_indices(n_burst, n_guard, oversampling)]


def nis_encode(waveform: ComplexSignal) -> NonlinearSpectrum:
    """Map the linear Fourier spectrum onto the continuous nonlinear
    spectrum: rho(-pi f) = -conj(W(f))."""
    if waveform.units_mode != NORMALIZED:
        raise UnitsMismatchError("nis_encode expects a normalized waveform")
    w_spec = sfft.fftshift(sfft.fft(waveform.samples)) * waveform.dt
    # undo the FFT's t=0-at-index-0 reference: actual first sample is t_start
    f = sfft.fftshift(sfft.fftfreq(waveform.n_samples, d=waveform.dt))
    w_spec = w_spec * np.exp(-2j * np.pi * f * waveform.t_start)
    lam = -np.pi * f[::-1]
    rho = (-np.conj(w_spec))[::-1]
    return NonlinearSpectrum(np.ascontiguousarray(lam), np.ascontiguousarray(rho))


def nis_decode(spectrum: NonlinearSpectrum, dt: float,
               t_start: float) -> ComplexSignal:
    """Inverse of :func:`nis_encode` onto the given normalized time grid."""
    n = spectrum.n_points
    f = sfft.fftshift(sfft.fftfreq(n, d=dt))
    expected_lam = -np.pi * f[::-1]
    if not np.allclose(expected_lam, spectrum.lambda_grid,
                       atol=1e-9 * max(1.0, abs(expected_lam[-1]))):
        raise InvalidConfigurationError("spectrum grid is not conjugate to "
                                        "the requested time grid")
    w_spec = -np.conj(spectrum.rho[::-1])
    w_spec = w_spec * np.exp(2j * np.pi * f * t_start)
    samples = sfft.ifft(sfft.ifftshift(w_spec)) / dt
    return ComplexSignal(samples, dt=dt, t_start=t_start, units_mode=NORMALIZED)


def apply_phase_rotation(spectrum: NonlinearSpectrum, kind: str,
                         length_normalized: float) -> NonlinearSpectrum:
    """Pointwise spectral rotation; |rho| is preserved at every lambda.

    kind 'full_rx' multiplies by exp(+4j lam^2 L'), removing the channel law
    exp(-4j lam^2 L') entirely at the receiver; 'half' multiplies by
    exp(+2j lam^2 L') and is applied at both ends for precompensation.
    """
    if length_normalized < 0:
        raise InvalidConfigurationError("normalized length must be >= 0")
    lam2 = spectrum.lambda_grid ** 2
    if kind == "full_rx":
        factor = np.exp(4j * lam2 * length_normalized)
    elif kind == "half":
        factor = np.exp(2j * lam2 * length_normalized)
    else:
        raise InvalidConfigurationError(f"unknown rotation kind {kind!r}")
    return spectrum.with_rho(spectrum.rho * factor)


def channel_law(spectrum: NonlinearSpectrum,
                length_normalized: float) -> NonlinearSpectrum:
    """Ideal lossless propagation of the continuous spectrum,
    rho -> rho exp(-4j lam^2 L')."""
    lam2 = spectrum.lambda_grid ** 2
    return spectrum.with_rho(spectrum.rho * np.exp(-4j * lam2 * length_normalized))


def dac_adc_filter(waveform: ComplexSignal, bandwidth: float = 100e9) -> ComplexSignal:
    """Ideal brick-wall converter model passing |f| <= bandwidth (one-sided)."""
    if waveform.units_mode != PHYSICAL:
        raise UnitsMismatchError("converter filter works on the physical waveform")
    f = sfft.fftfreq(waveform.n_samples, d=waveform.dt)
    spec = sfft.fft(waveform.samples)
    spec[np.abs(f) > bandwidth] = 0.0
    return waveform.with_samples(sfft.ifft(spec))


def launch_power_dbm(waveform: ComplexSignal, n_burst: int, T_s: float,
                     scheme: NormalizationScheme | None = None,
                     mode: str = "burst") -> float:
    """Average launch power over the burst support (default) or full frame."""
    if waveform.units_mode == NORMALIZED:
        if scheme is None:
            raise InvalidConfigurationError("scheme needed for normalized input")
        energy_j = waveform.energy() * scheme.P0 * scheme.T0
    else:
        energy_j = waveform.energy()
    if mode == "burst":
        power_w = energy_j / (n_burst * T_s)
    elif mode == "frame":
        power_w = energy_j / (waveform.duration if waveform.units_mode == PHYSICAL
                              else waveform.duration * (scheme.T0 if scheme else 1.0))
    else:
        raise InvalidConfigurationError(f"unknown power mode {mode!r}")
    return 10.0 * np.log10(power_w / 1e-3)


def scale_spectrum_to_power(spectrum: NonlinearSpectrum,
                            synthesize,
                            target_dbm: float,
                            n_burst: int,
                            T_s: float,
                            scheme: NormalizationScheme,
                            mode: str = "burst",
                            tol_db: float = 0.01,
                            max_iter: int = 12,
                            initial_scale: float | None = None):
    """Real scale on rho so the synthesized waveform hits the launch power.

    ``synthesize`` maps a NonlinearSpectrum to a normalized ComplexSignal
    (the backward NFT).  The NFT is nonlinear, so the scale is found by
    secant iteration on the dB error; returns (scale, waveform).
    """
    def power_err(u):
        wf = synthesize(spectrum.with_rho(spectrum.rho * 10.0 ** u))
        return launch_power_dbm(wf, n_burst, T_s, scheme, mode) - target_dbm, wf

    # secant in log10(scale): dB error is smooth and monotonic there
    u0 = 0.0 if initial_scale is None else float(np.log10(initial_scale))
    err0, wf0 = power_err(u0)
    if abs(err0) <= tol_db:
        return 10.0 ** u0, wf0
    u1 = u0 - err0 / 20.0  # linear-map slope guess
    for _ in range(max_iter):
        err1, wf1 = power_err(u1)
        if abs(err1) <= tol_db:
            return 10.0 ** u1, wf1
        if err1 == err0:
            u0, err0 = u1, err1
            u1 = u1 - err1 / 20.0
            continue
        du = (u1 - u0) * err1 / (err1 - err0)
        u0, err0 = u1, err1
        u1 = u1 - du
    raise InvalidConfigurationError(
        f"power control did not converge to {target_dbm} dBm "
        f"(last error {err1:+.3f} dB)")
