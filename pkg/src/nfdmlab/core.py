"""Shared containers, grids, unit normalization and seeded RNG streams.

Everything downstream works on two objects: a uniformly sampled complex
baseband waveform (:class:`ComplexSignal`) and a continuous nonlinear
spectrum on a uniform grid of the real spectral parameter
(:class:`NonlinearSpectrum`).  Physical quantities use SI units (s, m, W);
the normalized domain is the one in which the focusing NLSE reads
``j q_z = q_tt + 2 |q|^2 q`` and the continuous spectrum evolves as
``exp(-4j lam^2 z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from nfdmlab.errors import InvalidConfigurationError, UnitsMismatchError

PHYSICAL = "physical"
NORMALIZED = "normalized"

PLANCK = 6.62607015e-34  # J s
DEFAULT_CARRIER_FREQ = 193.41e12  # Hz, 1550 nm band


def _as_complex_array(x) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.complex128)
    if arr.ndim != 1:
        raise InvalidConfigurationError("samples must be one-dimensional")
    return arr


@dataclass(frozen=True)
class ComplexSignal:
    """Uniformly sampled complex baseband waveform.

    ``samples`` have unit sqrt(W) in physical mode and are dimensionless in
    normalized mode.  Instances are immutable; all operations return new
    signals.
    """

    samples: np.ndarray
    dt: float
    t_start: float
    units_mode: str = PHYSICAL

    def __post_init__(self):
        arr = _as_complex_array(self.samples)
        if arr.size < 1:
            raise InvalidConfigurationError("signal needs at least one sample")
        if not (self.dt > 0):
            raise InvalidConfigurationError(f"dt must be positive, got {self.dt}")
        if self.units_mode not in (PHYSICAL, NORMALIZED):
            raise InvalidConfigurationError(f"unknown units_mode {self.units_mode!r}")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise InvalidConfigurationError("samples contain non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n_samples * self.dt

    @property
    def time_grid(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_samples)

    @property
    def frequency_grid(self) -> np.ndarray:
        """Conjugate frequency grid (cycles per unit time), ascending."""
        return np.fft.fftshift(np.fft.fftfreq(self.n_samples, d=self.dt))

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.dt, self.t_start, self.units_mode)


@dataclass(frozen=True)
class NonlinearSpectrum:
    """Continuous nonlinear spectrum rho(lam) on a uniform ascending grid.

    Optionally carries the raw scattering pair (a, b) and per-point
    instability flags; where present and unflagged rho = b/a holds
    pointwise.
    """

    lambda_grid: np.ndarray
    rho: np.ndarray
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    flags: np.ndarray | None = None

    def __post_init__(self):
        grid = np.ascontiguousarray(self.lambda_grid, dtype=np.float64)
        rho = _as_complex_array(self.rho)
        if grid.ndim != 1 or grid.size < 2:
            raise InvalidConfigurationError("lambda_grid needs at least two points")
        if grid.size != rho.size:
            raise InvalidConfigurationError("lambda_grid and rho sizes differ")
        d = np.diff(grid)
        if not np.all(d > 0):
            raise InvalidConfigurationError("lambda_grid must be strictly increasing")
        if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12 * abs(d[0])):
            raise InvalidConfigurationError("lambda_grid must be uniform")
        grid.setflags(write=False)
        rho.setflags(write=False)
        object.__setattr__(self, "lambda_grid", grid)
        object.__setattr__(self, "rho", rho)
        for name in ("a", "b"):
            val = getattr(self, name)
            if val is not None:
                val = _as_complex_array(val)
                if val.size != grid.size:
                    raise InvalidConfigurationError(f"{name} size mismatch")
                val.setflags(write=False)
                object.__setattr__(self, name, val)
        flags = self.flags
        if flags is None:
            flags = np.zeros(grid.size, dtype=bool)
        else:
            flags = np.ascontiguousarray(flags, dtype=bool)
            if flags.size != grid.size:
                raise InvalidConfigurationError("flags size mismatch")
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)

    @property
    def d_lambda(self) -> float:
        return float(self.lambda_grid[1] - self.lambda_grid[0])

    @property
    def n_points(self) -> int:
        return self.lambda_grid.size

    def with_rho(self, rho, flags=None) -> "NonlinearSpectrum":
        return NonlinearSpectrum(self.lambda_grid, rho, self.a, self.b,
                                 self.flags if flags is None else flags)


@dataclass(frozen=True)
class FiberParams:
    """Physical link description.

    beta2 must be negative (anomalous dispersion): the vanishing-boundary
    NFT used here exists only in the focusing regime.
    """

    alpha_db_per_km: float = 0.2
    beta2: float = -20.39e-27  # s^2/m
    gamma: float = 1.22e-3  # 1/(W m)
    length: float = 2000e3  # m
    eta_sp: float = 4.0
    carrier_freq: float = DEFAULT_CARRIER_FREQ

    def __post_init__(self):
        if not (self.length > 0):
            raise InvalidConfigurationError("fiber length must be positive")
        if self.gamma < 0:
            raise InvalidConfigurationError("gamma must be non-negative")
        if not (self.beta2 < 0):
            raise InvalidConfigurationError(
                "beta2 must be negative (focusing regime required)")
        if self.eta_sp < 1.0:
            raise InvalidConfigurationError("eta_sp must be >= 1 when noise is enabled")
        if self.carrier_freq <= 0:
            raise InvalidConfigurationError("carrier frequency must be positive")

    @property
    def alpha_linear(self) -> float:
        """Power attenuation coefficient in 1/m."""
        return self.alpha_db_per_km * np.log(10.0) / 10.0 / 1e3


@dataclass(frozen=True)
class NormalizationScheme:
    """(T0, Z0, P0) triple mapping physical units onto the normalized NLSE.

    The closures Z0 = 2 T0^2/|beta2| and P0 = |beta2|/(gamma T0^2) are the
    unique scaling under which the lossless physical equation becomes the
    normalized focusing form whose continuous spectrum obeys
    exp(-4j lam^2 z).
    """

    T0: float
    Z0: float
    P0: float

    def __post_init__(self):
        if min(self.T0, self.Z0, self.P0) <= 0:
            raise InvalidConfigurationError("normalization parameters must be positive")

    @classmethod
    def from_fiber(cls, T0: float, fiber: FiberParams) -> "NormalizationScheme":
        if T0 <= 0:
            raise InvalidConfigurationError("T0 must be positive")
        b2 = abs(fiber.beta2)
        return cls(T0=T0, Z0=2.0 * T0 * T0 / b2, P0=b2 / (fiber.gamma * T0 * T0))

    def length_normalized(self, length_m: float) -> float:
        return length_m / self.Z0


@dataclass(frozen=True)
class RandomStream:
    """Deterministic per-burst noise stream.

    Identical (seed, stream_id) reproduce identical realizations regardless
    of execution order or worker count.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    def substream(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)


def make_grid(n_burst: int, n_guard: int, oversampling: int, T_s: float) -> ComplexSignal:
    """All-zero physical frame covering -T/2 < t < T/2, T = (N_b+N_z) T_s.

    Total samples N = (N_b+N_z) * oversampling with dt = T_s/oversampling.
    """
    for name, val in (("n_burst", n_burst), ("n_guard", n_guard),
                      ("oversampling", oversampling)):
        if not isinstance(val, (int, np.integer)) or val <= 0:
            raise InvalidConfigurationError(f"{name} must be a positive integer, got {val}")
    if not (T_s > 0):
        raise InvalidConfigurationError(f"T_s must be positive, got {T_s}")
    n_total = (n_burst + n_guard) * oversampling
    dt = T_s / oversampling
    frame = np.zeros(n_total, dtype=np.complex128)
    return ComplexSignal(frame, dt=dt, t_start=-0.5 * n_total * dt, units_mode=PHYSICAL)


def normalize(signal: ComplexSignal, scheme: NormalizationScheme) -> ComplexSignal:
    """Physical -> normalized: t -> t/T0, amplitude -> amplitude/sqrt(P0)."""
    if signal.units_mode != PHYSICAL:
        raise UnitsMismatchError("normalize expects a physical-units signal")
    return ComplexSignal(
        signal.samples / np.sqrt(scheme.P0),
        dt=signal.dt / scheme.T0,
        t_start=signal.t_start / scheme.T0,
        units_mode=NORMALIZED,
    )


def denormalize(signal: ComplexSignal, scheme: NormalizationScheme) -> ComplexSignal:
    """Inverse of :func:`normalize`; round trip is the identity."""
    if signal.units_mode != NORMALIZED:
        raise UnitsMismatchError("denormalize expects a normalized-units signal")
    return ComplexSignal(
        signal.samples * np.sqrt(scheme.P0),
        dt=signal.dt * scheme.T0,
        t_start=signal.t_start * scheme.T0,
        units_mode=PHYSICAL,
    )


def conjugate_lambda_grid(n_samples: int, dt_normalized: float) -> np.ndarray:
    """Ascending lambda grid conjugate to a normalized time grid.

    One lambda per frequency bin under the fixed convention
    lam = -pi * f (f in cycles per normalized time unit).
    """
    f = np.fft.fftshift(np.fft.fftfreq(n_samples, d=dt_normalized))
    return np.ascontiguousarray(-np.pi * f[::-1])
