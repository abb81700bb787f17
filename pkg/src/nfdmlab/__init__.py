"""Desk-scale NFDM/NIS fiber transmission laboratory.

Library layout:

- ``core``     grids, unit normalization, signal/spectrum containers, RNG streams
- ``nft``      forward (layer peeling) and backward (GLM) nonlinear Fourier transforms
- ``modem``    QPSK/RRC transceiver, spectral encode/decode, phase rotations
- ``channel``  split-step NLSE propagation, ASE noise, AWGN control, EDC/DBP baselines
- ``metrics``  BER/Q/EVM estimation, rate efficiency, channel-memory formulas
- ``harness``  experiment configuration, Monte Carlo sweeps, CLI, CSV/JSON/figure output
"""

from nfdmlab.core import (
    ComplexSignal,
    FiberParams,
    NonlinearSpectrum,
    NormalizationScheme,
    RandomStream,
    make_grid,
    normalize,
    denormalize,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexSignal",
    "FiberParams",
    "NonlinearSpectrum",
    "NormalizationScheme",
    "RandomStream",
    "make_grid",
    "normalize",
    "denormalize",
    "__version__",
]
