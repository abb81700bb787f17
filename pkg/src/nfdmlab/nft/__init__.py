from nfdmlab.nft.zs import (
    ScatteringPair,
    WindowSpec,
    zs_scatter_lp,
    fnft_continuous,
    fnft_windowed,
    repair_instabilities,
    nft_energy,
)
from nfdmlab.nft.glm import bnft

__all__ = [
    "ScatteringPair",
    "WindowSpec",
    "zs_scatter_lp",
    "fnft_continuous",
    "fnft_windowed",
    "repair_instabilities",
    "nft_energy",
    "bnft",
]
