"""
Contractive compressors Q with a certified contraction factor.
"""

from compressors.contractive import (
    CompressorSpec,
    IdentityCompressor,
    ScaledSignCompressor,
    TopKCompressor,
    compress,
    contraction_factor,
    effective_contraction,
)

__all__ = [
    "CompressorSpec",
    "IdentityCompressor",
    "ScaledSignCompressor",
    "TopKCompressor",
    "compress",
    "contraction_factor",
    "effective_contraction",
]
