"""Secrecy-throughput and secure-energy-efficiency beamforming toolkit.

A library plus CLI simulator for multi-pair MISO networks overheard by an
eavesdropper: path-following (successive convex approximation) beamforming
under three channel-knowledge regimes, closed-form outage machinery and
Monte-Carlo verification oracles.
"""

from .model import (
    ChannelSet,
    Regime,
    Scenario,
    beam_norms_sq,
    min_norm_sq,
    sample_channels,
    stack_beamformers,
    total_power,
    unstack_beamformers,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "Regime",
    "Scenario",
    "beam_norms_sq",
    "min_norm_sq",
    "sample_channels",
    "stack_beamformers",
    "total_power",
    "unstack_beamformers",
    "__version__",
]
