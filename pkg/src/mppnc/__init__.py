"""Belief-propagation PNC decoding over asynchronous multipath two-way relay channels."""

from .baselines import decode_mud_xor, decode_sync_pnc, sync_observe
from .channel import ChannelProfile, ChannelValidationError, Tap, itu_profile, render_waveform
from .decoder import DecodingFailure, build_chain, decode, decode_pairs, forward_backward
from .frontend import SamplingMethod, add_noise, compute_coefficients, direct_samples
from .harness import BerRecord, ExperimentConfig, load_config, run_sweep
from .modem import BPSK, QPSK, constellation, demodulate, modulate, xor_map

__version__ = "0.1.0"

__all__ = [
    "BPSK",
    "QPSK",
    "BerRecord",
    "ChannelProfile",
    "ChannelValidationError",
    "DecodingFailure",
    "ExperimentConfig",
    "SamplingMethod",
    "Tap",
    "add_noise",
    "build_chain",
    "compute_coefficients",
    "constellation",
    "decode",
    "decode_mud_xor",
    "decode_pairs",
    "decode_sync_pnc",
    "demodulate",
    "direct_samples",
    "forward_backward",
    "itu_profile",
    "load_config",
    "modulate",
    "render_waveform",
    "run_sweep",
    "sync_observe",
    "xor_map",
]
