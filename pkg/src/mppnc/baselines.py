"""Reference decoders: synchronous single-path PNC and disjoint MUD-XOR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoder import decode_pairs, mud_decisions
from .frontend import CoefficientTable, SampleFrame
from .modem import Constellation, SymbolFrame

__all__ = [
    "SyncObservation",
    "decode_mud_xor",
    "decode_sync_pnc",
    "sync_observe",
    "sync_xor_decisions",
]


@dataclass(frozen=True)
class SyncObservation:
    """``y[n] = x_A[n] + x_B[n] + w[n]``; ``noise_var`` is per component."""

    y: np.ndarray
    noise_var: float


def sync_observe(xa, xb, n0: float, rng: np.random.Generator) -> SyncObservation:
    """Aligned, unit-gain, zero-phase superposition plus AWGN.

    Each node delivers unit energy per symbol, so at a given per-bit SNR
    ``n0 = 1 / (bits_per_symbol * snr)``.
    """
    y = np.asarray(xa, dtype=complex) + np.asarray(xb, dtype=complex)
    var = 0.5 * n0
    w = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    return SyncObservation(y + np.sqrt(var) * w, var)


def sync_xor_decisions(y: np.ndarray, noise_var: float, c: Constellation) -> np.ndarray:
    """Memoryless XOR-MAP: per sample, sum likelihoods per XOR class."""
    if not noise_var > 0:
        raise ValueError("noise variance must be positive")
    pts = c.point_array
    pred = pts[:, None] + pts[None, :]
    diff = np.asarray(y)[..., None, None] - pred
    ll = -(diff.real**2 + diff.imag**2) / (2.0 * noise_var)
    ll -= ll.max(axis=(-2, -1), keepdims=True)
    p = np.exp(ll)
    px = np.stack([p[..., c.xor_index == x].sum(axis=-1) for x in range(c.size)], axis=-1)
    return np.argmax(px, axis=-1)


def decode_sync_pnc(o: SyncObservation, c: Constellation) -> SymbolFrame:
    idx = sync_xor_decisions(np.asarray(o.y), o.noise_var, c)
    return SymbolFrame("R", c.point_array[idx], c.indices_to_bits(idx))


def decode_mud_xor(t: CoefficientTable, s: SampleFrame, c: Constellation) -> SymbolFrame:
    """Decide ``x_A[n]`` and ``x_B[n]`` separately from their posterior
    marginals, then XOR the two hard decisions."""
    r = np.asarray(s.r)
    if r.ndim != 1:
        raise ValueError("decode_mud_xor expects a single frame")
    nv = np.asarray(s.noise_variance_per_sample, dtype=float)[: t.samples_per_symbol]
    idx = mud_decisions(decode_pairs(t, r[None, :], nv, c), c)[0]
    return SymbolFrame("R", c.point_array[idx], c.indices_to_bits(idx))
