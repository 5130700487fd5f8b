"""Tapped-delay-line channel profiles and a fine-grid waveform renderer.

Time is measured in symbol durations.  Symbol ``n`` (1-based) on a path
with total delay ``d`` occupies ``[n - 1 + d, n + d)``; node B's paths
carry the extra offset ``delta``.  The renderer evaluates the noiseless
received signal on a uniform grid and is used as an independent oracle
for the matched-filter front end.
"""

from __future__ import annotations

import ast
import enum
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ChannelProfile",
    "ChannelValidationError",
    "Preset",
    "Tap",
    "WaveformGrid",
    "effective_pulse",
    "format_taps",
    "itu_profile",
    "parse_real",
    "parse_taps",
    "pulse_energy",
    "render_waveform",
    "truncate_taps",
]

MAX_TAPS = 3
MIN_OVERSAMPLING = 64


class ChannelValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Tap:
    gain: float
    delay: float
    phase: float = 0.0

    @property
    def coefficient(self) -> complex:
        return self.gain * np.exp(1j * self.phase)


@dataclass(frozen=True)
class ChannelProfile:
    """Per-node tap lists and the offset of B's first path behind A's."""

    taps_a: tuple[Tap, ...]
    taps_b: tuple[Tap, ...]
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "taps_a", tuple(self.taps_a))
        object.__setattr__(self, "taps_b", tuple(self.taps_b))
        self.validate()

    def validate(self) -> None:
        d = self.delta
        if not 0.0 < d < 1.0:
            raise ChannelValidationError(f"delta must lie in (0, 1), got {d}")
        for name, taps, limit in (("A", self.taps_a, 1.0), ("B", self.taps_b, 1.0 - d)):
            if not 1 <= len(taps) <= MAX_TAPS:
                raise ChannelValidationError(
                    f"node {name}: need 1..{MAX_TAPS} taps, got {len(taps)}"
                )
            if taps[0].delay != 0.0:
                raise ChannelValidationError(f"node {name}: first tap must have delay 0")
            for t in taps:
                if t.gain < 0 or not np.isfinite(t.gain):
                    raise ChannelValidationError(f"node {name}: negative gain {t.gain}")
                if not np.isfinite(t.phase):
                    raise ChannelValidationError(f"node {name}: non-finite phase")
            delays = [t.delay for t in taps]
            if any(b <= a for a, b in zip(delays, delays[1:])):
                raise ChannelValidationError(f"node {name}: delays must strictly increase")
            if delays[-1] > limit + 1e-12:
                raise ChannelValidationError(
                    f"node {name}: delay spread {delays[-1]} exceeds {limit:.6g}"
                )

    def taps(self, node: str) -> tuple[Tap, ...]:
        return self.taps_a if node == "A" else self.taps_b

    def path_gains(self, node: str) -> np.ndarray:
        return np.array([t.coefficient for t in self.taps(node)], dtype=complex)

    def path_offsets(self, node: str) -> np.ndarray:
        """Start of symbol 1 on each path, i.e. the total path delay."""
        base = 0.0 if node == "A" else self.delta
        return np.array([base + t.delay for t in self.taps(node)])

    @property
    def n_taps(self) -> tuple[int, int]:
        return len(self.taps_a), len(self.taps_b)

    def rotated(self, phase: float) -> ChannelProfile:
        """Same profile with every tap of both nodes rotated by ``phase``."""
        rot = lambda ts: tuple(replace(t, phase=t.phase + phase) for t in ts)
        return ChannelProfile(rot(self.taps_a), rot(self.taps_b), self.delta)

    def with_delta(self, delta: float) -> ChannelProfile:
        return ChannelProfile(self.taps_a, self.taps_b, delta)

    def with_phases(self, phases_a, phases_b) -> ChannelProfile:
        if len(phases_a) != len(self.taps_a) or len(phases_b) != len(self.taps_b):
            raise ChannelValidationError("phase list length must match tap count")
        ta = tuple(replace(t, phase=float(p)) for t, p in zip(self.taps_a, phases_a))
        tb = tuple(replace(t, phase=float(p)) for t, p in zip(self.taps_b, phases_b))
        return ChannelProfile(ta, tb, self.delta)


class Preset(str, enum.Enum):
    INDOOR_A = "INDOOR_A"
    ALT_B = "ALT_B"


# (gain, delay) pairs in symbol units at 1 Mbaud over a 1 MHz channel
_PRESETS = {
    Preset.INDOOR_A: (
        ((1.0, 0.0), (0.7079, 0.05), (0.3162, 0.11)),
        ((1.0, 0.0), (0.6808, 0.1), (0.4365, 0.2)),
    ),
    Preset.ALT_B: (
        ((1.0, 0.0), (0.9487, 0.15), (0.3162, 0.25)),
        ((1.0, 0.0), (0.9644, 0.35), (0.3873, 0.45)),
    ),
}


def itu_profile(
    name: str | Preset,
    bandwidth_hz: float = 1e6,
    phases_a=None,
    phases_b=None,
    delta: float = 0.5,
    n_taps: int | None = None,
) -> ChannelProfile:
    """Three-tap indoor preset with caller-supplied effective phases.

    ``bandwidth_hz`` is kept for bookkeeping only; the tap delays are stored
    already normalized to one symbol per microsecond.  ``n_taps`` keeps only
    the leading taps before validation, so a short prefix of a preset may be
    used at offsets the full preset would not allow.
    """
    ga, gb = _PRESETS[Preset(str(getattr(name, "value", name)).upper())]
    if n_taps is not None:
        if not 1 <= n_taps <= len(ga):
            raise ValueError(f"n_taps must lie in 1..{len(ga)}")
        ga, gb = ga[:n_taps], gb[:n_taps]
    phases_a = [0.0] * len(ga) if phases_a is None else list(phases_a)
    phases_b = [0.0] * len(gb) if phases_b is None else list(phases_b)
    if len(phases_a) != len(ga) or len(phases_b) != len(gb):
        raise ChannelValidationError("phase list length must match tap count")
    ta = tuple(Tap(g, d, p) for (g, d), p in zip(ga, phases_a))
    tb = tuple(Tap(g, d, p) for (g, d), p in zip(gb, phases_b))
    return ChannelProfile(ta, tb, delta)


def truncate_taps(p: ChannelProfile, k: int) -> ChannelProfile:
    """Keep the first ``k`` taps of each node; gains are not renormalized."""
    if not 1 <= k <= min(p.n_taps):
        raise ValueError(f"k must lie in 1..{min(p.n_taps)}, got {k}")
    return ChannelProfile(p.taps_a[:k], p.taps_b[:k], p.delta)


def effective_pulse(gains: np.ndarray, offsets: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Tap-weighted sum of unit rectangles ``[offset, offset + 1)`` at times ``t``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for g, o in zip(gains, offsets):
        out += g * ((t >= o) & (t < o + 1.0))
    return out


def pulse_energy(gains: np.ndarray, offsets: np.ndarray) -> float:
    """Energy of the effective pulse, from pairwise rectangle overlaps."""
    g = np.asarray(gains, dtype=complex)
    o = np.asarray(offsets, dtype=float)
    overlap = np.clip(1.0 - np.abs(o[:, None] - o[None, :]), 0.0, None)
    return float(np.real(g @ overlap @ g.conj()))


@dataclass(frozen=True)
class WaveformGrid:
    """Noiseless received signal at cell midpoints ``(k + 0.5) / K``."""

    K: int
    samples: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return (np.arange(len(self.samples)) + 0.5) / self.K


def render_waveform(
    p: ChannelProfile, xa: np.ndarray, xb: np.ndarray, K: int = 1024
) -> WaveformGrid:
    """Superpose every path of every symbol of both nodes on a fine grid.

    ``xa``/``xb`` are complex symbol sequences (or ``SymbolFrame`` objects)
    of equal length N.  The grid spans ``[0, N + 2)``, which covers the
    longest admissible delay spread.
    """
    xa = np.asarray(getattr(xa, "symbols", xa), dtype=complex)
    xb = np.asarray(getattr(xb, "symbols", xb), dtype=complex)
    if xa.shape != xb.shape:
        raise ValueError("frames for A and B must have equal length")
    if K < MIN_OVERSAMPLING:
        raise ValueError(f"oversampling factor must be >= {MIN_OVERSAMPLING}")
    n = len(xa)
    t = (np.arange(K * (n + 2)) + 0.5) / K
    out = np.zeros(t.shape, dtype=complex)
    for node, x in (("A", xa), ("B", xb)):
        padded = np.concatenate([[0j], x, [0j]])
        for g, o in zip(p.path_gains(node), p.path_offsets(node)):
            m = np.floor(t - o).astype(np.int64) + 1
            m = np.where((m >= 1) & (m <= n), m, 0)
            out += g * padded[m]
    return WaveformGrid(K, out)


_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name,
                  ast.Add, ast.Sub, ast.Mult, ast.Div, ast.USub, ast.UAdd, ast.Load)


def parse_real(text: str) -> float:
    """Evaluate a real literal that may use ``pi`` and ``+ - * /``."""
    text = text.strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ValueError(f"unsupported expression {text!r}")
        if isinstance(node, ast.Name) and node.id != "pi":
            raise ValueError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ValueError(f"unsupported literal in {text!r}")
    return float(eval(compile(tree, "<expr>", "eval"), {"__builtins__": {}}, {"pi": np.pi}))


def parse_taps(text: str) -> tuple[Tap, ...]:
    """Parse ``gain:delay:phase, ...`` (phase optional, may use ``pi``)."""
    taps = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) not in (2, 3):
            raise ChannelValidationError(f"bad tap spec {chunk!r}")
        vals = [parse_real(s) for s in parts]
        taps.append(Tap(*vals))
    return tuple(taps)


def format_taps(taps) -> str:
    return ", ".join(f"{t.gain!r}:{t.delay!r}:{t.phase!r}" for t in taps)
