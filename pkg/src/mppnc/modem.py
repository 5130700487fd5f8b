"""BPSK/QPSK Gray mapping and the bitwise-XOR network-coding map.

Energy convention: every constellation point has unit energy, so the
energy per information bit is ``1 / bits_per_symbol``.  QPSK points are
therefore ``(+-1 +-j)/sqrt(2)``; the sqrt(2) amplitude relation between
the two constellations at equal per-bit energy falls out of this, and the
harness does all per-bit SNR bookkeeping from ``bits_per_symbol``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BPSK",
    "QPSK",
    "Constellation",
    "InvalidSymbolError",
    "Modulation",
    "SymbolFrame",
    "constellation",
    "demodulate",
    "modulate",
    "xor_map",
]

_MATCH_TOL = 1e-9


class InvalidSymbolError(ValueError):
    """A complex value is not a point of the active constellation."""


class Modulation(str, enum.Enum):
    BPSK = "BPSK"
    QPSK = "QPSK"


@dataclass(frozen=True)
class Constellation:
    """Ordered unit-energy point set with Gray labels.

    ``points[i]`` carries the integer bit label ``labels[i]``; the label's
    most significant bit is the first bit on the wire.
    """

    kind: Modulation
    points: tuple[complex, ...]
    labels: tuple[int, ...]
    bits_per_symbol: int
    point_array: np.ndarray = field(init=False, repr=False, compare=False)
    xor_index: np.ndarray = field(init=False, repr=False, compare=False)
    label_to_index: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = len(self.points)
        if m != 2**self.bits_per_symbol or sorted(self.labels) != list(range(m)):
            raise ValueError("labels must be a permutation of 0..M-1")
        pts = np.asarray(self.points, dtype=complex)
        if not np.allclose(np.abs(pts), 1.0, atol=1e-15):
            raise ValueError("constellation points must have unit energy")
        lab = np.asarray(self.labels)
        inv = np.empty(m, dtype=np.intp)
        inv[lab] = np.arange(m)
        xor_index = inv[lab[:, None] ^ lab[None, :]]
        object.__setattr__(self, "point_array", pts)
        object.__setattr__(self, "label_to_index", inv)
        object.__setattr__(self, "xor_index", xor_index)

    @property
    def size(self) -> int:
        return len(self.points)

    def index_of(self, s: complex) -> int:
        d = np.abs(self.point_array - complex(s))
        i = int(np.argmin(d))
        if d[i] > _MATCH_TOL:
            raise InvalidSymbolError(f"{s!r} is not a {self.kind.value} point")
        return i

    def indices_to_bits(self, idx: np.ndarray) -> np.ndarray:
        """Map symbol indices ``(..., N)`` to bits ``(..., N * bits_per_symbol)``."""
        lab = np.asarray(self.labels)[np.asarray(idx)]
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        bits = (lab[..., None] >> shifts) & 1
        return bits.reshape(*lab.shape[:-1], -1).astype(np.uint8)

    def bits_to_indices(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64)
        k = self.bits_per_symbol
        if bits.shape[-1] % k:
            raise ValueError(
                f"bit count {bits.shape[-1]} not divisible by bits_per_symbol={k}"
            )
        grouped = bits.reshape(*bits.shape[:-1], -1, k)
        weights = 1 << np.arange(k - 1, -1, -1)
        lab = grouped @ weights
        return self.label_to_index[lab]


_S = 1 / np.sqrt(2.0)

BPSK = Constellation(Modulation.BPSK, (1 + 0j, -1 + 0j), (0b0, 0b1), 1)
# Gray order around the circle: 00, 01, 11, 10
QPSK = Constellation(
    Modulation.QPSK,
    (complex(_S, _S), complex(-_S, _S), complex(-_S, -_S), complex(_S, -_S)),
    (0b00, 0b01, 0b11, 0b10),
    2,
)


def constellation(kind: str | Modulation) -> Constellation:
    kind = Modulation(str(kind.value if isinstance(kind, Modulation) else kind).upper())
    return BPSK if kind is Modulation.BPSK else QPSK


@dataclass(frozen=True)
class SymbolFrame:
    """One node's frame: complex symbols plus the bits they carry."""

    node: str
    symbols: np.ndarray
    source_bits: np.ndarray

    def __post_init__(self):
        if self.node not in ("A", "B", "R"):
            raise ValueError(f"unknown node {self.node!r}")
        if len(self.symbols) < 1:
            raise ValueError("a frame needs at least one symbol")

    def __len__(self) -> int:
        return len(self.symbols)

    def indices(self, c: Constellation) -> np.ndarray:
        return np.array([c.index_of(s) for s in self.symbols], dtype=np.intp)


def modulate(bits, c: Constellation, node: str = "A") -> SymbolFrame:
    """Gray-map ``bits`` onto ``c``.

    Raises ``ValueError`` if the bit count is not a multiple of
    ``c.bits_per_symbol``.
    """
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    idx = c.bits_to_indices(bits)
    return SymbolFrame(node, c.point_array[idx], bits.copy())


def demodulate(s: complex, c: Constellation) -> tuple[int, ...]:
    i = c.index_of(s)
    return tuple(int(b) for b in c.indices_to_bits(np.array([i])))


def xor_map(a: complex, b: complex, c: Constellation) -> complex:
    """Point whose label is the bitwise XOR of the labels of ``a`` and ``b``."""
    return c.points[c.xor_index[c.index_of(a), c.index_of(b)]]
