"""Matched-filter sampling front end.

Each symbol period ``[n - 1, n)`` is cut into consecutive integration
windows.  Every window yields one complex sample: the received signal
correlated against a matched filter and divided by the window length.

* ``DOUBLE``: windows ``[0, delta)`` and ``[delta, 1)`` (relative to
  ``n - 1``), matched to the full multipath pulse of ``x_A[n]`` and
  ``x_B[n]`` respectively.
* ``QUAD`` (two taps per node): windows split at ``tau_1``, ``delta`` and
  ``delta + l_1``, each matched to a single path.

With rectangular pulses every coefficient is a complex-weighted sum of
interval overlap lengths, which is what :func:`compute_coefficients`
evaluates.  Noise is synthesized directly at the filter outputs; the
windows are disjoint, so the samples are independent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelProfile

__all__ = [
    "CoefficientTable",
    "DegenerateWindowError",
    "SampleFrame",
    "SamplingMethod",
    "Slot",
    "WindowOrderingError",
    "add_noise",
    "affine_samples",
    "compute_coefficients",
    "direct_samples",
]

MIN_WINDOW = 1e-6

# Variables are (node, lag) pairs: ("A", 1) is x_A[n - 1] seen from block n.
CANDIDATES = (("A", 0), ("A", 1), ("B", 0), ("B", 1))


class DegenerateWindowError(ValueError):
    pass


class WindowOrderingError(ValueError):
    pass


class SamplingMethod(str, enum.Enum):
    DOUBLE = "DOUBLE"
    QUAD = "QUAD"

    @property
    def samples_per_symbol(self) -> int:
        return 2 if self is SamplingMethod.DOUBLE else 4


# Interval edges built as ``offset - lag + 1`` pick up rounding error; overlaps
# below this are treated as empty.
_EDGE_TOL = 1e-12


def _overlap(a0, a1, b0, b1) -> float:
    ov = min(a1, b1) - max(a0, b0)
    return ov if ov > _EDGE_TOL else 0.0


@dataclass(frozen=True, eq=False)
class Slot:
    """One integration window of a symbol period and its affine map."""

    start: float
    stop: float
    filter_node: str
    filter_paths: tuple[int, ...]
    variables: tuple[tuple[str, int], ...]
    coeffs: np.ndarray
    terms: dict = field(repr=False)  # (node, lag, path) -> complex
    filter_energy: float

    @property
    def length(self) -> float:
        return self.stop - self.start

    def noise_variance(self, n0: float) -> float:
        """Per-component (real or imaginary) noise variance of this sample."""
        return 0.5 * n0 * self.filter_energy / self.length**2

    def coefficient(self, var) -> complex:
        try:
            return complex(self.coeffs[self.variables.index(tuple(var))])
        except ValueError:
            return 0j


@dataclass(frozen=True)
class CoefficientTable:
    method: SamplingMethod
    profile: ChannelProfile
    slots: tuple[Slot, ...]

    @property
    def samples_per_symbol(self) -> int:
        return len(self.slots)

    @property
    def noise_scales(self) -> tuple[float, ...]:
        """alpha_1, alpha_2 (DOUBLE) or beta_1..beta_4 (QUAD)."""
        return tuple(s.filter_energy for s in self.slots)

    def noise_variances(self, n0: float) -> np.ndarray:
        return np.array([s.noise_variance(n0) for s in self.slots])

    def rescaled(self, c: float) -> CoefficientTable:
        """Same table under a matched filter scaled by ``c``.

        Coefficients scale by ``c`` and noise variances by ``|c|**2``; a
        unit-modulus ``c`` is a pure phase rotation.
        """
        slots = tuple(
            Slot(s.start, s.stop, s.filter_node, s.filter_paths, s.variables,
                 s.coeffs * c, {k: v * c for k, v in s.terms.items()},
                 s.filter_energy * abs(c) ** 2)
            for s in self.slots
        )
        return CoefficientTable(self.method, self.profile, slots)

    @property
    def rho(self) -> dict[str, complex]:
        """Named DOUBLE coefficients for the canonical two-sample layout."""
        if self.method is not SamplingMethod.DOUBLE:
            raise ValueError("rho coefficients exist for DOUBLE sampling only")
        s1, s2 = self.slots
        # absent variables (e.g. single-path profiles) read as 0
        if not set(s1.variables) <= {("A", 0), ("A", 1), ("B", 1)} or not set(
            s2.variables
        ) <= {("A", 0), ("B", 0), ("B", 1)}:
            raise ValueError("profile does not produce the canonical DOUBLE layout")
        return {
            "aa0": s1.coefficient(("A", 0)),
            "aa1": s1.coefficient(("A", 1)),
            "ab": s1.coefficient(("B", 1)),
            "bb0": s2.coefficient(("B", 0)),
            "bb1": s2.coefficient(("B", 1)),
            "ba": s2.coefficient(("A", 0)),
        }

    @property
    def mu_lambda(self) -> dict[str, complex]:
        """Per-path QUAD coefficients (mu/lambda families)."""
        if self.method is not SamplingMethod.QUAD:
            raise ValueError("mu/lambda coefficients exist for QUAD sampling only")
        s1, s2, s3, s4 = (s.terms for s in self.slots)
        g = lambda t, key: complex(t.get(key, 0j))
        return {
            "mu_aa0": g(s1, ("A", 0, 0)), "mu_aa1": g(s1, ("A", 1, 1)),
            "mu_ab0": g(s1, ("B", 1, 0)), "mu_ab1": g(s1, ("B", 1, 1)),
            "lambda_aa0": g(s2, ("A", 0, 0)), "lambda_aa1": g(s2, ("A", 0, 1)),
            "lambda_ab0": g(s2, ("B", 1, 0)), "lambda_ab1": g(s2, ("B", 1, 1)),
            "mu_ba0": g(s3, ("A", 0, 0)), "mu_ba1": g(s3, ("A", 0, 1)),
            "mu_bb0": g(s3, ("B", 0, 0)), "mu_bb1": g(s3, ("B", 1, 1)),
            "lambda_ba0": g(s4, ("A", 0, 0)), "lambda_ba1": g(s4, ("A", 0, 1)),
            "lambda_bb0": g(s4, ("B", 0, 0)), "lambda_bb1": g(s4, ("B", 0, 1)),
        }


def _windows(p: ChannelProfile, m: SamplingMethod):
    """(start, stop, filter node, filter paths) for each slot of a period."""
    d = p.delta
    if m is SamplingMethod.DOUBLE:
        return [
            (0.0, d, "A", tuple(range(len(p.taps_a)))),
            (d, 1.0, "B", tuple(range(len(p.taps_b)))),
        ]
    if p.n_taps != (2, 2):
        raise WindowOrderingError("QUAD sampling needs exactly two taps per node")
    tau1 = p.taps_a[1].delay
    l1 = p.taps_b[1].delay
    if not 0.0 < tau1 < d < d + l1 < 1.0:
        raise WindowOrderingError(
            f"QUAD needs 0 < tau_1 < delta < delta + l_1 < 1, "
            f"got tau_1={tau1}, delta={d}, l_1={l1}"
        )
    return [
        (0.0, tau1, "A", (0,)),
        (tau1, d, "A", (1,)),
        (d, d + l1, "B", (0,)),
        (d + l1, 1.0, "B", (1,)),
    ]


def compute_coefficients(p: ChannelProfile, m: SamplingMethod | str) -> CoefficientTable:
    """Closed-form integration coefficients and noise scales for ``p``."""
    m = SamplingMethod(str(getattr(m, "value", m)).upper())
    gains = {node: p.path_gains(node) for node in "AB"}
    offsets = {node: p.path_offsets(node) for node in "AB"}
    slots = []
    for start, stop, fnode, fpaths in _windows(p, m):
        length = stop - start
        if length < MIN_WINDOW:
            raise DegenerateWindowError(
                f"window [{start:.6g}, {stop:.6g}) shorter than {MIN_WINDOW}"
            )
        filt = [(gains[fnode][q], offsets[fnode][q]) for q in fpaths]
        energy = 0.0
        for hq, oq in filt:
            for hr, orr in filt:
                ov = _overlap(start, stop, max(oq, orr), min(oq, orr) + 1.0)
                energy += (np.conj(hq) * hr * ov).real
        if not energy > 0.0:
            raise DegenerateWindowError(
                f"matched filter has zero energy on [{start:.6g}, {stop:.6g})"
            )
        variables, coeffs, terms = [], [], {}
        for node, lag in CANDIDATES:
            present = False
            total = 0j
            for path, (g, o) in enumerate(zip(gains[node], offsets[node])):
                lo, hi = o - lag, o - lag + 1.0
                if _overlap(start, stop, lo, hi) <= 0.0:
                    continue
                present = True
                acc = 0j
                for hq, oq in filt:
                    acc += g * np.conj(hq) * _overlap(start, stop, max(lo, oq), min(hi, oq + 1.0))
                terms[(node, lag, path)] = acc / length
                total += acc / length
            if present:
                variables.append((node, lag))
                coeffs.append(total)
        slots.append(
            Slot(start, stop, fnode, fpaths, tuple(variables),
                 np.array(coeffs, dtype=complex), terms, float(energy))
        )
    return CoefficientTable(m, p, tuple(slots))


@dataclass(frozen=True)
class SampleFrame:
    """Matched-filter outputs ``r`` in time order, ``sps`` per symbol.

    ``noise_variance_per_sample`` is the per-component variance of each
    sample (all zero for noiseless frames).  ``r`` may carry leading batch
    dimensions.
    """

    method: SamplingMethod
    r: np.ndarray
    noise_variance_per_sample: np.ndarray
    table: CoefficientTable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.r.shape[-1] % self.method.samples_per_symbol:
            raise ValueError("sample count is not a multiple of samples per symbol")

    @property
    def n_symbols(self) -> int:
        return self.r.shape[-1] // self.method.samples_per_symbol


def affine_samples(t: CoefficientTable, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """Noiseless samples for symbol arrays of shape ``(..., N)``.

    Symbols with index 0 are a known all-zero guard.
    """
    xa = np.asarray(xa, dtype=complex)
    xb = np.asarray(xb, dtype=complex)
    if xa.shape != xb.shape:
        raise ValueError("frames for A and B must have equal length")
    n = xa.shape[-1]
    sps = t.samples_per_symbol
    pad = [(0, 0)] * (xa.ndim - 1) + [(1, 0)]
    padded = {"A": np.pad(xa, pad), "B": np.pad(xb, pad)}
    r = np.zeros(xa.shape[:-1] + (sps * n,), dtype=complex)
    for s, slot in enumerate(t.slots):
        acc = r[..., s::sps]
        for (node, lag), c in zip(slot.variables, slot.coeffs):
            acc += c * padded[node][..., 1 - lag : n + 1 - lag]
    return r


def direct_samples(p: ChannelProfile, t: CoefficientTable, fa, fb) -> SampleFrame:
    """Noiseless sample frame for the symbol frames ``fa`` and ``fb``."""
    if t.profile != p:
        raise ValueError("coefficient table was computed for a different profile")
    xa = getattr(fa, "symbols", fa)
    xb = getattr(fb, "symbols", fb)
    r = affine_samples(t, xa, xb)
    return SampleFrame(t.method, r, np.zeros(r.shape[-1]), t)


def add_noise(s: SampleFrame, n0: float, rng: np.random.Generator) -> SampleFrame:
    """Add independent complex Gaussian noise at the filter outputs.

    The per-sample variances come from the table the frame was produced
    with; existing noise variances are accumulated.
    """
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    if s.table is None:
        raise ValueError("sample frame carries no coefficient table")
    var = np.tile(s.table.noise_variances(n0), s.n_symbols)
    noise = rng.standard_normal(s.r.shape) + 1j * rng.standard_normal(s.r.shape)
    return SampleFrame(
        s.method, s.r + np.sqrt(var) * noise, s.noise_variance_per_sample + var, s.table
    )
