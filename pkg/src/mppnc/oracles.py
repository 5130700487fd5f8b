"""Slow, independent reference computations used to validate the fast paths.

* :func:`quadrature_coefficients` integrates pointwise-evaluated pulses
  with a composite midpoint rule instead of using overlap arithmetic.
* :func:`matched_filter_waveform` integrates a rendered fine-grid waveform.
* :func:`brute_force_posterior` enumerates every joint frame.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelProfile, WaveformGrid, effective_pulse
from .frontend import CoefficientTable, SamplingMethod
from .modem import Constellation

__all__ = [
    "brute_force_posterior",
    "brute_force_user_map",
    "brute_force_xor_map",
    "joint_marginal",
    "matched_filter_waveform",
    "quadrature_coefficients",
    "window_edges",
]


def window_edges(p: ChannelProfile, method) -> list[tuple[float, float, str, list[int]]]:
    """Integration windows of one symbol period, relative to its start."""
    method = SamplingMethod(str(getattr(method, "value", method)).upper())
    d = p.delta
    if method is SamplingMethod.DOUBLE:
        return [(0.0, d, "A", list(range(len(p.taps_a)))),
                (d, 1.0, "B", list(range(len(p.taps_b))))]
    t1, l1 = p.taps_a[1].delay, p.taps_b[1].delay
    return [(0.0, t1, "A", [0]), (t1, d, "A", [1]),
            (d, d + l1, "B", [0]), (d + l1, 1.0, "B", [1])]


def _graded_midpoints(lo: float, hi: float, breaks, n_sub: int):
    """Midpoints and widths of ~n_sub cells, never straddling a break."""
    # snap: edges like ``offset - 1 + 1`` carry rounding noise
    edges = np.unique(np.clip(np.round(np.concatenate([[lo, hi], breaks]), 12), lo, hi))
    mids, widths = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        k = max(1, int(round(n_sub * (b - a) / (hi - lo))))
        h = (b - a) / k
        mids.append(a + h * (np.arange(k) + 0.5))
        widths.append(np.full(k, h))
    return np.concatenate(mids), np.concatenate(widths)


def quadrature_coefficients(p: ChannelProfile, method, n_sub: int = 100_000):
    """Per-slot ``(variables -> coefficient, filter energy)`` by quadrature.

    Returns a list with one ``(dict, energy)`` per slot; the dict maps
    ``(node, lag)`` to the complex coefficient of every symbol whose pulse
    is nonzero somewhere in the window.
    """
    gains = {n: p.path_gains(n) for n in "AB"}
    offs = {n: p.path_offsets(n) for n in "AB"}
    breaks = np.concatenate(
        [np.concatenate([offs[n] - lag, offs[n] - lag + 1.0]) for n in "AB" for lag in (0, 1)]
    )
    out = []
    for lo, hi, fnode, fpaths in window_edges(p, method):
        t, w = _graded_midpoints(lo, hi, breaks, n_sub)
        mf = effective_pulse(gains[fnode][fpaths], offs[fnode][fpaths], t)
        energy = float(np.sum(np.abs(mf) ** 2 * w))
        length = hi - lo
        coeffs = {}
        for node in "AB":
            for lag in (0, 1):
                support = effective_pulse(np.ones(len(offs[node])), offs[node] - lag, t)
                if not np.any(support != 0):
                    continue
                pulse = effective_pulse(gains[node], offs[node] - lag, t)
                coeffs[(node, lag)] = complex(np.sum(pulse * np.conj(mf) * w) / length)
        out.append((coeffs, energy))
    return out


def matched_filter_waveform(
    p: ChannelProfile, grid: WaveformGrid, method, n_symbols: int
) -> np.ndarray:
    """Integrate the rendered waveform against each window's matched filter.

    Grid cells are assigned to a window by their midpoint, so the result is
    exact when every window edge and pulse edge lies on the grid and
    otherwise carries an O(1/K) error.
    """
    K = grid.K
    t = grid.times
    out = []
    for n in range(1, n_symbols + 1):
        for lo, hi, fnode, fpaths in window_edges(p, method):
            a = int(np.ceil((n - 1 + lo) * K - 0.5))
            b = int(np.ceil((n - 1 + hi) * K - 0.5))
            seg = slice(a, b)
            mf = effective_pulse(
                p.path_gains(fnode)[fpaths], p.path_offsets(fnode)[fpaths] + (n - 1), t[seg]
            )
            out.append(np.sum(grid.samples[seg] * np.conj(mf)) / K / (hi - lo))
    return np.array(out)


def brute_force_posterior(
    t: CoefficientTable, r: np.ndarray, noise_var, c: Constellation
) -> np.ndarray:
    """Joint posterior over all frames, axes ``(A_1..A_N, B_1..B_N)``.

    The log-likelihood of each sample is evaluated on the handful of axes it
    depends on and broadcast-added into the full ``M**(2N)`` tensor.
    """
    r = np.asarray(r, dtype=complex)
    sps = t.samples_per_symbol
    n_sym = len(r) // sps
    m = c.size
    nv = np.broadcast_to(np.asarray(noise_var, dtype=float), (sps,))
    ll = np.zeros((m,) * (2 * n_sym))
    pts = c.point_array
    for n in range(1, n_sym + 1):
        for s, slot in enumerate(t.slots):
            k = (n - 1) * sps + s
            pred = np.zeros((1,) * (2 * n_sym), dtype=complex)
            for (node, lag), coef in zip(slot.variables, slot.coeffs):
                idx = n - lag
                if idx < 1:
                    continue
                axis = (idx - 1) + (0 if node == "A" else n_sym)
                shape = [1] * (2 * n_sym)
                shape[axis] = m
                pred = pred + coef * pts.reshape(shape)
            diff = r[k] - pred
            ll = ll + (-(diff.real**2 + diff.imag**2) / (2.0 * nv[s]))
    ll -= ll.max()
    post = np.exp(ll)
    return post / post.sum()


def joint_marginal(post: np.ndarray, variables, n_symbols: int) -> np.ndarray:
    """Marginal of the brute-force posterior over ``(node, index)`` variables."""
    axes = [(i - 1) + (0 if node == "A" else n_symbols) for node, i in variables]
    other = tuple(a for a in range(post.ndim) if a not in axes)
    marg = post.sum(axis=other)
    kept = sorted(axes)
    return marg.transpose([kept.index(a) for a in axes])


def brute_force_xor_map(post: np.ndarray, c: Constellation):
    """XOR-MAP decisions and their decision margins (top minus runner-up)."""
    n_sym = post.ndim // 2
    dec, margin = [], []
    for n in range(1, n_sym + 1):
        pair = joint_marginal(post, [("A", n), ("B", n)], n_sym)
        px = np.array([pair[c.xor_index == x].sum() for x in range(c.size)])
        order = np.sort(px)
        dec.append(int(np.argmax(px)))
        margin.append(float(order[-1] - order[-2]))
    return np.array(dec), np.array(margin)


def brute_force_user_map(post: np.ndarray, node: str):
    """Per-user symbol marginals, shape ``(N, M)``."""
    n_sym = post.ndim // 2
    return np.stack(
        [joint_marginal(post, [(node, n)], n_sym) for n in range(1, n_sym + 1)]
    )
