"""Sum-product decoding of the XOR symbol stream on the sample chain.

Every matched-filter sample becomes an evidence node over the symbols
whose pulses overlap its window (two to four of ``x_A[n-1], x_A[n],
x_B[n-1], x_B[n]``; fewer in the first symbol period because the guard
symbols ``x_A[0] = x_B[0] = 0`` are known).  Consecutive nodes share
symbols and a symbol's support is one contiguous time interval, so the
nodes form a chain with the running-intersection property: one forward
and one backward sweep of messages over the shared symbols gives exact
posterior marginals.

Messages are kept as normalized log-probabilities.  The batch engine
works on ``(M**d, F)`` arrays so a whole batch of frames is decoded per
node step.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .frontend import CoefficientTable, SampleFrame
from .modem import Constellation, SymbolFrame

__all__ = [
    "BeliefVector",
    "DecodingFailure",
    "EvidenceNode",
    "TannerChain",
    "build_chain",
    "decide_xor",
    "decode",
    "decode_pairs",
    "evidence_prob",
    "forward_backward",
    "mud_decisions",
    "xor_decisions",
]


class DecodingFailure(RuntimeError):
    """A message or belief vanished entirely (total underflow or NaN input)."""


@dataclass(frozen=True)
class EvidenceNode:
    sample_index: int  # 1-based position in the sample stream
    variables: tuple[tuple[str, int], ...]  # (node, absolute symbol index)
    affine_coeffs: np.ndarray
    noise_var: float  # per real/imaginary component


@dataclass(frozen=True)
class BeliefVector:
    """Probabilities over joint symbol-index tuples.

    ``probs`` is flat with the first variable most significant, i.e. it is
    ``tensor().ravel()``.
    """

    variables: tuple[tuple[str, int], ...]
    probs: np.ndarray
    M: int

    def tensor(self) -> np.ndarray:
        return self.probs.reshape((self.M,) * len(self.variables))

    def marginal(self, variables) -> np.ndarray:
        """Marginal tensor over ``variables`` (in the given order)."""
        pos = [self.variables.index(tuple(v)) for v in variables]
        other = tuple(i for i in range(len(self.variables)) if i not in pos)
        t = self.tensor().sum(axis=other) if other else self.tensor()
        kept = sorted(pos)
        return t.transpose([kept.index(p) for p in pos])


@dataclass(frozen=True)
class TannerChain:
    evidence: tuple[EvidenceNode, ...]
    shared_vars: tuple[tuple[tuple[str, int], ...], ...]  # between node k and k+1
    samples: np.ndarray
    n_symbols: int
    samples_per_symbol: int


def _node_layout(table: CoefficientTable, n_symbols: int):
    """Per-sample variable lists and coefficients for an N-symbol frame."""
    out = []
    for n in range(1, n_symbols + 1):
        for slot in table.slots:
            keep = [i for i, (_, lag) in enumerate(slot.variables) if n - lag >= 1]
            vars_ = tuple((slot.variables[i][0], n - slot.variables[i][1]) for i in keep)
            out.append((vars_, slot.coeffs[keep]))
    return out


def _shared(a, b):
    return tuple(sorted(set(a) & set(b), key=lambda v: (v[1], v[0])))


def build_chain(t: CoefficientTable, s: SampleFrame) -> TannerChain:
    """One evidence node per sample of a single (1-D) sample frame."""
    if s.method is not t.method:
        raise ValueError("sample frame and table use different sampling methods")
    if s.table is not None and (s.table.method, s.table.profile) != (t.method, t.profile):
        raise ValueError("sample frame was produced under a different table")
    r = np.asarray(s.r)
    if r.ndim != 1:
        raise ValueError("build_chain expects a single frame")
    sps = t.samples_per_symbol
    n_sym = s.n_symbols
    nv = np.asarray(s.noise_variance_per_sample, dtype=float)
    layout = _node_layout(t, n_sym)
    nodes = tuple(
        EvidenceNode(k + 1, vars_, coeffs, float(nv[k]))
        for k, (vars_, coeffs) in enumerate(layout)
    )
    shared = tuple(_shared(a.variables, b.variables) for a, b in zip(nodes, nodes[1:]))
    return TannerChain(nodes, shared, r, n_sym, sps)


def _predictions(coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Noiseless sample value for every joint tuple, flattened."""
    d = len(coeffs)
    m = len(points)
    pred = np.zeros((m,) * d, dtype=complex)
    for v, c in enumerate(coeffs):
        shape = [1] * d
        shape[v] = m
        pred = pred + c * points.reshape(shape)
    return pred.ravel()


def _log_evidence(r: np.ndarray, pred: np.ndarray, var: float) -> np.ndarray:
    """Log-likelihoods of shape ``(len(pred), len(r))``, peak-normalized to 0."""
    diff = pred[:, None] - r[None, :]
    ll = -(diff.real**2 + diff.imag**2) / (2.0 * var)
    return ll - ll.max(axis=0, keepdims=True)


def evidence_prob(e: EvidenceNode, r: complex, c: Constellation) -> BeliefVector:
    """Normalized Gaussian likelihood of every joint tuple given sample ``r``."""
    if not e.noise_var > 0:
        raise ValueError("evidence needs a positive noise variance")
    pred = _predictions(e.affine_coeffs, c.point_array)
    lp = _log_evidence(np.array([complex(r)]), pred, e.noise_var)[:, 0]
    p = np.exp(lp)
    return BeliefVector(e.variables, p / p.sum(), c.size)


# -- batch engine -----------------------------------------------------------


def logsumexp(x: np.ndarray, axis, keepdims: bool = False) -> np.ndarray:
    """log(sum(exp(x))) over ``axis``; all ``-inf`` slices give ``-inf``."""
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return out if keepdims else np.squeeze(out, axis=axis)


# Batch arrays are ``(M**d, F)``: joint tuple first, frames last, so that
# every reduction runs over whole contiguous rows.


def _normalize(lp: np.ndarray) -> np.ndarray:
    z = logsumexp(lp, axis=0, keepdims=True)
    if not np.all(np.isfinite(z)):
        raise DecodingFailure("belief vanished during message passing")
    return lp - z


def _marginalize(lp: np.ndarray, d: int, m: int, pos) -> np.ndarray:
    f = lp.shape[-1]
    x = lp.reshape((m,) * d + (f,))
    other = tuple(i for i in range(d) if i not in pos)
    y = logsumexp(x, axis=other) if other else x
    kept = sorted(pos)
    y = y.transpose([kept.index(p) for p in pos] + [len(pos)])
    return y.reshape(-1, f)


def _expand(msg: np.ndarray, d: int, m: int, pos) -> np.ndarray:
    f = msg.shape[-1]
    x = msg.reshape((m,) * len(pos) + (f,))
    order = np.argsort(pos)
    x = x.transpose([int(o) for o in order] + [len(pos)])
    shape = [m if i in pos else 1 for i in range(d)] + [f]
    return x.reshape(shape)


def _absorb(lp: np.ndarray, msg: np.ndarray, d: int, m: int, pos) -> np.ndarray:
    """Multiply (add, in log) an incoming message into a node belief."""
    f = lp.shape[-1]
    out = lp.reshape((m,) * d + (f,)) + _expand(msg, d, m, pos)
    return out.reshape(-1, f)


def _links(node_vars):
    """(positions in node k, positions in node k+1) of the shared symbols."""
    links = []
    for a, b in zip(node_vars, node_vars[1:]):
        sh = _shared(a, b)
        links.append(([a.index(v) for v in sh], [b.index(v) for v in sh]))
    return links


def _sum_product(log_ev, node_vars, m: int, keep=None, passes: int = 1):
    """Forward/backward sweeps; returns fused log-beliefs for nodes in ``keep``.

    ``log_ev`` holds one ``(M**d_k, F)`` array per node.  ``keep`` defaults
    to every node.
    """
    k_total = len(log_ev)
    dims = [len(v) for v in node_vars]
    links = _links(node_vars)
    keep = set(range(k_total)) if keep is None else set(keep)
    fused = {}
    for _ in range(passes):
        fwd = [None] * k_total
        for k in range(k_total - 1):
            cur = log_ev[k]
            if fwd[k] is not None:
                cur = _absorb(cur, fwd[k], dims[k], m, links[k - 1][1])
            fwd[k + 1] = _normalize(_marginalize(cur, dims[k], m, links[k][0]))
        bwd = None
        for k in range(k_total - 1, -1, -1):
            cur = log_ev[k]
            if bwd is not None:
                cur = _absorb(cur, bwd, dims[k], m, links[k][0])
            if k in keep:
                full = cur
                if fwd[k] is not None:
                    full = _absorb(full, fwd[k], dims[k], m, links[k - 1][1])
                fused[k] = _normalize(full)
            if k > 0:
                bwd = _normalize(_marginalize(cur, dims[k], m, links[k - 1][1]))
    return fused


def forward_backward(
    chain: TannerChain, beliefs, passes: int = 1
) -> list[BeliefVector]:
    """Fused per-node beliefs: evidence times both incoming messages.

    ``beliefs`` are the per-node evidence vectors from :func:`evidence_prob`.
    End nodes simply lack the missing incoming message.  ``passes > 1``
    repeats the schedule (a no-op on a tree, kept for checking that).
    """
    if len(beliefs) != len(chain.evidence):
        raise ValueError("need one evidence vector per chain node")
    m = beliefs[0].M
    node_vars = [b.variables for b in beliefs]
    with np.errstate(divide="ignore"):
        log_ev = [np.log(b.probs)[:, None] for b in beliefs]
    fused = _sum_product(log_ev, node_vars, m, passes=passes)
    out = []
    for k, b in enumerate(beliefs):
        p = np.exp(fused[k][:, 0])
        out.append(BeliefVector(b.variables, p / p.sum(), m))
    return out


def _xor_probs(pair: np.ndarray, c: Constellation) -> np.ndarray:
    """Sum joint (a, b) probabilities ``(..., M, M)`` into XOR classes."""
    m = c.size
    out = np.zeros(pair.shape[:-2] + (m,))
    for x in range(m):
        out[..., x] = pair[..., c.xor_index == x].sum(axis=-1)
    return out


def decide_xor(fused, c: Constellation) -> SymbolFrame:
    """Per-symbol XOR-MAP decision from fused beliefs.

    For symbol ``n`` the last belief that holds both ``x_A[n]`` and
    ``x_B[n]`` is marginalized onto that pair.  Ties go to the lowest
    constellation index.
    """
    by_n = {}
    for b in fused:
        for node, n in b.variables:
            if ("A", n) in b.variables and ("B", n) in b.variables:
                by_n[n] = b
    n_sym = max(by_n)
    idx = np.empty(n_sym, dtype=np.intp)
    for n in range(1, n_sym + 1):
        pair = by_n[n].marginal([("A", n), ("B", n)])
        idx[n - 1] = int(np.argmax(_xor_probs(pair, c)))
    return SymbolFrame("R", c.point_array[idx], c.indices_to_bits(idx))


def decode_pairs(
    t: CoefficientTable, r: np.ndarray, noise_var, c: Constellation
) -> np.ndarray:
    """Posterior of ``(x_A[n], x_B[n])`` for a batch of frames.

    ``r`` has shape ``(F, sps * N)``; ``noise_var`` is the per-component
    variance of each slot (length ``sps``).  Returns probabilities of shape
    ``(F, N, M, M)``.
    """
    r = np.atleast_2d(np.asarray(r, dtype=complex))
    sps = t.samples_per_symbol
    n_sym = r.shape[1] // sps
    noise_var = np.broadcast_to(np.asarray(noise_var, dtype=float), (sps,))
    if np.any(noise_var <= 0):
        raise ValueError("noise variances must be positive")
    m = c.size
    node_vars, preds = _batch_layout(t, n_sym, c)
    log_ev = [
        _log_evidence(r[:, k], preds[k], noise_var[k % sps]) for k in range(len(node_vars))
    ]
    decision_nodes = [sps * n - 1 for n in range(1, n_sym + 1)]
    fused = _sum_product(log_ev, node_vars, m, keep=decision_nodes)
    out = np.empty((r.shape[0], n_sym, m, m))
    for n in range(1, n_sym + 1):
        k = sps * n - 1
        pos = [node_vars[k].index(("A", n)), node_vars[k].index(("B", n))]
        lp = _marginalize(fused[k], len(node_vars[k]), m, pos)
        out[:, n - 1] = np.exp(lp).T.reshape(-1, m, m)
    if not np.all(np.isfinite(out)):
        raise DecodingFailure("non-finite pair posterior")
    return out


def _batch_layout(t: CoefficientTable, n_sym: int, c: Constellation):
    return _cached_layout(t, n_sym, c)


@lru_cache(maxsize=64)
def _cached_layout(t: CoefficientTable, n_sym: int, c: Constellation):
    layout = _node_layout(t, n_sym)
    node_vars = [v for v, _ in layout]
    preds = [_predictions(coeffs, c.point_array) for _, coeffs in layout]
    return node_vars, preds


def xor_decisions(pairs: np.ndarray, c: Constellation) -> np.ndarray:
    """XOR-MAP symbol indices ``(F, N)`` from pair posteriors."""
    return np.argmax(_xor_probs(pairs, c), axis=-1)


def mud_decisions(pairs: np.ndarray, c: Constellation) -> np.ndarray:
    """Hard-decide each user from its own marginal, then XOR the decisions."""
    a = np.argmax(pairs.sum(axis=-1), axis=-1)
    b = np.argmax(pairs.sum(axis=-2), axis=-1)
    return c.xor_index[a, b]


def decode(t: CoefficientTable, s: SampleFrame, c: Constellation) -> SymbolFrame:
    """MP-PNC decision for one sample frame."""
    r = np.asarray(s.r)
    if r.ndim != 1:
        raise ValueError("decode expects a single frame; use decode_pairs for batches")
    sps = t.samples_per_symbol
    nv = np.asarray(s.noise_variance_per_sample, dtype=float)[:sps]
    idx = xor_decisions(decode_pairs(t, r[None, :], nv, c), c)[0]
    return SymbolFrame("R", c.point_array[idx], c.indices_to_bits(idx))
