import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mppnc.channel import itu_profile
from mppnc.decoder import (
    BeliefVector,
    DecodingFailure,
    EvidenceNode,
    build_chain,
    decide_xor,
    decode,
    decode_pairs,
    evidence_prob,
    forward_backward,
    mud_decisions,
    xor_decisions,
)
from mppnc.frontend import SampleFrame, add_noise, affine_samples, compute_coefficients, direct_samples
from mppnc.harness import multipath_n0
from mppnc.modem import BPSK, QPSK
from mppnc.oracles import (
    brute_force_posterior,
    brute_force_user_map,
    brute_force_xor_map,
    joint_marginal,
)
from tests.helpers import random_profile

FIXTURES = Path(__file__).parent / "fixtures"


def indoor2(delta=0.5):
    return itu_profile(
        "INDOOR_A", phases_a=(0, np.pi / 10), phases_b=(np.pi / 8, np.pi / 6), delta=delta, n_taps=2
    )


def noisy_frame(p, method, c, n_sym, snr_db, rng):
    t = compute_coefficients(p, method)
    ia, ib = rng.integers(0, c.size, (2, n_sym))
    s = direct_samples(p, t, c.point_array[ia], c.point_array[ib])
    s = add_noise(s, multipath_n0(p, snr_db, c), rng)
    return t, s, ia, ib


def chain_beliefs(t, s, c):
    chain = build_chain(t, s)
    ev = [evidence_prob(e, s.r[e.sample_index - 1], c) for e in chain.evidence]
    return chain, forward_backward(chain, ev)


@settings(max_examples=40)
@given(
    seed=st.integers(0, 2**32 - 1),
    method=st.sampled_from(["DOUBLE", "QUAD"]),
    c=st.sampled_from([BPSK, QPSK]),
    n_sym=st.integers(1, 3),
)
def test_bp_matches_brute_force(seed, method, c, n_sym):
    rng = np.random.default_rng(seed)
    p = random_profile(rng, 2, quad_ok=(method == "QUAD"))
    t, s, _, _ = noisy_frame(p, method, c, n_sym, rng.uniform(0, 10), rng)
    post = brute_force_posterior(t, s.r, s.noise_variance_per_sample[: t.samples_per_symbol], c)
    _, fused = chain_beliefs(t, s, c)
    for b in fused:
        ref = joint_marginal(post, b.variables, n_sym)
        assert np.allclose(b.tensor(), ref, rtol=1e-9, atol=1e-300)
    pairs = decode_pairs(t, s.r[None], s.noise_variance_per_sample[: t.samples_per_symbol], c)[0]
    for n in range(1, n_sym + 1):
        assert np.allclose(pairs[n - 1], joint_marginal(post, [("A", n), ("B", n)], n_sym), rtol=1e-9)
    dec, margin = brute_force_xor_map(post, c)
    got = decide_xor(fused, c).indices(c)
    assert np.all((got == dec) | (margin <= 1e-9))
    for node, axis in (("A", -1), ("B", -2)):
        assert np.allclose(pairs.sum(axis=axis), brute_force_user_map(post, node), rtol=1e-9)


def test_three_tap_double_matches_brute_force(rng):
    p = random_profile(rng, 3)
    t, s, _, _ = noisy_frame(p, "DOUBLE", QPSK, 3, 4.0, rng)
    post = brute_force_posterior(t, s.r, s.noise_variance_per_sample[:2], QPSK)
    _, fused = chain_beliefs(t, s, QPSK)
    for b in fused:
        assert np.allclose(b.tensor(), joint_marginal(post, b.variables, 3), rtol=1e-9)


def test_golden_evidence_vector():
    g = json.loads((FIXTURES / "indoor_a_2tap_evidence.json").read_text())
    p = indoor2()
    t = compute_coefficients(p, "DOUBLE")
    var = t.noise_variances(multipath_n0(p, g["snr_db"], QPSK))[0]
    assert var == pytest.approx(g["noise_var"], rel=1e-9)
    slot = t.slots[0]
    # slot 1 of symbol 2: lag 0 is index 2, lag 1 is index 1
    e = EvidenceNode(3, tuple((node, 2 - lag) for node, lag in slot.variables), slot.coeffs, var)
    b = evidence_prob(e, complex(*g["r"]), QPSK)
    assert [list(v) for v in slot.variables] == g["variables"]
    assert np.allclose(b.probs, g["probs"], rtol=1e-9, atol=1e-12)


def test_chain_structure():
    p = indoor2()
    t = compute_coefficients(p, "QUAD")
    s = direct_samples(p, t, np.ones(5), np.ones(5))
    chain = build_chain(t, s)
    assert len(chain.evidence) == 20
    assert chain.evidence[0].variables == (("A", 1),)
    for a, b, shared in zip(chain.evidence, chain.evidence[1:], chain.shared_vars):
        assert set(shared) == set(a.variables) & set(b.variables)
        assert shared
    # running intersection: a symbol's nodes are contiguous
    for var in {v for e in chain.evidence for v in e.variables}:
        ks = [k for k, e in enumerate(chain.evidence) if var in e.variables]
        assert ks == list(range(ks[0], ks[-1] + 1))


def test_build_chain_rejects_other_table():
    t = compute_coefficients(indoor2(), "DOUBLE")
    s = direct_samples(indoor2(), t, np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        build_chain(compute_coefficients(indoor2(0.4), "DOUBLE"), s)
    with pytest.raises(ValueError):
        build_chain(compute_coefficients(indoor2(), "QUAD"), s)


@pytest.mark.parametrize("method", ["DOUBLE", "QUAD"])
@pytest.mark.parametrize("c", [BPSK, QPSK])
def test_noiseless_decoding_is_exact(method, c, rng):
    p = indoor2()
    t = compute_coefficients(p, method)
    ia, ib = rng.integers(0, c.size, (2, 200, 32))
    r = affine_samples(t, c.point_array[ia], c.point_array[ib])
    var = t.noise_variances(1e-4)
    pairs = decode_pairs(t, r, var, c)
    assert np.array_equal(xor_decisions(pairs, c), c.xor_index[ia, ib])
    assert np.array_equal(mud_decisions(pairs, c), c.xor_index[ia, ib])


def test_second_pass_is_a_no_op(rng):
    t, s, _, _ = noisy_frame(indoor2(), "QUAD", QPSK, 6, 3.0, rng)
    chain = build_chain(t, s)
    ev = [evidence_prob(e, s.r[e.sample_index - 1], QPSK) for e in chain.evidence]
    one = forward_backward(chain, ev, passes=1)
    two = forward_backward(chain, ev, passes=2)
    for a, b in zip(one, two):
        assert np.allclose(a.probs, b.probs, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("scale", [0.1, 3.0, 1e3])
def test_matched_filter_scale_leaves_decisions_unchanged(scale, rng):
    p = indoor2()
    t = compute_coefficients(p, "DOUBLE")
    ia, ib = rng.integers(0, 4, (2, 100, 16))
    n0 = multipath_n0(p, 4.0, QPSK)
    var = t.noise_variances(n0)
    r = affine_samples(t, QPSK.point_array[ia], QPSK.point_array[ib])
    r = r + np.sqrt(np.tile(var, 16)) * (rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape))
    u = t.rescaled(scale)
    a = decode_pairs(t, r, var, QPSK)
    b = decode_pairs(u, scale * r, u.noise_variances(n0), QPSK)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-300)
    assert np.array_equal(xor_decisions(a, QPSK), xor_decisions(b, QPSK))


@given(st.floats(-np.pi, np.pi))
@settings(max_examples=20)
def test_common_phase_rotation_leaves_decisions_unchanged(phi):
    rng = np.random.default_rng(9)
    p = indoor2()
    t = compute_coefficients(p, "DOUBLE")
    rot = np.exp(1j * phi)
    ia, ib = rng.integers(0, 4, (2, 20, 16))
    var = t.noise_variances(multipath_n0(p, 3.0, QPSK))
    w = np.sqrt(np.tile(var, 16)) * (rng.standard_normal((20, 32)) + 1j * rng.standard_normal((20, 32)))
    r = affine_samples(t, QPSK.point_array[ia], QPSK.point_array[ib]) + w
    a = decode_pairs(t, r, var, QPSK)
    b = decode_pairs(t.rescaled(rot), rot * r, var, QPSK)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-300)
    # rotating every tap also leaves the front end unchanged
    q = compute_coefficients(p.rotated(phi), "DOUBLE")
    assert all(np.allclose(x.coeffs, y.coeffs) for x, y in zip(t.slots, q.slots))


def test_ties_go_to_lowest_index():
    pairs = np.full((1, 3, 4, 4), 1 / 16)
    assert xor_decisions(pairs, QPSK).tolist() == [[0, 0, 0]]
    assert mud_decisions(pairs, QPSK).tolist() == [[0, 0, 0]]


def test_decode_single_frame_agrees_with_chain(rng):
    t, s, ia, ib = noisy_frame(indoor2(), "DOUBLE", QPSK, 8, 6.0, rng)
    _, fused = chain_beliefs(t, s, QPSK)
    assert np.array_equal(decode(t, s, QPSK).indices(QPSK), decide_xor(fused, QPSK).indices(QPSK))


def test_non_finite_samples_raise():
    t = compute_coefficients(indoor2(), "DOUBLE")
    r = np.zeros((1, 8), dtype=complex)
    r[0, 3] = np.nan
    with pytest.raises(DecodingFailure):
        decode_pairs(t, r, t.noise_variances(0.1), QPSK)


def test_invalid_noise_variances():
    t = compute_coefficients(indoor2(), "DOUBLE")
    with pytest.raises(ValueError):
        decode_pairs(t, np.zeros((1, 8)), [0.0, 1.0], QPSK)
    e = EvidenceNode(1, (("A", 1),), np.array([1 + 0j]), 0.0)
    with pytest.raises(ValueError):
        evidence_prob(e, 0j, QPSK)
    s = SampleFrame(t.method, np.zeros((2, 8), dtype=complex), np.ones(8), t)
    with pytest.raises(ValueError):
        decode(t, s, QPSK)


def test_belief_vector_marginal():
    probs = np.arange(8, dtype=float)
    probs /= probs.sum()
    b = BeliefVector((("A", 1), ("B", 1), ("A", 2)), probs, 2)
    m = b.marginal([("A", 2), ("A", 1)])
    assert m.shape == (2, 2)
    assert np.allclose(m, b.tensor().sum(axis=1).T)
