"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 decoding failure,
3 validation-oracle mismatch.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .baselines import sync_xor_decisions
from .channel import format_taps, render_waveform
from .decoder import DecodingFailure, decode_pairs, mud_decisions, xor_decisions
from .frontend import affine_samples, compute_coefficients, direct_samples
from .harness import (
    ConfigError,
    ExperimentConfig,
    _rng,
    emit_csv,
    emit_plotdata,
    load_config,
    multipath_n0,
    run_sweep,
    sync_n0,
)
from .modem import QPSK
from .oracles import (
    brute_force_posterior,
    joint_marginal,
    matched_filter_waveform,
    quadrature_coefficients,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DECODING = 2
EXIT_ORACLE = 3

COEF_TOL = 1e-10
BP_TOL = 1e-9
WAVEFORM_K = 2**14
WAVEFORM_TOL = 1e-6


class OracleMismatch(RuntimeError):
    pass


def _profiles(cfg: ExperimentConfig):
    for d, pa, pb in cfg.scenarios():
        yield cfg.build_profile(d, pa, pb)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    records = run_sweep(cfg, workers=args.workers)
    emit_csv(records, args.out)
    if args.plotdata:
        emit_plotdata(records, args.plotdata)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_coeffs(args) -> int:
    cfg = load_config(args.config)
    for p in _profiles(cfg):
        t = compute_coefficients(p, cfg.sampling)
        print(f"# {t.method.value} delta={p.delta!r}")
        print(f"#   taps_a = {format_taps(p.taps_a)}")
        print(f"#   taps_b = {format_taps(p.taps_b)}")
        for k, slot in enumerate(t.slots, 1):
            print(f"slot {k}: [{slot.start:.6g}, {slot.stop:.6g}) filter={slot.filter_node}"
                  f"{list(slot.filter_paths)} noise_scale={t.noise_scales[k - 1]!r}")
            for (node, lag), c in zip(slot.variables, slot.coeffs):
                name = f"x_{node}[n{'-1' if lag else ''}]"
                print(f"  {name:10s} {c.real:+.15e} {c.imag:+.15e}j")
    return EXIT_OK


def _waveform_tolerance(p, t) -> float:
    """Zero-ish if all edges sit on the grid, else a first-order cell bound."""
    edges = [s.start for s in t.slots] + [s.stop for s in t.slots]
    edges += list(p.path_offsets("A")) + list(p.path_offsets("B"))
    edges = np.mod(np.asarray(edges), 1.0) * WAVEFORM_K
    if np.allclose(edges, np.round(edges), atol=1e-6):
        return WAVEFORM_TOL
    amp = (np.sum(np.abs(p.path_gains("A"))) + np.sum(np.abs(p.path_gains("B")))) ** 2
    n_edges = 2 * (len(p.taps_a) + len(p.taps_b)) + 2
    return float(max(n_edges * amp / (WAVEFORM_K * s.length) for s in t.slots)) * 2


def _validate_profile(p, method, rng, n_frames: int = 4) -> list[str]:
    c = QPSK
    t = compute_coefficients(p, method)
    lines = []

    worst = 0.0
    for slot, (ref, energy) in zip(t.slots, quadrature_coefficients(p, method)):
        if set(ref) != set(slot.variables):
            raise OracleMismatch(f"slot variables {slot.variables} vs oracle {sorted(ref)}")
        worst = max(worst, max(abs(slot.coefficient(v) - ref[v]) for v in ref))
        worst = max(worst, abs(slot.filter_energy - energy))
    lines.append(f"coefficients vs quadrature: max |err| = {worst:.3e}")
    if worst > COEF_TOL:
        raise OracleMismatch(lines[-1])

    tol = _waveform_tolerance(p, t)
    worst = 0.0
    for _ in range(n_frames):
        ia, ib = rng.integers(0, c.size, (2, 8))
        xa, xb = c.point_array[ia], c.point_array[ib]
        grid = render_waveform(p, xa, xb, WAVEFORM_K)
        ref = matched_filter_waveform(p, grid, method, 8)
        got = direct_samples(p, t, xa, xb).r
        worst = max(worst, float(np.max(np.abs(got - ref))))
    lines.append(f"samples vs waveform integration: max |err| = {worst:.3e} (tol {tol:.1e})")
    if worst > tol:
        raise OracleMismatch(lines[-1])

    worst = 0.0
    n_sym = 3
    nv = t.noise_variances(multipath_n0(p, 4.0, c))
    for _ in range(n_frames):
        ia, ib = rng.integers(0, c.size, (2, n_sym))
        r = affine_samples(t, c.point_array[ia], c.point_array[ib])
        noise = rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape)
        r = r + np.sqrt(np.tile(nv, n_sym)) * noise
        pairs = decode_pairs(t, r[None], nv, c)[0]
        post = brute_force_posterior(t, r, nv, c)
        for n in range(1, n_sym + 1):
            ref = joint_marginal(post, [("A", n), ("B", n)], n_sym)
            worst = max(worst, float(np.max(np.abs(pairs[n - 1] - ref) / np.maximum(ref, 1e-300))))
    lines.append(f"BP pair marginals vs brute force: max rel err = {worst:.3e}")
    if worst > BP_TOL:
        raise OracleMismatch(lines[-1])
    return lines


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    rng = np.random.default_rng(cfg.seed)
    for p in _profiles(cfg):
        print(f"# {cfg.sampling.value} delta={p.delta!r}")
        try:
            for line in _validate_profile(p, cfg.sampling, rng):
                print(f"  ok   {line}")
        except OracleMismatch as exc:
            print(f"  FAIL {exc}")
            return EXIT_ORACLE
    return EXIT_OK


def cmd_decode(args) -> int:
    cfg = load_config(args.config)
    if args.frames < 1:
        raise ConfigError("--frames must be positive")
    c = cfg.constellation
    d, pa, pb = cfg.scenarios()[0]
    p = cfg.build_profile(d, pa, pb)
    t = compute_coefficients(p, cfg.sampling)
    rng = _rng(cfg.seed, 0, 0)
    n = cfg.frame_len
    ia = rng.integers(0, c.size, (args.frames, n))
    ib = rng.integers(0, c.size, (args.frames, n))
    xa, xb = c.point_array[ia], c.point_array[ib]
    truth = c.indices_to_bits(c.xor_index[ia, ib])

    var = t.noise_variances(multipath_n0(p, args.snr, c))
    r = affine_samples(t, xa, xb)
    r = r + np.sqrt(np.tile(var, n)) * (
        rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape)
    )
    pairs = decode_pairs(t, r, var, c)
    var_sync = 0.5 * sync_n0(args.snr, c)
    y = xa + xb + np.sqrt(var_sync) * (
        rng.standard_normal(xa.shape) + 1j * rng.standard_normal(xa.shape)
    )
    decisions = {
        "MP_PNC": xor_decisions(pairs, c),
        "MUD_XOR": mud_decisions(pairs, c),
        "SYNC_PNC": sync_xor_decisions(y, var_sync, c),
    }
    print(f"# {c.kind.value} {t.method.value} delta={p.delta!r} snr_db={args.snr!r} "
          f"frames={args.frames} frame_len={n}")
    for name in cfg.decoders:
        errs = int(np.count_nonzero(c.indices_to_bits(decisions[name]) != truth))
        print(f"{name:9s} bits={truth.size} errors={errs} ber={errs / truth.size:.4e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mppnc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log per-point progress")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run a BER sweep and write CSV")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--plotdata", default=None, help="optional gnuplot data output")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("coeffs", help="print the integration coefficient tables")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("validate", help="check fast paths against the slow oracles")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("decode", help="decode a batch of random frames at one SNR")
    sp.add_argument("--config", required=True)
    sp.add_argument("--snr", type=float, required=True, help="per-bit SNR in dB")
    sp.add_argument("--frames", type=int, default=100)
    sp.set_defaults(func=cmd_decode)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DecodingFailure as exc:
        print(f"decoding failure: {exc}", file=sys.stderr)
        return EXIT_DECODING


if __name__ == "__main__":
    sys.exit(main())
