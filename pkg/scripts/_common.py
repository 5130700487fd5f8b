"""Shared argument handling for the experiment scripts."""

import argparse
import logging
from pathlib import Path

from mppnc.harness import emit_csv, emit_plotdata, snr_at_ber


def parser(description: str, bits: int = 1_000_000) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--bits", type=int, default=bits, help="bits per point per decoder")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def setup(args) -> None:
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    args.out_dir.mkdir(parents=True, exist_ok=True)


def save(records, args, stem: str) -> None:
    emit_csv(records, args.out_dir / f"{stem}.csv")
    emit_plotdata(records, args.out_dir / f"{stem}.dat")
    print(f"wrote {args.out_dir / stem}.csv and .dat")


def crossing_table(records, target: float = 1e-3) -> None:
    groups = {}
    for r in records:
        groups.setdefault((r.decoder, r.delta, r.phases_a, r.phases_b), []).append(r)
    print(f"SNR (dB) at BER {target:g}:")
    for (dec, delta, pa, pb), recs in groups.items():
        ph = ",".join(f"{x:.3f}" for x in pa) + " | " + ",".join(f"{x:.3f}" for x in pb)
        print(f"  {dec:9s} delta={delta:<4g} phases={ph:32s} {snr_at_ber(recs, target):6.2f}")
