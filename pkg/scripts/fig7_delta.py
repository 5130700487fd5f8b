"""BER against the symbol offset delta at a fixed SNR, two-tap INDOOR_A."""

import numpy as np

from _common import parser, save, setup
from mppnc.harness import ExperimentConfig, delta_sweep


def main():
    ap = parser(__doc__, bits=2_000_000)
    ap.add_argument("--modulation", choices=["BPSK", "QPSK"], default="QPSK")
    ap.add_argument("--snr", type=float, default=None, help="default 8 dB QPSK, 6 dB BPSK")
    ap.add_argument("--method", choices=["DOUBLE", "QUAD"], default="DOUBLE")
    args = ap.parse_args()
    setup(args)
    snr = args.snr if args.snr is not None else (8.0 if args.modulation == "QPSK" else 6.0)
    deltas = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    if args.method == "QUAD":
        deltas = tuple(d for d in deltas if 0.05 < d < 0.9)
    cfg = ExperimentConfig(
        modulation=args.modulation, method=args.method, truncate=2, deltas=deltas,
        phase_sets=(((0.0, np.pi / 10), (np.pi / 8, np.pi / 6)),),
        snr_db=(snr,), min_bits=args.bits, max_bits=args.bits,
        decoders=("MP_PNC", "MUD_XOR"), seed=args.seed,
    )
    sweep = delta_sweep(cfg, workers=args.workers)
    save([r for recs in sweep.values() for r in recs], args,
         f"fig7_{args.modulation.lower()}_{args.method.lower()}")
    print(f"{args.modulation} {args.method} at {snr:g} dB")
    print("  delta   MP_PNC BER [95% CI]                 MUD_XOR BER")
    for d, recs in sweep.items():
        mp, mud = recs
        print(f"  {d:4.2f}   {mp.ber:.3e} [{mp.ci95[0]:.2e}, {mp.ci95[1]:.2e}]   {mud.ber:.3e}")


if __name__ == "__main__":
    main()
