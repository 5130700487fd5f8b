"""Full three-tap INDOOR_A BER curves with DOUBLE sampling."""

import numpy as np

from _common import crossing_table, parser, save, setup
from mppnc.harness import ExperimentConfig, run_sweep


def main():
    ap = parser(__doc__)
    ap.add_argument("--modulation", choices=["BPSK", "QPSK"], default="QPSK")
    ap.add_argument("--profile", choices=["INDOOR_A", "ALT_B"], default="INDOOR_A")
    args = ap.parse_args()
    setup(args)
    cfg = ExperimentConfig(
        modulation=args.modulation, method="DOUBLE", profile=args.profile,
        phase_sets=(((0.0, np.pi / 10, np.pi / 5), (np.pi / 8, np.pi / 6, np.pi / 4)),),
        snr_db=tuple(float(s) for s in np.arange(2.0, 12.0)),
        min_bits=args.bits, max_errors=400, seed=args.seed,
    )
    recs = run_sweep(cfg, workers=args.workers)
    save(recs, args, f"fig6_{args.profile.lower()}_{args.modulation.lower()}")
    crossing_table(recs)


if __name__ == "__main__":
    main()
