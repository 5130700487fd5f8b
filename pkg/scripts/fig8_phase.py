"""MP-PNC BER for small and large relative phase rotations, two-tap INDOOR_A."""

import numpy as np

from _common import crossing_table, parser, save, setup
from mppnc.harness import ExperimentConfig, run_sweep

PI = np.pi
SMALL = ((0.0, PI / 10), (PI / 8, PI / 6))
CASES = {
    "QPSK": (SMALL, ((0.0, PI / 10), (PI / 8, 2 * PI / 3)), ((0.0, PI / 3), (PI / 8, PI / 6)),
             ((0.0, PI / 10), (PI / 2, 2 * PI / 3)), ((0.0, PI / 10), (2 * PI / 3, PI / 6))),
    "BPSK": (SMALL, ((0.0, PI / 10), (5 * PI / 6, 3 * PI / 4))),
}


def main():
    ap = parser(__doc__)
    ap.add_argument("--modulation", choices=["BPSK", "QPSK"], default="QPSK")
    args = ap.parse_args()
    setup(args)
    cfg = ExperimentConfig(
        modulation=args.modulation, method="DOUBLE", truncate=2,
        phase_sets=CASES[args.modulation],
        snr_db=tuple(float(s) for s in np.arange(4.0, 13.0)),
        min_bits=args.bits, max_errors=400, decoders=("MP_PNC",), seed=args.seed,
    )
    recs = run_sweep(cfg, workers=args.workers)
    save(recs, args, f"fig8_{args.modulation.lower()}")
    crossing_table(recs)


if __name__ == "__main__":
    main()
