"""Two-tap INDOOR_A BER curves: MP-PNC (DOUBLE and QUAD), MUD-XOR, sync PNC."""

import numpy as np

from _common import crossing_table, parser, save, setup
from mppnc.harness import ExperimentConfig, run_sweep


def main():
    ap = parser(__doc__)
    ap.add_argument("--modulation", choices=["BPSK", "QPSK"], default="QPSK")
    args = ap.parse_args()
    setup(args)
    grid = tuple(float(s) for s in np.arange(2.0, 11.0))
    records = []
    for method in ("DOUBLE", "QUAD"):
        cfg = ExperimentConfig(
            modulation=args.modulation, method=method, truncate=2,
            phase_sets=(((0.0, np.pi / 10), (np.pi / 8, np.pi / 6)),),
            snr_db=grid, min_bits=args.bits, max_errors=400, seed=args.seed,
        )
        recs = run_sweep(cfg, workers=args.workers)
        save(recs, args, f"fig5_{args.modulation.lower()}_{method.lower()}")
        records += recs
    crossing_table(records)


if __name__ == "__main__":
    main()
