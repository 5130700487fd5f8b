"""Monte Carlo BER sweeps over SNR, symbol offset and path phases.

Per-bit SNR is equalized across systems.  For the multipath systems

    E_b = (E_A + E_B) / (2 * bits_per_symbol)

where ``E_X`` is the energy of node X's received effective pulse (all
paths, including their overlap), and ``N0 = E_b / snr``.  The synchronous
baseline uses unit-energy symbols per node, i.e. ``E_b = 1 /
bits_per_symbol``.

Every (scenario, SNR) point draws its frames from its own RNG stream,
``SeedSequence(seed, spawn_key=(point, batch))``, so results do not depend
on how points are spread over worker processes.
"""

from __future__ import annotations

import csv
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .baselines import sync_xor_decisions
from .channel import (
    ChannelProfile,
    ChannelValidationError,
    Tap,
    itu_profile,
    parse_real,
    parse_taps,
    pulse_energy,
)
from .decoder import decode_pairs, mud_decisions, xor_decisions
from .frontend import (
    CoefficientTable,
    DegenerateWindowError,
    SamplingMethod,
    WindowOrderingError,
    affine_samples,
    compute_coefficients,
)
from .modem import Constellation, constellation

__all__ = [
    "CSV_COLUMNS",
    "DECODERS",
    "BerRecord",
    "ConfigError",
    "ExperimentConfig",
    "delta_sweep",
    "emit_csv",
    "emit_plotdata",
    "load_config",
    "multipath_n0",
    "parse_config",
    "phase_sweep",
    "read_csv",
    "run_sweep",
    "snr_at_ber",
    "sync_n0",
]

log = logging.getLogger(__name__)

DECODERS = ("MP_PNC", "MUD_XOR", "SYNC_PNC")
CSV_COLUMNS = (
    "decoder", "snr_db", "delta", "phases_a", "phases_b",
    "bits", "errors", "ber", "ci_low", "ci_high",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    modulation: str = "QPSK"
    method: str = "DOUBLE"
    profile: str | None = "INDOOR_A"
    taps_a: tuple[Tap, ...] | None = None
    taps_b: tuple[Tap, ...] | None = None
    truncate: int | None = None
    deltas: tuple[float, ...] = (0.5,)
    # one (phases_a, phases_b) pair per phase scenario; None keeps tap phases
    phase_sets: tuple[tuple[tuple[float, ...] | None, tuple[float, ...] | None], ...] = (
        (None, None),
    )
    snr_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    frame_len: int = 64
    min_bits: int = 100_000
    max_bits: int | None = None
    max_errors: int = 200
    decoders: tuple[str, ...] = DECODERS
    seed: int = 1
    batch_symbols: int = 32_768

    def __post_init__(self):
        if not self.snr_db:
            raise ConfigError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("snr grid must be strictly increasing")
        if self.frame_len < 2:
            raise ConfigError("frame_len must be >= 2")
        if self.min_bits < 10_000:
            raise ConfigError("min_bits must be >= 10^4")
        if self.max_bits is not None and self.max_bits < self.min_bits:
            raise ConfigError("max_bits must be >= min_bits")
        if self.max_errors < 1:
            raise ConfigError("max_errors must be positive")
        bad = set(self.decoders) - set(DECODERS)
        if bad or not self.decoders:
            raise ConfigError(f"unknown decoders {sorted(bad)}")
        if self.profile is None and (self.taps_a is None or self.taps_b is None):
            raise ConfigError("need a preset profile or both taps_a and taps_b")
        try:
            SamplingMethod(self.method.upper())
            constellation(self.modulation)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def constellation(self) -> Constellation:
        return constellation(self.modulation)

    @property
    def sampling(self) -> SamplingMethod:
        return SamplingMethod(self.method.upper())

    def scenarios(self):
        """(delta, phases_a, phases_b) in sweep order."""
        return [(d, pa, pb) for d in self.deltas for pa, pb in self.phase_sets]

    def build_profile(self, delta: float, phases_a=None, phases_b=None) -> ChannelProfile:
        try:
            if self.profile is not None:
                base = itu_profile(self.profile, delta=delta, n_taps=self.truncate)
            else:
                k = self.truncate
                base = ChannelProfile(self.taps_a[:k], self.taps_b[:k], delta)
            if phases_a is not None or phases_b is not None:
                pa = list(phases_a) if phases_a is not None else [t.phase for t in base.taps_a]
                pb = list(phases_b) if phases_b is not None else [t.phase for t in base.taps_b]
                pa = pa[: len(base.taps_a)]
                pb = pb[: len(base.taps_b)]
                base = base.with_phases(pa, pb)
            return base
        except (ChannelValidationError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid channel for delta={delta}: {exc}") from exc


@dataclass(frozen=True)
class BerRecord:
    decoder: str
    snr_db: float
    delta: float
    phases_a: tuple[float, ...]
    phases_b: tuple[float, ...]
    bits: int
    errors: int
    ber: float = field(init=False)
    ci95: tuple[float, float] = field(init=False)

    def __post_init__(self):
        if self.bits <= 0 or not 0 <= self.errors <= self.bits:
            raise ValueError("need 0 <= errors <= bits and bits > 0")
        object.__setattr__(self, "ber", self.errors / self.bits)
        lo, hi = proportion_confint(self.errors, self.bits, alpha=0.05, method="wilson")
        # Wilson bounds may land a rounding step outside [0, 1] or past ber
        lo = min(max(float(lo), 0.0), self.ber)
        hi = max(min(float(hi), 1.0), self.ber)
        object.__setattr__(self, "ci95", (lo, hi))

    @property
    def sigma(self) -> float:
        """Binomial standard error, floored at one error's worth."""
        p = max(self.ber, 1.0 / self.bits)
        return float(np.sqrt(p * (1 - p) / self.bits))


# -- config files -----------------------------------------------------------


def _reals(text: str) -> tuple[float, ...]:
    return tuple(parse_real(v) for v in text.split(",") if v.strip())


def _phase_lists(text: str):
    return [_reals(chunk) for chunk in text.split(";")]


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment)."""
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        kv[k.lower()] = v
    known = {
        "modulation", "method", "profile", "taps_a", "taps_b", "truncate", "delta",
        "phases_a", "phases_b", "snr_db", "frame_len", "min_bits", "max_bits",
        "max_errors", "decoders", "seed", "batch_symbols",
    }
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    args = {}
    try:
        if "modulation" in kv:
            args["modulation"] = kv["modulation"].upper()
        if "method" in kv:
            args["method"] = kv["method"].upper()
        if "taps_a" in kv or "taps_b" in kv:
            args["profile"] = None
            args["taps_a"] = parse_taps(kv.get("taps_a", ""))
            args["taps_b"] = parse_taps(kv.get("taps_b", ""))
        if "profile" in kv:
            if "taps_a" in kv or "taps_b" in kv:
                raise ConfigError("give either profile or taps_a/taps_b, not both")
            args["profile"] = kv["profile"].upper()
        if "truncate" in kv:
            args["truncate"] = int(kv["truncate"])
        if "delta" in kv:
            args["deltas"] = _reals(kv["delta"])
        if "phases_a" in kv or "phases_b" in kv:
            pa = _phase_lists(kv["phases_a"]) if "phases_a" in kv else [None]
            pb = _phase_lists(kv["phases_b"]) if "phases_b" in kv else [None]
            if len(pa) != len(pb) and 1 not in (len(pa), len(pb)):
                raise ConfigError("phases_a and phases_b need matching set counts")
            n = max(len(pa), len(pb))
            pa = pa * n if len(pa) == 1 else pa
            pb = pb * n if len(pb) == 1 else pb
            args["phase_sets"] = tuple(zip(pa, pb))
        if "snr_db" in kv:
            args["snr_db"] = _reals(kv["snr_db"])
        for key in ("frame_len", "min_bits", "max_bits", "max_errors", "seed", "batch_symbols"):
            if key in kv:
                args[key] = int(float(kv[key]))
        if "decoders" in kv:
            args["decoders"] = tuple(d.strip().upper() for d in kv["decoders"].split(",") if d.strip())
        cfg = ExperimentConfig(**args)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    for d, pa, pb in cfg.scenarios():
        profile = cfg.build_profile(d, pa, pb)
        try:
            compute_coefficients(profile, cfg.sampling)
        except (WindowOrderingError, DegenerateWindowError) as exc:
            raise ConfigError(f"delta={d}: {exc}") from exc
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# -- simulation -------------------------------------------------------------


def multipath_n0(p: ChannelProfile, snr_db: float, c: Constellation) -> float:
    e_a = pulse_energy(p.path_gains("A"), p.path_offsets("A"))
    e_b = pulse_energy(p.path_gains("B"), p.path_offsets("B"))
    eb = (e_a + e_b) / (2 * c.bits_per_symbol)
    return eb / 10 ** (snr_db / 10)


def sync_n0(snr_db: float, c: Constellation) -> float:
    return (1.0 / c.bits_per_symbol) / 10 ** (snr_db / 10)


def _rng(seed: int, point: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, batch)))


def _run_point(task):
    cfg, point, delta, pa, pb, snr = task
    c = cfg.constellation
    profile = cfg.build_profile(delta, pa, pb)
    table = compute_coefficients(profile, cfg.sampling)
    return _simulate_point(cfg, point, table, c, snr)


def _simulate_point(cfg: ExperimentConfig, point: int, table: CoefficientTable,
                    c: Constellation, snr: float) -> list[BerRecord]:
    n = cfg.frame_len
    k = c.bits_per_symbol
    frames = max(1, cfg.batch_symbols // n)
    max_bits = cfg.max_bits or cfg.min_bits
    n0_mp = multipath_n0(table.profile, snr, c)
    var_mp = table.noise_variances(n0_mp)
    var_sync = 0.5 * sync_n0(snr, c)
    bits = dict.fromkeys(cfg.decoders, 0)
    errors = dict.fromkeys(cfg.decoders, 0)

    def active(d):
        return bits[d] < cfg.min_bits or (errors[d] < cfg.max_errors and bits[d] < max_bits)

    batch = 0
    while any(active(d) for d in cfg.decoders):
        rng = _rng(cfg.seed, point, batch)
        batch += 1
        ia = rng.integers(0, c.size, (frames, n))
        ib = rng.integers(0, c.size, (frames, n))
        xa, xb = c.point_array[ia], c.point_array[ib]
        shape = (frames, table.samples_per_symbol * n)
        w_mp = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        w_sync = rng.standard_normal((frames, n)) + 1j * rng.standard_normal((frames, n))
        truth = c.indices_to_bits(c.xor_index[ia, ib])
        decisions = {}
        if any(active(d) for d in ("MP_PNC", "MUD_XOR") if d in bits):
            r = affine_samples(table, xa, xb)
            r += np.sqrt(np.tile(var_mp, n)) * w_mp
            pairs = decode_pairs(table, r, var_mp, c)
            decisions["MP_PNC"] = xor_decisions(pairs, c)
            decisions["MUD_XOR"] = mud_decisions(pairs, c)
        if "SYNC_PNC" in bits and active("SYNC_PNC"):
            y = xa + xb + np.sqrt(var_sync) * w_sync
            decisions["SYNC_PNC"] = sync_xor_decisions(y, var_sync, c)
        for d in cfg.decoders:
            if active(d) and d in decisions:
                bits[d] += frames * n * k
                errors[d] += int(np.count_nonzero(c.indices_to_bits(decisions[d]) != truth))
    p = table.profile
    phases_a = tuple(t.phase for t in p.taps_a)
    phases_b = tuple(t.phase for t in p.taps_b)
    return [
        BerRecord(d, snr, p.delta, phases_a, phases_b, bits[d], errors[d])
        for d in cfg.decoders
    ]


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[BerRecord]:
    """All decoders at every (delta, phase set, SNR) point, in sweep order."""
    tasks = [
        (cfg, i, d, pa, pb, snr)
        for i, ((d, pa, pb), snr) in enumerate(itertools.product(cfg.scenarios(), cfg.snr_db))
    ]
    for _, _, d, pa, pb, _ in tasks[:: len(cfg.snr_db)]:
        cfg.build_profile(d, pa, pb)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    for t, recs in zip(tasks, results):
        log.info("point %d snr=%.2f dB delta=%.3f: %s", t[1], t[5], t[2],
                 ", ".join(f"{r.decoder}={r.ber:.3e}" for r in recs))
    return [r for recs in results for r in recs]


def delta_sweep(cfg: ExperimentConfig, workers: int = 1) -> dict[float, list[BerRecord]]:
    out: dict[float, list[BerRecord]] = {}
    for r in run_sweep(cfg, workers):
        out.setdefault(r.delta, []).append(r)
    return out


def phase_sweep(cfg: ExperimentConfig, workers: int = 1):
    """Records keyed by ``(phases_a, phases_b)``."""
    out: dict[tuple, list[BerRecord]] = {}
    for r in run_sweep(cfg, workers):
        out.setdefault((r.phases_a, r.phases_b), []).append(r)
    return out


def snr_at_ber(records, target: float = 1e-3) -> float:
    """SNR where a BER curve crosses ``target`` (log-BER linear interpolation).

    ``records`` belong to one decoder/scenario.  Returns ``nan`` when the
    curve does not bracket the target.
    """
    pts = sorted((r.snr_db, r.ber) for r in records)
    lt = np.log10(target)
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 >= target >= b1 and b1 > 0:
            l0, l1 = np.log10(b0), np.log10(b1)
            if l0 == l1:
                return s0
            return s0 + (lt - l0) * (s1 - s0) / (l1 - l0)
    return float("nan")


# -- output -----------------------------------------------------------------


def _fmt_phases(ph) -> str:
    return ";".join(repr(float(x)) for x in ph)


def _parse_phases(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(";") if x)


def emit_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([
                r.decoder, repr(float(r.snr_db)), repr(float(r.delta)),
                _fmt_phases(r.phases_a), _fmt_phases(r.phases_b),
                r.bits, r.errors, repr(r.ber), repr(r.ci95[0]), repr(r.ci95[1]),
            ])


def read_csv(path) -> list[BerRecord]:
    out = []
    with open(path, newline="") as fh:
        rows = csv.DictReader(fh)
        if tuple(rows.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {rows.fieldnames}")
        for row in rows:
            out.append(BerRecord(
                row["decoder"], float(row["snr_db"]), float(row["delta"]),
                _parse_phases(row["phases_a"]), _parse_phases(row["phases_b"]),
                int(row["bits"]), int(row["errors"]),
            ))
    return out


def emit_plotdata(records, path) -> None:
    """gnuplot data: one block per (decoder, scenario), two blank lines apart."""
    groups: dict[tuple, list[BerRecord]] = {}
    for r in records:
        groups.setdefault((r.decoder, r.delta, r.phases_a, r.phases_b), []).append(r)
    with open(path, "w") as fh:
        for i, ((dec, delta, pa, pb), recs) in enumerate(groups.items()):
            if i:
                fh.write("\n\n")
            fh.write(f"# decoder={dec} delta={delta!r} phases_a={_fmt_phases(pa)} "
                     f"phases_b={_fmt_phases(pb)}\n")
            fh.write("# snr_db ber ci_low ci_high bits errors\n")
            for r in sorted(recs, key=lambda r: r.snr_db):
                fh.write(f"{r.snr_db!r} {r.ber!r} {r.ci95[0]!r} {r.ci95[1]!r} "
                         f"{r.bits} {r.errors}\n")


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)
