"""Ensemble fidelity-loss scans over sequence families.

A scan runs many independent realizations per (family, order) point.  Each
realization draws a fresh bath model, a Haar-random qubit state and a random
computational bath state from a child generator whose seed is a SHA-256 hash
of (master_seed, sequence, order, index).  Keying the hash on the sequence
string rather than the family name makes identical sequences reachable from
different families (and from the equivalence-class envelope) produce
bit-identical samples, so paired comparisons between families are exact.

Fidelity loss is 1 - sqrt(<psi|rho|psi>).  Every realization yields a loss;
the exact error-per-gate is additionally recorded when ``||H||*T < pi``
holds, and realizations outside that window only count as excluded for the
error-action statistics (the reduced dynamics itself needs no logarithm).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError
from .sequence import cdd, compile_cpdd, owdd_enumerate, owdd_h, owdd_l
from . import dynamics

__all__ = [
    "FAMILY_SEQUENCES",
    "RealizationResult",
    "ScanConfig",
    "ScanRecord",
    "child_seed",
    "class_members",
    "load_records",
    "persist",
    "resolve_workers",
    "run_realization",
    "run_scan",
]

ENVELOPE_FAMILY = "owdd_class_envelope"
FAMILY_SEQUENCES = {"cdd": cdd, "owdd_h": owdd_h, "owdd_l": owdd_l}
KNOWN_FAMILIES = tuple(FAMILY_SEQUENCES) + (ENVELOPE_FAMILY,)

CSV_COLUMNS = [
    "family",
    "order",
    "sequence",
    "n_slots",
    "duration_s",
    "mean_loss",
    "std_loss",
    "min_loss",
    "max_loss",
    "n_ok",
    "n_excluded",
]

OUTPUT_META = {
    "fidelity_loss": "1 - sqrt(<psi|rho|psi>)",
    "units": "beta_hz and j_hz are operator norms in rad/s (hbar=1, no 2*pi factor)",
    "seeding": "child seed = sha256(master_seed|sequence|order|index)[:8]",
}


@dataclass(frozen=True)
class ScanConfig:
    """Full description of one scan; scans are pure functions of this."""

    beta_hz: float
    j_hz: float
    tau0_s: float
    master_seed: int
    n_bath: int = 3
    realizations: int = 500
    families: tuple[str, ...] = ("cdd", "owdd_h", "owdd_l")
    orders: tuple[int, ...] = (1, 2, 3, 4)
    max_class_samples: int = 64

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "orders", tuple(int(o) for o in self.orders))
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.tau0_s <= 0:
            raise ConfigError("tau0_s must be positive")
        if not self.orders:
            raise ConfigError("orders must be non-empty")
        if any(o < 1 for o in self.orders):
            raise ConfigError("orders must be >= 1")
        if self.n_bath < 2:
            raise ConfigError("n_bath must be >= 2")
        if self.max_class_samples < 2:
            raise ConfigError("max_class_samples must be >= 2")
        unknown = set(self.families) - set(KNOWN_FAMILIES)
        if unknown:
            raise ConfigError(
                f"unknown families {sorted(unknown)}; known: {list(KNOWN_FAMILIES)}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be an object, got {type(data).__name__}")
        required = ("beta_hz", "j_hz", "tau0_s", "master_seed")
        missing = [k for k in required if k not in data]
        if missing:
            raise ConfigError(f"missing required config fields: {missing}")
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str) -> "ScanConfig":
        if path.endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            try:
                with open(path, "rb") as fh:
                    data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        else:
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RealizationResult:
    loss: float
    epg: float | None
    converged: bool


@dataclass(frozen=True)
class ScanRecord:
    """Aggregated loss statistics for one (family, order) scan point."""

    family: str
    order: int
    sequence: str
    n_slots: int
    duration_s: float
    mean_loss: float
    std_loss: float
    min_loss: float
    max_loss: float
    n_ok: int
    n_excluded: int

    @property
    def realizations(self) -> int:
        return self.n_ok + self.n_excluded

    def to_csv_row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]

    def to_json_dict(self) -> dict:
        data = asdict(self)
        data["realizations"] = self.realizations
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScanRecord":
        fields = {k: data[k] for k in cls.__dataclass_fields__}
        return cls(**fields)


def child_seed(master_seed: int, sequence: str, order: int, index) -> int:
    """Stable 64-bit child seed; independent of execution order."""
    msg = f"{master_seed}|{sequence}|{order}|{index}".encode()
    return int.from_bytes(hashlib.sha256(msg).digest()[:8], "big")


def _run_sequence_realization(config: ScanConfig, sequence: str, order: int, index: int) -> RealizationResult:
    rng = np.random.default_rng(child_seed(config.master_seed, sequence, order, index))
    model = dynamics.sample_bath(config.n_bath, config.beta_hz, config.j_hz, rng)
    amp = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi_sys = amp / np.linalg.norm(amp)
    bits = rng.integers(0, 2, size=config.n_bath)
    bath_index = int("".join(str(b) for b in bits), 2)
    bath_state = np.zeros(model.dim_bath, dtype=complex)
    bath_state[bath_index] = 1.0
    psi0 = np.kron(psi_sys, bath_state)

    sched = compile_cpdd(sequence, config.tau0_s)
    psi_t = dynamics.apply_schedule(model, sched, psi0)
    loss = dynamics.fidelity_loss(psi_t, psi_sys)

    converged = model.h_norm() * sched.duration < np.pi
    epg = dynamics.exact_error_action(model, sched).epg if converged else None
    return RealizationResult(loss=float(loss), epg=epg, converged=converged)


def run_realization(config: ScanConfig, family: str, order: int, index: int) -> RealizationResult:
    """One fidelity-loss sample for a named family at one order."""
    if family not in FAMILY_SEQUENCES:
        raise ValueError(f"family must be one of {sorted(FAMILY_SEQUENCES)}")
    sequence = FAMILY_SEQUENCES[family](order)
    return _run_sequence_realization(config, sequence, order, index)


def class_members(alpha: int, cap: int, master_seed: int) -> list[str]:
    """Deterministic envelope subsample of the order-alpha equivalence class.

    The maximum-switch and blocked members are always included so the
    envelope brackets both named curves; the rest fills up deterministically
    from the master seed.
    """
    members = list(owdd_enumerate(alpha))
    if len(members) <= cap:
        return members
    pinned = []
    for name in (owdd_h(alpha), owdd_l(alpha)):
        if name not in pinned:
            pinned.append(name)
    rest = [m for m in members if m not in pinned]
    rng = np.random.default_rng(child_seed(master_seed, "class-envelope", alpha, 0))
    picked = rng.choice(len(rest), size=cap - len(pinned), replace=False)
    return pinned + [rest[i] for i in sorted(picked)]


def _member_stats(config: ScanConfig, sequence: str, order: int):
    losses = np.empty(config.realizations)
    n_ok = 0
    epgs = []
    for index in range(config.realizations):
        res = _run_sequence_realization(config, sequence, order, index)
        losses[index] = res.loss
        if res.converged:
            n_ok += 1
            epgs.append(res.epg)
    return losses, n_ok, epgs


def _scan_job(args):
    config, family, order, sequences = args
    return [(seq,) + tuple(_member_stats(config, seq, order)) for seq in sequences]


def resolve_workers(max_workers: int | None = None) -> int:
    """Explicit argument wins, then DDKIT_THREADS, then all cores."""
    if max_workers is not None:
        return max(1, int(max_workers))
    env = os.environ.get("DDKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"DDKIT_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def run_scan(config: ScanConfig, max_workers: int | None = None) -> list[ScanRecord]:
    """One record per (family, order); envelope families spread over members.

    The output is a pure function of the config: samples are derived from
    per-index child seeds and reduced in index order, so neither the worker
    count nor scheduling affects any bit of the result.
    """
    jobs = []
    for family in config.families:
        for order in config.orders:
            if family == ENVELOPE_FAMILY:
                seqs = tuple(class_members(order, config.max_class_samples, config.master_seed))
            else:
                seqs = (FAMILY_SEQUENCES[family](order),)
            jobs.append((config, family, order, seqs))

    workers = resolve_workers(max_workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_job, jobs))
    else:
        results = [_scan_job(job) for job in jobs]

    records = []
    for (cfg, family, order, seqs), member_rows in zip(jobs, results):
        duration = (1 << len(seqs[0])) * config.tau0_s
        n_slots = 1 << len(seqs[0])
        if family == ENVELOPE_FAMILY:
            member_means = np.array([row[1].mean() for row in member_rows])
            n_ok = sum(row[2] for row in member_rows)
            total = config.realizations * len(seqs)
            record = ScanRecord(
                family=family,
                order=order,
                sequence=f"class[{len(seqs)}]",
                n_slots=n_slots,
                duration_s=duration,
                mean_loss=float(member_means.mean()),
                std_loss=float(member_means.std()),
                min_loss=float(member_means.min()),
                max_loss=float(member_means.max()),
                n_ok=n_ok,
                n_excluded=total - n_ok,
            )
        else:
            seq, losses, n_ok, _ = member_rows[0]
            record = ScanRecord(
                family=family,
                order=order,
                sequence=seq,
                n_slots=n_slots,
                duration_s=duration,
                mean_loss=float(losses.mean()),
                std_loss=float(losses.std()),
                min_loss=float(losses.min()),
                max_loss=float(losses.max()),
                n_ok=n_ok,
                n_excluded=config.realizations - n_ok,
            )
        records.append(record)
    return records


def collect_epg_pairs(config: ScanConfig, family: str, order: int) -> list[tuple[float, float]]:
    """(loss, exact EPG) pairs over the realizations whose EPG converged."""
    sequence = FAMILY_SEQUENCES[family](order)
    out = []
    for index in range(config.realizations):
        res = _run_sequence_realization(config, sequence, order, index)
        if res.converged:
            out.append((res.loss, res.epg))
    return out


def persist(records, path: str, format: str = "csv") -> str:
    """Write records as CSV (exactly the 11 documented columns) or JSON."""
    try:
        if format == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for rec in records:
                    writer.writerow(rec.to_csv_row())
        elif format == "json":
            payload = {
                "meta": dict(OUTPUT_META),
                "records": [rec.to_json_dict() for rec in records],
            }
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
        else:
            raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def load_records(path: str, format: str | None = None) -> list[ScanRecord]:
    """Read back records written by :func:`persist`."""
    if format is None:
        format = "json" if path.endswith(".json") else "csv"
    if format == "json":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return [ScanRecord.from_json_dict(d) for d in payload["records"]]
    records = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
        for row in reader:
            records.append(
                ScanRecord(
                    family=row["family"],
                    order=int(row["order"]),
                    sequence=row["sequence"],
                    n_slots=int(row["n_slots"]),
                    duration_s=float(row["duration_s"]),
                    mean_loss=float(row["mean_loss"]),
                    std_loss=float(row["std_loss"]),
                    min_loss=float(row["min_loss"]),
                    max_loss=float(row["max_loss"]),
                    n_ok=int(row["n_ok"]),
                    n_excluded=int(row["n_excluded"]),
                )
            )
    return records
