"""Experiment grid orchestration, persistence and CSV reports."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import sim, thermo, verify, vqa
from .ansatz import ParamSet
from .thermo import GibbsTarget, TFIMParams

log = logging.getLogger(__name__)

RESULTS_COLUMNS = (
    "profile", "n", "h", "beta", "seed", "restart", "iterations", "final_cost",
    "fidelity", "beta_star", "delta_beta", "even_parity_fraction", "wall_time_s",
)

# Hardware observations kept alongside reports for comparison only.
REFERENCE_EVEN_PARITY = {2: 0.9589, 3: 0.8848, 4: 0.8735}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    n: list[int]
    h: list[float]
    beta: list[float]
    device_profile: str = "noiseless"
    ancilla_layers: int = 1
    system_layers: int = 1
    restarts: int = 1
    max_iterations: int = 100
    shots: dict | None = field(default_factory=lambda: asdict(vqa.ShotsPlan()))
    tomography_shots: int = 1024
    sweep_grid: list[float] | None = None
    master_seed: int = 0
    output_directory: str = "results"
    workers: int = 1

    def __post_init__(self):
        for key in ("n", "h", "beta"):
            if not getattr(self, key):
                raise ConfigError(f"'{key}' must be a nonempty list")
        if any(int(n) < 2 for n in self.n):
            raise ConfigError("every n must be >= 2")
        if any(not b > 0 for b in self.beta):
            raise ConfigError("every beta must be > 0")
        try:
            sim.get_profile(self.device_profile)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        if self.restarts < 1 or self.max_iterations < 0 or self.tomography_shots < 1:
            raise ConfigError("restarts, max_iterations and tomography_shots must be positive")
        if self.shots is not None:
            try:
                vqa.ShotsPlan(**self.shots)
            except TypeError as exc:
                raise ConfigError(f"bad shots plan: {exc}") from None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"n", "h", "beta"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    @property
    def shots_plan(self) -> vqa.ShotsPlan | None:
        return None if self.shots is None else vqa.ShotsPlan(**self.shots)

    @property
    def grid(self) -> np.ndarray:
        return verify.default_grid() if self.sweep_grid is None else np.asarray(self.sweep_grid, float)

    def points(self) -> list["PointSpec"]:
        out = []
        for n, h, beta, r in itertools.product(self.n, self.h, self.beta, range(self.restarts)):
            out.append(PointSpec(self.device_profile, int(n), float(h), float(beta), r,
                                 point_seed(self.master_seed, int(n), float(h), float(beta), r)))
        return out


@dataclass(frozen=True)
class PointSpec:
    profile: str
    n: int
    h: float
    beta: float
    restart: int
    seed: int

    @property
    def key(self) -> str:
        return f"{self.profile}_n{self.n}_h{self.h:.17g}_b{self.beta:.17g}_r{self.restart}"


def point_seed(master_seed: int, n: int, h: float, beta: float, restart: int) -> int:
    text = f"{master_seed}|{n}|{h!r}|{beta!r}|{restart}"
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass
class ExperimentRecord:
    profile: str
    n: int
    h: float
    beta: float
    seed: int
    restart: int
    iterations: int = 0
    final_cost: float = float("nan")
    fidelity: float = float("nan")
    beta_star: float = float("nan")
    delta_beta: float = float("nan")
    even_parity_fraction: float = float("nan")
    wall_time_s: float = 0.0
    params: dict | None = None
    sweep_grid: list[float] | None = None
    sweep_fidelities: list[float] | None = None
    error: str | None = None
    failed_stage: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentRecord":
        return cls(**json.loads(text))


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def run_point(spec: PointSpec, cfg: ExperimentConfig) -> ExperimentRecord:
    """Train, prepare, tomograph and sweep one grid point (single restart)."""
    t0 = time.perf_counter()
    rec = ExperimentRecord(spec.profile, spec.n, spec.h, spec.beta, spec.seed, spec.restart)
    profile = sim.get_profile(spec.profile)
    target = GibbsTarget(TFIMParams(spec.n, spec.h), spec.beta)
    train_seed, tomo_seed = np.random.SeedSequence(spec.seed).generate_state(2)
    stage = "train"
    try:
        res = vqa.train(
            target, profile, 1, int(train_seed),
            max_iter=cfg.max_iterations, shots=cfg.shots_plan, select="cost",
            ancilla_layers=cfg.ancilla_layers, system_layers=cfg.system_layers,
        )
        rec.iterations = res.iterations
        rec.final_cost = res.best_cost
        rec.params = res.best_params.to_dict()
        stage = "prepare"
        rho_s = vqa.prepare_system_state(res.best_params, profile)
        stage = "verify"
        v = verify.validate_state(rho_s, target, profile, cfg.tomography_shots, int(tomo_seed), cfg.grid)
        rec.fidelity = v.fidelity
        rec.even_parity_fraction = v.even_parity_fraction
        rec.beta_star = v.sweep.beta_star
        rec.delta_beta = v.sweep.delta_beta
        rec.sweep_grid = [float(b) for b in v.sweep.grid]
        rec.sweep_fidelities = [float(f) for f in v.sweep.fidelities]
    except Exception as exc:  # recorded per point; the grid keeps going
        log.exception("point %s failed in stage %s", spec.key, stage)
        rec.error = f"{type(exc).__name__}: {exc}"
        rec.failed_stage = stage
    rec.wall_time_s = time.perf_counter() - t0
    return rec


def _record_path(out: Path, spec: PointSpec) -> Path:
    return out / "records" / f"{spec.key}.json"


def _run_and_save(spec: PointSpec, cfg: ExperimentConfig, out: Path) -> ExperimentRecord:
    rec = run_point(spec, cfg)
    write_atomic(_record_path(out, spec), rec.to_json())
    return rec


def run_grid(cfg: ExperimentConfig, out=None, workers: int | None = None) -> list[ExperimentRecord]:
    """Run every missing grid point; completed records on disk are reused."""
    out = Path(out or cfg.output_directory)
    try:
        (out / "records").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out / "records", os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    specs = cfg.points()
    records: dict[PointSpec, ExperimentRecord] = {}
    todo = []
    for spec in specs:
        path = _record_path(out, spec)
        if path.exists():
            records[spec] = ExperimentRecord.from_json(path.read_text())
        else:
            todo.append(spec)
    log.info("%d points, %d to run", len(specs), len(todo))
    workers = workers or cfg.workers
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {spec: pool.submit(_run_and_save, spec, cfg, out) for spec in todo}
            for spec, fut in futures.items():
                records[spec] = fut.result()
    else:
        for spec in todo:
            records[spec] = _run_and_save(spec, cfg, out)
    return [records[s] for s in specs]


def load_records(out) -> list[ExperimentRecord]:
    return [ExperimentRecord.from_json(p.read_text()) for p in sorted(Path(out, "records").glob("*.json"))]


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def results_csv(records: list[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_COLUMNS)
    for rec in sorted(records, key=lambda r: (r.profile, r.n, r.h, r.beta, r.restart)):
        w.writerow([_fmt(getattr(rec, c)) for c in RESULTS_COLUMNS])
    return buf.getvalue()


def best_of_restarts(records: list[ExperimentRecord]) -> list[ExperimentRecord]:
    """Highest-fidelity record per (profile, n, h, beta)."""
    groups: dict[tuple, ExperimentRecord] = {}
    for rec in records:
        key = (rec.profile, rec.n, rec.h, rec.beta)
        cur = groups.get(key)
        fid = rec.fidelity if np.isfinite(rec.fidelity) else -1.0
        if cur is None or fid > (cur.fidelity if np.isfinite(cur.fidelity) else -1.0):
            groups[key] = rec
    return [groups[k] for k in sorted(groups)]


def report(records: list[ExperimentRecord], out) -> list[Path]:
    """Write ``results.csv``, per-point sweep curves and ``delta_beta.csv``."""
    if not records:
        raise ValueError("no records to report")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "results.csv"]
    write_atomic(written[0], results_csv(records))
    best = best_of_restarts(records)
    for rec in best:
        if rec.sweep_grid is None:
            continue
        path = out / f"sweep_{rec.n}_{rec.h:g}_{rec.beta:g}.csv"
        rows = ["beta,fidelity"] + [
            f"{b:.17g},{f:.17g}" for b, f in zip(rec.sweep_grid, rec.sweep_fidelities)
        ]
        write_atomic(path, "\n".join(rows) + "\n")
        written.append(path)
    rows = ["profile,n,h,beta,beta_star,delta_beta,fidelity,even_parity_fraction,reference_even_parity"]
    for rec in sorted(best, key=lambda r: (r.n, r.beta, r.h, r.profile)):
        ref = REFERENCE_EVEN_PARITY.get(rec.n, float("nan"))
        rows.append(",".join(_fmt(v) for v in (
            rec.profile, rec.n, rec.h, rec.beta, rec.beta_star, rec.delta_beta,
            rec.fidelity, rec.even_parity_fraction, ref,
        )))
    path = out / "delta_beta.csv"
    write_atomic(path, "\n".join(rows) + "\n")
    written.append(path)
    return written
