"""Monte-Carlo sweeps over network parameters and their CSV/JSON output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .optimizer import BeamStatus, SolverSettings, maximize_min_sinr
from .scenario import ScenarioConfig, sample_channels
from .signal_model import forms_for

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("P_t", "I_p", "R", "pairs")
CSV_COLUMNS = ("sweep_variable", "value", "mean_worst_sinr_db", "stderr_db",
               "trials_ok", "trials_failed")
FLAG_FAILURE_FRACTION = 0.10


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


@dataclass(frozen=True)
class SweepSpec:
    """One curve: ``base`` with ``sweep_variable`` set to each entry of ``values``.

    Power values are in dB relative to ``sigma_n2``; counts are integers.
    """

    base: ScenarioConfig
    sweep_variable: str
    values: tuple
    trials: int = 200
    seed_base: int = 0
    label: str = ""
    note: str = ""
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep_variable must be one of {SWEEP_VARIABLES}")
        vals = tuple(self.values)
        if not vals:
            raise ValueError("values must be non-empty")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("values must be strictly increasing")
        if self.sweep_variable in ("R", "pairs") and any(int(v) != v or v < 1 for v in vals):
            raise ValueError(f"{self.sweep_variable} values must be positive integers")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "values", vals)

    @property
    def common_random_numbers(self) -> bool:
        """Reuse channel draws across values when the dimensions do not change."""
        return self.sweep_variable in ("P_t", "I_p")

    def config_at(self, value) -> ScenarioConfig:
        v = self.sweep_variable
        if v in ("P_t", "I_p"):
            return self.base.replace(**{v: db_to_linear(value)})
        if v == "R":
            return self.base.replace(R=int(value))
        return self.base.replace(M=int(value), N=int(value))

    def trial_seed(self, value, trial: int) -> int:
        key = (trial,) if self.common_random_numbers else (float(value), trial)
        digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
        return (self.seed_base ^ struct.unpack("<Q", digest)[0]) & (2**64 - 1)

    def to_dict(self) -> dict:
        d = {"base": asdict(self.base), "sweep_variable": self.sweep_variable,
             "values": list(self.values), "trials": self.trials, "seed_base": self.seed_base,
             "label": self.label, "note": self.note, "settings": asdict(self.settings)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        return cls(base=ScenarioConfig(**d["base"]), sweep_variable=d["sweep_variable"],
                   values=tuple(d["values"]), trials=d.get("trials", 200),
                   seed_base=d.get("seed_base", 0), label=d.get("label", ""),
                   note=d.get("note", ""),
                   settings=SolverSettings(**d.get("settings", {})))


@dataclass
class TrialOutcome:
    seed: int
    gamma_lo: float
    gamma_star: float
    status: str
    sound: bool


@dataclass
class PointResult:
    value: float
    mean_db: float | None
    stderr_db: float | None
    raw_db: list  # worst-case SINR in dB per trial, None where the solve failed
    trials_ok: int
    trials_failed: int
    unsound: int = 0

    @property
    def flagged(self) -> bool:
        n = self.trials_ok + self.trials_failed
        return n > 0 and self.trials_failed / n > FLAG_FAILURE_FRACTION


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list[PointResult]
    metadata: dict = field(default_factory=dict)

    @property
    def means(self) -> np.ndarray:
        return np.array([np.nan if p.mean_db is None else p.mean_db for p in self.points])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([np.nan if p.stderr_db is None else p.stderr_db for p in self.points])

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(),
                "points": [{**asdict(p), "flagged": p.flagged} for p in self.points],
                "metadata": self.metadata}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        pts = []
        for p in d["points"]:
            p = {k: v for k, v in p.items() if k != "flagged"}
            pts.append(PointResult(**p))
        return cls(SweepSpec.from_dict(d["spec"]), pts, d.get("metadata", {}))

    def __eq__(self, other):
        if not isinstance(other, SweepResult):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def run_trial(config: ScenarioConfig, settings: SolverSettings) -> TrialOutcome:
    forms = forms_for(config, sample_channels(config))
    sol = maximize_min_sinr(forms, config.I_p, config.P_t, settings)
    return TrialOutcome(seed=config.seed, gamma_lo=sol.bracket[0], gamma_star=sol.gamma_star,
                        status=sol.status.value,
                        sound=sol.is_sound(config.I_p, config.P_t))


def _run_job(job):
    return run_trial(*job)


def _aggregate(value, outcomes: list[TrialOutcome]) -> PointResult:
    raw = []
    for o in outcomes:
        ok = o.status == BeamStatus.CONVERGED.value and o.gamma_star > 0
        raw.append(float(10 * np.log10(o.gamma_star)) if ok else None)
    vals = np.array([r for r in raw if r is not None])
    n = vals.size
    mean = float(np.sum(vals) / n) if n else None
    se = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else (0.0 if n == 1 else None)
    return PointResult(value=value, mean_db=mean, stderr_db=se, raw_db=raw, trials_ok=n,
                       trials_failed=len(raw) - n,
                       unsound=sum(not o.sound for o in outcomes))


def sweep_jobs(spec: SweepSpec) -> list[tuple[ScenarioConfig, SolverSettings]]:
    jobs = []
    for value in spec.values:
        cfg = spec.config_at(value)
        for t in range(spec.trials):
            jobs.append((cfg.replace(seed=spec.trial_seed(value, t)), spec.settings))
    return jobs


def run_sweep(spec: SweepSpec, workers: int = 1, progress=None) -> SweepResult:
    """Solve every (value, trial) instance and aggregate per value.

    Jobs are independent; results come back in submission order, so the
    aggregate does not depend on ``workers``.
    """
    jobs = sweep_jobs(spec)
    t0 = time.time()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        outcomes = []
        for i, job in enumerate(jobs):
            outcomes.append(run_trial(*job))
            if progress is not None:
                progress(i + 1, len(jobs))
    points = []
    for k, value in enumerate(spec.values):
        pt = _aggregate(value, outcomes[k * spec.trials:(k + 1) * spec.trials])
        if pt.flagged:
            log.warning("%s=%s: %d of %d trials failed", spec.sweep_variable, value,
                        pt.trials_failed, spec.trials)
        points.append(pt)
    meta = {"version": __version__, "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "elapsed_s": round(time.time() - t0, 3),
            "common_random_numbers": spec.common_random_numbers}
    if spec.note:
        meta["note"] = spec.note
    return SweepResult(spec, points, meta)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for p in result.points:
        wr.writerow([result.spec.sweep_variable, _fmt(p.value), _fmt(p.mean_db),
                     _fmt(p.stderr_db), p.trials_ok, p.trials_failed])
    return buf.getvalue()


def emit(result: SweepResult, format: str, path) -> None:
    if format == "csv":
        text = to_csv(result)
    elif format == "json":
        text = json.dumps(result.to_dict(), indent=1)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    with open(path, "w") as fh:
        fh.write(text)


def load_result(path) -> SweepResult:
    with open(path) as fh:
        return SweepResult.from_dict(json.load(fh))


# -- sweep files ---------------------------------------------------------------

def _base_from_db(d: dict) -> ScenarioConfig:
    """Build a config from a dict whose powers may be given as ``<name>_db``."""
    kw = {}
    for k, v in d.items():
        if k.endswith("_db"):
            kw[k[:-3]] = db_to_linear(v)
        else:
            kw[k] = v
    return ScenarioConfig(**kw)


def specs_from_file_dict(doc: dict) -> list[SweepSpec]:
    """Expand a sweep file into one spec per curve.

    A file may carry a ``series`` block (``variable`` and ``values``), which
    repeats the sweep once per series value; those curves share channel draws
    whenever the dimensions agree because they share ``seed_base``.
    """
    base = _base_from_db(doc["base"])
    settings = SolverSettings(**doc.get("settings", {}))
    common = dict(sweep_variable=doc["sweep_variable"], values=tuple(doc["values"]),
                  trials=int(doc.get("trials", 200)), seed_base=int(doc.get("seed_base", 0)),
                  note=doc.get("note", ""), settings=settings)
    label = doc.get("label", "sweep")
    series = doc.get("series")
    if not series:
        return [SweepSpec(base=base, label=label, **common)]
    var = series["variable"]
    if var not in SWEEP_VARIABLES or var == common["sweep_variable"]:
        raise ValueError(f"invalid series variable {var!r}")
    specs = []
    for v in series["values"]:
        helper = SweepSpec(base=base, sweep_variable=var, values=(v,), trials=1)
        specs.append(SweepSpec(base=helper.config_at(v), label=f"{label}_{var}={v:g}", **common))
    return specs


def figure_preset(name: str, trials: int = 200, seed_base: int = 2024) -> dict:
    """Sweep files reproducing the three simulation figures (powers in dB)."""
    base = {"R": 10, "M": 3, "N": 3, "P_p_db": 5.0, "P_s_db": 5.0, "sigma_n2": 1.0,
            "I_p_db": 0.0, "P_t_db": 0.0}
    grid = [0.0, 4.0, 8.0, 12.0, 16.0, 20.0]
    common = {"sweep_variable": "P_t", "values": grid, "trials": trials,
              "seed_base": seed_base, "label": name}
    if name == "fig2":
        return {**common, "base": base, "series": {"variable": "I_p", "values": [-10.0, -5.0, 0.0]}}
    if name == "fig3":
        return {**common, "base": {**base, "I_p_db": 10.0},
                "series": {"variable": "pairs", "values": [2, 3, 4]},
                "note": "I_p = 10 dB lies outside the {-10, -5, 0} dB caps of the power sweep"}
    if name == "fig4":
        return {**common, "base": {**base, "I_p_db": 0.0},
                "series": {"variable": "R", "values": [6, 8, 10, 12]}}
    raise ValueError(f"unknown preset {name!r}; choose fig2, fig3 or fig4")


def write_outputs(results: list[SweepResult], out_dir, format: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for res in results:
        p = os.path.join(out_dir, f"{res.spec.label or 'sweep'}.{format}")
        emit(res, format, p)
        paths.append(p)
    return paths
