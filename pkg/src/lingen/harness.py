"""Sweeps over the load gamma, theory curves, and result tables."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from lingen import rng as rngmod
from lingen import theory
from lingen.linalg import empirical_covariance
from lingen.models import Dataset, make_powerlaw_model, make_spiked_model, phase_randomize, sample_dataset
from lingen.overlaps import (
    KINDS,
    OverlapEstimate,
    combine_trials,
    convergence_overlap,
    memorisation_overlap,
    rotated_subspace_overlap,
    subspace_overlap,
)

RESULT_HEADER = (
    "gamma", "effective_gamma", "n", "d", "seed",
    "m_emp", "m_err", "q_emp", "q_err", "Q_emp", "Q_err", "Qstar_emp", "Qstar_err",
    "q_theory", "Q_theory", "m_theory", "kl_exact", "kl_lower", "kl_upper", "ms_exact", "ms_asym",
)  # fmt: skip

THEORY_HEADER = (
    "gamma", "n", "q_analytical", "m_asymptotic", "delta", "delta_sq",
    "kl_exact", "kl_lower", "kl_upper", "kl_upper_refined", "ms_exact", "ms_asym", "ms_branch",
)  # fmt: skip

_TRIAL = 1  # first counter key of every per-trial stream; 0 is the ground-truth model


@dataclass(frozen=True)
class SweepConfig:
    gamma_grid: tuple
    master_seed: int
    model_kind: str = "spiked"
    d: int = 500
    beta: float = 0.0
    sigma_reg: float = 0.0
    alpha: float = 1.0
    basis: str = "haar"
    n_trials: int = 5
    n_latents: int = 64
    outputs: tuple = KINDS
    phase_randomize: bool = False
    out_path: Optional[str] = None
    workers: int = 1
    format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        self.validate()

    def validate(self):
        if self.model_kind not in ("spiked", "powerlaw"):
            raise ValueError(f"model_kind must be 'spiked' or 'powerlaw', got {self.model_kind!r}")
        if self.master_seed is None:
            raise ValueError("a master seed is required")
        if not self.gamma_grid:
            raise ValueError("gamma grid is empty")
        if any(not (g > 0 and math.isfinite(g)) for g in self.gamma_grid):
            raise ValueError("gamma values must be finite and > 0")
        if list(self.gamma_grid) != sorted(self.gamma_grid):
            raise ValueError("gamma grid must be sorted ascending")
        if self.d < 1 or self.n_trials < 1 or self.n_latents < 1 or self.workers < 1:
            raise ValueError("d, n_trials, n_latents and workers must be >= 1")
        if self.beta < 0 or self.sigma_reg < 0:
            raise ValueError("beta and sigma_reg must be >= 0")
        bad = set(self.outputs) - set(KINDS)
        if bad or not self.outputs:
            raise ValueError(f"outputs must be a non-empty subset of {KINDS}, got {self.outputs}")
        if self.format not in ("csv", "jsonl"):
            raise ValueError(f"format must be 'csv' or 'jsonl', got {self.format!r}")

    def n_for(self, gamma: float) -> int:
        return max(1, int(round(gamma * self.d)))


@dataclass(frozen=True)
class ResultRow:
    gamma: float
    effective_gamma: float
    n: int
    d: int
    seed: int
    m_emp: Optional[float] = None
    m_err: Optional[float] = None
    q_emp: Optional[float] = None
    q_err: Optional[float] = None
    Q_emp: Optional[float] = None
    Q_err: Optional[float] = None
    Qstar_emp: Optional[float] = None
    Qstar_err: Optional[float] = None
    q_theory: Optional[float] = None
    Q_theory: Optional[float] = None
    m_theory: Optional[float] = None
    kl_exact: Optional[float] = None
    kl_lower: Optional[float] = None
    kl_upper: Optional[float] = None
    ms_exact: Optional[float] = None
    ms_asym: Optional[float] = None

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in RESULT_HEADER}


def _finite_or_none(x):
    return x if x is not None and math.isfinite(x) else None


def theory_values(gamma: float, beta: float, sigma_reg: float, n: int) -> dict:
    """Every theory column at one grid point.  Undefined entries are ``None``.

    Shared by sweeps and standalone curves so both emit identical numbers.
    """
    out = {"q_analytical": theory.q_analytical(gamma, sigma_reg)}
    out["m_asymptotic"] = theory.m_asymptotic(n, sigma_reg) if n >= 2 else None
    bbp = theory.bbp_overlap(beta, gamma)
    out["delta"], out["delta_sq"] = bbp.delta, bbp.q_theory
    try:
        kl = theory.kl_divergence(gamma, sigma_reg)
        out["kl_exact"] = _finite_or_none(kl.d_exact)
        out["kl_lower"] = _finite_or_none(kl.lower)
        out["kl_upper"] = _finite_or_none(kl.upper)
        out["kl_upper_refined"] = _finite_or_none(kl.upper_refined)
    except theory.DivergenceError:
        out.update(kl_exact=None, kl_lower=None, kl_upper=None, kl_upper_refined=None)
    ms = theory.ms_distance(beta, gamma)
    out["ms_exact"] = ms.d_ms
    out["ms_branch"] = "spike" if ms.spike_branch else "bulk"
    out["ms_asym"] = theory.ms_asymptotic(beta, bbp.q_theory) if ms.spike_branch and beta > 0 else None
    return out


def parse_gamma_grid(text: str) -> list[float]:
    """``"0.25,1,4"`` or ``"lo:hi:lin|log:count"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 4 or parts[2] not in ("lin", "log"):
            raise ValueError(f"grid spec must be lo:hi:lin|log:count, got {text!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[3])
        if count < 1 or not (0 < lo <= hi):
            raise ValueError(f"invalid grid bounds in {text!r}")
        if count == 1:
            return [lo]
        grid = np.geomspace(lo, hi, count) if parts[2] == "log" else np.linspace(lo, hi, count)
        return [float(g) for g in grid]
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("empty gamma grid")
    return values


def build_model(config: SweepConfig):
    model_rng = rngmod.generator(config.master_seed, 0)
    if config.model_kind == "spiked":
        return make_spiked_model(config.d, config.beta, model_rng)
    return make_powerlaw_model(config.d, config.alpha, config.beta, basis=config.basis, seed=model_rng)


def _phase_randomised(data, basis, rng) -> Dataset:
    """Random phases on the rotated coordinates, mapped back to the input space."""
    y = data.samples if basis is None else data.samples @ basis.T
    y = phase_randomize(y, rng)
    x = y if basis is None else y @ basis
    return Dataset(x, provenance={**data.provenance, "phase_randomized": True})


def run_trial(config: SweepConfig, model, gi: int, ti: int) -> dict[str, OverlapEstimate]:
    """One (grid point, trial): two disjoint datasets, the requested overlaps.

    With ``config.phase_randomize`` both datasets are phase-randomised in the
    model's rotated basis before anything is fitted, so every overlap sees the
    control data.
    """
    gamma = config.gamma_grid[gi]
    n = config.n_for(gamma)
    seed = config.master_seed

    def stream(k):
        return rngmod.generator(seed, _TRIAL, gi, ti, k)

    basis = getattr(model, "F", None)
    data_a = sample_dataset(model, n, stream(rngmod.STREAM_DATA_A))
    data_b = sample_dataset(model, n, stream(rngmod.STREAM_DATA_B))
    if config.phase_randomize:
        data_a = _phase_randomised(data_a, basis, stream(rngmod.STREAM_PHASES_A))
        data_b = _phase_randomised(data_b, basis, stream(rngmod.STREAM_PHASES_B))
    out = {}
    wants = set(config.outputs)
    if wants & {"m", "q", "Q"}:
        ga = empirical_covariance(data_a, config.sigma_reg)
        if "m" in wants:
            out["m"] = memorisation_overlap(ga, data_a, config.n_latents, stream(rngmod.STREAM_LATENTS))
        if wants & {"q", "Q"}:
            gb = empirical_covariance(data_b, config.sigma_reg)
            if "q" in wants:
                out["q"] = convergence_overlap(ga, gb, config.n_latents, stream(rngmod.STREAM_LATENTS))
            if "Q" in wants:
                out["Q"] = subspace_overlap(ga, gb)
    if "Qstar" in wants:
        out["Qstar"] = rotated_subspace_overlap(data_a.samples, data_b.samples, basis=basis)
    return out


def _run_task(args):
    config, model, gi, ti = args
    # fixed BLAS thread count keeps floating-point results independent of the worker layout
    with threadpool_limits(limits=1):
        return run_trial(config, model, gi, ti)


def _row(config: SweepConfig, gi: int, seed: int, estimates: dict, theory_cols: dict) -> ResultRow:
    gamma = config.gamma_grid[gi]
    n = config.n_for(gamma)
    vals = {}
    for kind in KINDS:
        est = estimates.get(kind)
        vals[f"{kind}_emp"] = est.mean if est else None
        vals[f"{kind}_err"] = est.std_err if est else None
    return ResultRow(gamma=gamma, effective_gamma=n / config.d, n=n, d=config.d, seed=seed, **vals, **theory_cols)


def _theory_columns(config: SweepConfig, gamma: float) -> dict:
    if config.model_kind != "spiked":
        return {}
    t = theory_values(gamma, config.beta, config.sigma_reg, config.n_for(gamma))
    return {
        "q_theory": t["q_analytical"],
        "Q_theory": t["delta_sq"],
        "m_theory": t["m_asymptotic"],
        "kl_exact": t["kl_exact"],
        "kl_lower": t["kl_lower"],
        "kl_upper": t["kl_upper"],
        "ms_exact": t["ms_exact"],
        "ms_asym": t["ms_asym"],
    }


def run_sweep(config: SweepConfig, aggregate: bool = False) -> list[ResultRow]:
    """Evaluate every (gamma, trial) and return rows ordered by grid then trial.

    With ``aggregate`` one row per grid point is returned instead, holding the
    trial mean and the trial-level standard error (``seed`` is the master seed).
    Output is written to ``config.out_path`` when set.
    """
    model = build_model(config)
    tasks = [(config, model, gi, ti) for gi in range(len(config.gamma_grid)) for ti in range(config.n_trials)]
    if config.workers == 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    rows = []
    for gi, gamma in enumerate(config.gamma_grid):
        theory_cols = _theory_columns(config, gamma)
        per_trial = results[gi * config.n_trials:(gi + 1) * config.n_trials]
        if aggregate:
            combined = {k: combine_trials([r[k] for r in per_trial]) for k in per_trial[0]}
            rows.append(_row(config, gi, config.master_seed, combined, theory_cols))
        else:
            for ti, est in enumerate(per_trial):
                seed = rngmod.derived_seed(config.master_seed, _TRIAL, gi, ti)
                rows.append(_row(config, gi, seed, est, theory_cols))
    if config.out_path:
        write_rows(rows, config.out_path, config.format)
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_table(records: Sequence[dict], header: Sequence[str], fmt: str = "csv") -> str:
    buf = io.StringIO()
    if fmt == "csv":
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        for rec in records:
            wr.writerow([_cell(rec.get(h)) for h in header])
    elif fmt == "jsonl":
        for rec in records:
            buf.write(json.dumps({h: rec.get(h) for h in header}, allow_nan=False) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def _write_text(text: str, path) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_rows(rows: Iterable[ResultRow], path, fmt: str = "csv") -> None:
    _write_text(format_table([r.as_dict() for r in rows], RESULT_HEADER, fmt), path)


_INT_FIELDS = {"n", "d", "seed"}


def _parse_value(name: str, value):
    if value is None or value == "":
        return None
    return int(value) if name in _INT_FIELDS else float(value)


def read_rows(path) -> list[ResultRow]:
    """Parse a result table written by :func:`write_rows` (CSV or JSON lines)."""
    with open(path, newline="") as fh:
        head = fh.readline()
        fh.seek(0)
        if head.startswith("{"):
            recs = [json.loads(line) for line in fh if line.strip()]
        else:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != RESULT_HEADER:
                raise ValueError(f"unexpected header {reader.fieldnames}")
            recs = list(reader)
    names = {f.name for f in fields(ResultRow)}
    return [ResultRow(**{k: _parse_value(k, v) for k, v in rec.items() if k in names}) for rec in recs]


def emit_theory_curves(gamma_grid: Sequence[float], beta: float, sigma_reg: float, d: int = 1000, out_path=None, fmt: str = "csv") -> list[dict]:
    """Theory table over a load grid; ``n = round(gamma d)`` feeds the memorisation column."""
    records = []
    for g in gamma_grid:
        n = max(1, int(round(g * d)))
        rec = {"gamma": float(g), "n": n}
        rec.update(theory_values(float(g), beta, sigma_reg, n))
        records.append(rec)
    if out_path:
        _write_text(format_table(records, THEORY_HEADER, fmt), out_path)
    return records
