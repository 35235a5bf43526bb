"""Ensemble, convergence and chaotic-divergence studies, plus their CSV files."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .models import ModelSpec, get_model
from .solver import Scheme, SolverConfig, replicate_seeds, solve_ensemble

FLOAT_FMT = "%.17g"
FLOOR_FACTOR = 10.0
MIN_SLOPE_POINTS = 4


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


@dataclass
class EnsembleRecord:
    model: str
    scheme: str
    s: int
    h: float
    n_replicates: int
    seed: int
    seeds: list[int]
    probabilistic: bool
    times: np.ndarray
    states: np.ndarray  # (n, N+1, d)
    diverged_at: np.ndarray
    wall_clock_per_replicate: float
    step_evaluations: int = 0
    n_steps: int = 0
    warmup_points: int = 0

    def summary(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return summarize(self.times, self.states)


def summarize(times: np.ndarray, states: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-time mean and (population) sd over replicates whose values are all finite."""
    ok = np.all(np.isfinite(states), axis=(1, 2))
    kept = states[ok]
    if kept.shape[0] == 0:
        nan = np.full(states.shape[1:], np.nan)
        return times, nan, nan
    return times, kept.mean(axis=0), kept.std(axis=0)


def run_ensemble(model: ModelSpec | str, s: int, h: float, n: int, seed: int, t_end: float,
                 probabilistic: bool = True, scheme: Scheme | str = Scheme.AB,
                 t0: float = 0.0) -> EnsembleRecord:
    spec = get_model(model) if isinstance(model, str) else model
    config = SolverConfig(s=s, h=h, t_end=t_end, t0=t0, y0=spec.y0, family=scheme,
                          probabilistic=probabilistic, seed=seed)
    seeds = replicate_seeds(seed, n)
    start = time.perf_counter()
    traj = solve_ensemble(spec.system, config, n, seeds=seeds)
    elapsed = time.perf_counter() - start
    return EnsembleRecord(
        model=spec.name, scheme=config.family.value, s=s, h=h, n_replicates=n, seed=seed,
        seeds=seeds, probabilistic=probabilistic, times=traj.times, states=traj.states,
        diverged_at=traj.diverged_at, wall_clock_per_replicate=elapsed / n,
        step_evaluations=traj.step_evaluations, n_steps=config.n_steps,
        warmup_points=traj.warmup_points,
    )


def write_ensemble(record: EnsembleRecord, out_dir: str | Path, stride: int = 1) -> dict[str, Path]:
    """Write ``trajectories.csv``, ``summary.csv`` and ``meta.json``.

    Every ``stride``-th grid point is written (the last point always is); the
    summary is computed from exactly the rows written, so it can be recovered
    from the trajectories file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    idx = np.arange(0, len(record.times), stride)
    if idx[-1] != len(record.times) - 1:
        idx = np.append(idx, len(record.times) - 1)
    times = record.times[idx]
    states = record.states[:, idx, :]
    d = states.shape[-1]

    traj_path = out / "trajectories.csv"
    with open(traj_path, "w", newline="") as fh:
        fh.write(",".join(["replicate", "t"] + [f"dim{k}" for k in range(d)]) + "\n")
        for r in range(states.shape[0]):
            block = np.column_stack([np.full(len(times), r), times, states[r]])
            np.savetxt(fh, block, fmt=["%d", FLOAT_FMT] + [FLOAT_FMT] * d, delimiter=",")

    summary_path = out / "summary.csv"
    write_summary(summary_path, *summarize(times, states))

    meta = {
        "model": record.model, "scheme": record.scheme, "s": record.s, "h": record.h,
        "n_replicates": record.n_replicates, "seed": record.seed, "seeds": record.seeds,
        "probabilistic": record.probabilistic, "stride": stride,
        "diverged": {str(r): int(k) for r, k in enumerate(record.diverged_at) if k >= 0},
        "wall_clock_per_replicate": record.wall_clock_per_replicate,
        "step_evaluations": record.step_evaluations,
    }
    meta_path = out / "meta.json"
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    return {"trajectories": traj_path, "summary": summary_path, "meta": meta_path}


def write_summary(path: str | Path, times, mean, sd) -> None:
    d = mean.shape[-1]
    header = ["t"] + [c for k in range(d) for c in (f"mean_dim{k}", f"sd_dim{k}")]
    cols = [times]
    for k in range(d):
        cols += [mean[:, k], sd[:, k]]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, np.column_stack(cols), fmt=FLOAT_FMT, delimiter=",")


def read_trajectories(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of the trajectories file: (times, states of shape (n, T, d))."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    reps = data[:, 0].astype(int)
    n = reps.max() + 1
    per = len(data) // n
    states = data[:, 2:].reshape(n, per, -1)
    return data[:per, 1], states


def read_summary(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1::2], data[:, 2::2]


@dataclass
class ConvergenceReport:
    model: str
    scheme: str
    s_list: list[int]
    h_list: list[float]
    n: int
    seed: int
    probe_t: float
    component: int
    probabilistic: bool
    reference: float
    reference_floor: float
    mean_abs_error: np.ndarray  # (len(s_list), len(h_list))
    signed_errors: dict = field(default_factory=dict)  # (s, h) -> array of reference - numerical
    floor_limited: np.ndarray | None = None
    slopes: np.ndarray | None = None
    slope_stderr: np.ndarray | None = None

    def slope(self, s: int) -> float:
        return float(self.slopes[self.s_list.index(s)])

    def slope_floor_limited(self, s: int) -> bool:
        return bool(self.floor_limited[self.s_list.index(s)].any())


def fit_slope(h: Sequence[float], err: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log(err) against log(h) and its standard error."""
    h, err = np.asarray(h, float), np.asarray(err, float)
    ok = np.isfinite(err) & (err > 0)
    if ok.sum() < 2:
        return math.nan, math.nan
    if ok.sum() == 2:
        res = stats.linregress(np.log(h[ok]), np.log(err[ok]))
        return float(res.slope), math.nan
    res = stats.linregress(np.log(h[ok]), np.log(err[ok]))
    return float(res.slope), float(res.stderr)


def run_convergence(model: ModelSpec | str, s_list: Sequence[int], h_list: Sequence[float], n: int,
                    seed: int, probe_t: float, probabilistic: bool = True,
                    scheme: Scheme | str = Scheme.AB, component: int = 0) -> ConvergenceReport:
    """Mean absolute error at ``probe_t`` over ``n`` realisations, for every (s, h).

    Errors are ``reference - numerical`` in the chosen component.  Cells whose
    mean error is within ``FLOOR_FACTOR`` of the reference's own error
    estimate are flagged as floor-limited.  Deterministic runs use one
    realisation per cell.
    """
    spec = get_model(model) if isinstance(model, str) else model
    s_list, h_list = list(s_list), [float(h) for h in h_list]
    if len(h_list) < MIN_SLOPE_POINTS:
        raise ValueError(f"slope fit needs at least {MIN_SLOPE_POINTS} step sizes")
    ref_state, floor = spec.reference(probe_t, min(h_list))
    ref = float(ref_state[component])
    reps = n if probabilistic else 1

    mae = np.zeros((len(s_list), len(h_list)))
    flagged = np.zeros_like(mae, dtype=bool)
    signed = {}
    for a, s in enumerate(s_list):
        for b, h in enumerate(h_list):
            config = SolverConfig(s=s, h=h, t_end=probe_t, y0=spec.y0, family=scheme,
                                  probabilistic=probabilistic, seed=seed)
            traj = solve_ensemble(spec.system, config, reps)
            err = ref - traj.states[:, -1, component]
            signed[(s, h)] = err
            finite = err[np.isfinite(err)]
            mae[a, b] = np.mean(np.abs(finite)) if finite.size else math.nan
            flagged[a, b] = bool(mae[a, b] < FLOOR_FACTOR * floor)

    slopes = np.zeros(len(s_list))
    stderr = np.zeros(len(s_list))
    for a in range(len(s_list)):
        slopes[a], stderr[a] = fit_slope(h_list, mae[a])
    return ConvergenceReport(
        model=spec.name, scheme=Scheme(scheme).value, s_list=s_list, h_list=h_list, n=reps,
        seed=seed, probe_t=probe_t, component=component, probabilistic=probabilistic,
        reference=ref, reference_floor=floor, mean_abs_error=mae, signed_errors=signed,
        floor_limited=flagged, slopes=slopes, slope_stderr=stderr,
    )


def write_convergence(report: ConvergenceReport, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / f"{k}.csv" for k in ("convergence", "slopes", "signed_errors")}
    with open(paths["convergence"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "h", "mean_abs_error", "n_finite", "floor_limited"])
        for a, s in enumerate(report.s_list):
            for b, h in enumerate(report.h_list):
                n_finite = int(np.isfinite(report.signed_errors[(s, h)]).sum())
                w.writerow([s, _fmt(h), _fmt(report.mean_abs_error[a, b]), n_finite,
                            int(report.floor_limited[a, b])])
    with open(paths["slopes"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "slope", "stderr", "floor_limited"])
        for a, s in enumerate(report.s_list):
            w.writerow([s, _fmt(report.slopes[a]), _fmt(report.slope_stderr[a]),
                        int(report.floor_limited[a].any())])
    with open(paths["signed_errors"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "h", "replicate", "error"])
        for (s, h), errs in report.signed_errors.items():
            for r, e in enumerate(errs):
                w.writerow([s, _fmt(h), r, _fmt(e)])
    return paths


def attractor_amplitude(model: ModelSpec | str, h: float, t_end: float, component: int = 0,
                        settle: float = 0.5) -> float:
    """Half the range of one component of a deterministic reference run, after a transient."""
    spec = get_model(model) if isinstance(model, str) else model
    config = SolverConfig(s=4, h=h, t_end=t_end, y0=spec.y0, family=Scheme.AM_PC,
                          probabilistic=False)
    x = solve_ensemble(spec.system, config, 1).states[0, :, component]
    tail = x[int(settle * len(x)):]
    return float((tail.max() - tail.min()) / 2)


def divergence_time(times: np.ndarray, states: np.ndarray, amplitude: float,
                    fraction: float = 0.1, component: int = 0) -> float:
    """First time the ensemble sd of a component exceeds ``fraction * amplitude``; inf if never."""
    sd = np.std(states[:, :, component], axis=0)
    over = np.flatnonzero(~(sd <= fraction * amplitude))
    return float(times[over[0]]) if over.size else math.inf


@dataclass
class ChaosStudy:
    model: str
    h: float
    t_end: float
    n: int
    seed: int
    amplitude: float
    divergence_times: dict[int, float]
    evaluations_per_step: dict[int, float]
    wall_clock_per_replicate: dict[int, float]


def chaos_divergence_study(model: ModelSpec | str = "chua", s_list: Sequence[int] = (1, 3, 5),
                           n: int = 20, h: float = 0.01, t_end: float = 1000.0, seed: int = 0,
                           fraction: float = 0.1) -> ChaosStudy:
    """Time at which probabilistic ensembles lose agreement, per step count."""
    spec = get_model(model) if isinstance(model, str) else model
    amplitude = attractor_amplitude(spec, h, t_end)
    div, evals, clock = {}, {}, {}
    for s in s_list:
        rec = run_ensemble(spec, s, h, n, seed, t_end)
        div[s] = divergence_time(rec.times, rec.states, amplitude, fraction)
        stepped = rec.n_steps - (rec.warmup_points - 1)
        evals[s] = rec.step_evaluations / stepped
        clock[s] = rec.wall_clock_per_replicate
    return ChaosStudy(spec.name, h, t_end, n, seed, amplitude, div, evals, clock)
