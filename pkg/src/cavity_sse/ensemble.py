"""Scenario orchestration: ensembles, checkpoints, output tables.

Trajectories are advanced period by period in fixed-size chunks.  Chunk
layout depends only on the trajectory ids, never on the worker count, and
every chunk draws its noise from counter-addressed streams keyed by
``(seed, trajectory, period)``.  Results are therefore byte-identical for any
number of workers and after a resume.
"""

from __future__ import annotations

import json
import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from .classical import (ClassicalEnsemble, QInitParams, classify_orbit, evolve_ensemble,
                        sample_q_initial, stroboscopic_portrait)
from .model import Grid, SimParams, gaussian_state
from .noise import CLASSICAL, QUANTUM, ensemble_increments
from .propagator import NumericalError, SplitStepPropagator
from .stats import (DEFAULT_BINS, StrobeSnapshotSet, angle_histogram, average_angle, default_pair_budget,
                    ensemble_moments)
from .wigner import wigner_transform

__all__ = [
    "KINDS",
    "ScenarioSpec",
    "TrajectoryRecord",
    "QuantumEnsemble",
    "ClassicalRun",
    "run_scenario",
    "resume",
    "emit_plot_data",
    "EmitError",
    "CheckpointError",
    "CHUNK",
]

KINDS = ("portrait", "quantum_ensemble", "classical_ensemble", "angles", "wigner")
CHUNK = 16
SCALARS = ("mean_p", "mean_p2", "mean_J", "mean_J2", "norm_drift")


class CheckpointError(RuntimeError):
    pass


class EmitError(RuntimeError):
    pass


@dataclass
class ScenarioSpec:
    kind: str
    params: SimParams
    x0: float = 0.0
    p0: float = 1.0
    sigma_x: float = 0.3906
    n_traj: int = 100
    dump_strobes: tuple = ()
    n_bins: int = DEFAULT_BINS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise sio.ConfigError(f"unknown scenario {self.kind!r}; choose from {', '.join(KINDS)}",
                                  "scenario")
        if self.n_traj < 1:
            raise sio.ConfigError("n_traj must be >= 1", "n_traj")
        if self.kind == "angles" and self.n_traj < 2:
            raise sio.ConfigError("angles scenario needs n_traj >= 2", "n_traj")
        if not self.dump_strobes:
            self.dump_strobes = (self.params.n_periods,)
        self.dump_strobes = tuple(sorted({int(s) for s in self.dump_strobes if 0 <= s <= self.params.n_periods}))

    @classmethod
    def from_config(cls, cfg: dict, seed: int | None = None) -> "ScenarioSpec":
        cfg = dict(cfg)
        if "scenario" not in cfg:
            raise sio.ConfigError("missing required key 'scenario'", "scenario")
        if seed is not None:
            cfg["seed"] = seed
        pkeys = ("kbar", "xi", "D", "epsilon", "steps_per_period", "n_periods", "grid_size", "seed")
        try:
            params = SimParams(**{k: cfg[k] for k in pkeys if k in cfg})
        except ValueError as exc:
            key = next((k for k in pkeys if k in str(exc).split()[0]), None)
            raise sio.ConfigError(str(exc), key) from None
        extra = {k: cfg[k] for k in ("x0", "p0", "sigma_x", "n_traj") if k in cfg}
        return cls(kind=cfg["scenario"], params=params, **extra)

    def to_config(self) -> dict:
        prm = self.params
        return {
            "scenario": self.kind, "kbar": prm.kbar, "xi": prm.xi, "D": prm.D, "epsilon": prm.epsilon,
            "x0": self.x0, "p0": self.p0, "sigma_x": self.sigma_x, "grid_size": prm.grid_size,
            "steps_per_period": prm.steps_per_period, "n_periods": prm.n_periods,
            "n_traj": self.n_traj, "seed": prm.seed,
        }


@dataclass
class TrajectoryRecord:
    """Per-strobe scalars of one conditional trajectory (strobes 0..n_periods)."""

    trajectory: int
    substream: tuple
    mean_p: np.ndarray
    mean_p2: np.ndarray
    mean_J: np.ndarray
    mean_J2: np.ndarray
    norm_drift: np.ndarray
    states: dict = field(default_factory=dict)


def _advance_chunk(params: SimParams, ids, amps, period: int):
    grid = Grid.from_params(params)
    prop = SplitStepPropagator(grid, params)
    dW = ensemble_increments(params.seed, ids, period, params.steps_per_period, params.dt, QUANTUM)
    try:
        return prop.evolve(amps, 2 * np.pi * period, dW)
    except NumericalError as exc:
        bad = [int(ids[r]) for r in exc.rows] or [int(k) for k in ids]
        step = period * params.steps_per_period + (exc.step or 0)
        raise NumericalError(f"non-finite state in trajectories {bad} at step {step} (period {period})",
                             bad, step) from None


def _chunks(ids):
    return [ids[i:i + CHUNK] for i in range(0, len(ids), CHUNK)]


class QuantumEnsemble:
    """In-memory conditional ensemble sharing one initial Gaussian state."""

    def __init__(self, params: SimParams, x0: float, p0: float, sigma_x: float, n_traj: int,
                 trajectory_ids=None, angles: bool = False, n_bins: int = DEFAULT_BINS,
                 keep_strobes=()):
        self.params = params
        self.grid = Grid.from_params(params)
        self.ids = np.arange(n_traj) if trajectory_ids is None else np.asarray(trajectory_ids)
        psi0 = gaussian_state(self.grid, x0, p0, sigma_x)
        self.amps = np.tile(psi0.amps, (len(self.ids), 1))
        self.strobe = 0
        S = params.n_periods + 1
        self.scalars = {k: np.full((len(self.ids), S), np.nan) for k in SCALARS}
        self.angles = angles
        self.n_bins = n_bins
        self.theta = np.full((S, 3), np.nan)  # theta_ave, stderr, n_pairs
        self.histograms = {}
        self.keep_strobes = set(keep_strobes)
        self.kept = {}
        self._record()

    # scalars and angle statistics of the current strobe
    def _record(self):
        s, a, g = self.strobe, self.amps, self.grid
        # Row-wise reductions along the contiguous axis (not BLAS), so each
        # trajectory's scalars do not depend on which other rows are present.
        rho = np.abs(a) ** 2
        norm2 = rho.sum(axis=1)
        J = -np.cos(g.x)
        self.scalars["mean_J"][:, s] = np.sum(rho * J, axis=1) / norm2
        self.scalars["mean_J2"][:, s] = np.sum(rho * J**2, axis=1) / norm2
        pk = np.abs(np.fft.fft(a, axis=1)) ** 2
        pk /= pk.sum(axis=1, keepdims=True)
        self.scalars["mean_p"][:, s] = np.sum(pk * g.p, axis=1)
        self.scalars["mean_p2"][:, s] = np.sum(pk * g.p**2, axis=1)
        self.scalars["norm_drift"][:, s] = np.abs(np.sqrt(norm2 * g.dx) - 1)
        if self.angles and len(self.ids) >= 2:
            snap = StrobeSnapshotSet(s, g, a, self.ids)
            budget = default_pair_budget(len(self.ids))
            summ = average_angle(snap, budget, seed=self.params.seed)
            self.theta[s] = (summ.theta_ave, summ.stderr, summ.n_pairs)
            if s in self.keep_strobes:
                self.histograms[s] = angle_histogram(snap, self.n_bins, budget, seed=self.params.seed)
        if s in self.keep_strobes:
            self.kept[s] = a.copy()

    def advance(self, executor=None):
        """Advance every trajectory by one modulation period."""
        period = self.strobe
        parts = [(c, self.amps[i * CHUNK:(i + 1) * CHUNK]) for i, c in enumerate(_chunks(self.ids))]
        if executor is None:
            new = [_advance_chunk(self.params, c, a, period) for c, a in parts]
        else:
            futs = [executor.submit(_advance_chunk, self.params, c, a, period) for c, a in parts]
            new = [f.result() for f in futs]
        self.amps = np.concatenate(new, axis=0)
        self.strobe += 1
        self._record()

    def run(self, until: int | None = None, workers: int = 1, on_strobe=None):
        until = self.params.n_periods if until is None else until
        pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
        try:
            while self.strobe < until:
                self.advance(pool)
                if on_strobe is not None:
                    on_strobe(self)
        finally:
            if pool is not None:
                pool.shutdown()
        return self

    def moments(self):
        return ensemble_moments(self.scalars["mean_p"], self.scalars["mean_p2"])

    def records(self):
        out = []
        for row, k in enumerate(self.ids):
            out.append(TrajectoryRecord(
                int(k), (self.params.seed, QUANTUM, int(k)),
                *(self.scalars[name][row] for name in SCALARS),
                states={s: v[row] for s, v in self.kept.items()},
            ))
        return out

    # checkpoint support
    def state_dict(self) -> dict:
        d = {"amps": self.amps, "strobe": np.array(self.strobe), "theta": self.theta, "ids": self.ids}
        d.update({f"scalar_{k}": v for k, v in self.scalars.items()})
        for s, (edges, counts) in self.histograms.items():
            d[f"hist_{s}"] = counts
        for s, v in self.kept.items():
            d[f"kept_{s}"] = v
        return d

    def load_state_dict(self, d):
        self.amps = np.array(d["amps"])
        self.strobe = int(d["strobe"])
        self.theta = np.array(d["theta"])
        for k in SCALARS:
            self.scalars[k] = np.array(d[f"scalar_{k}"])
        edges = np.linspace(0, np.pi / 2, self.n_bins + 1)
        for key in d:
            if key.startswith("hist_"):
                self.histograms[int(key[5:])] = (edges, np.array(d[key]))
            elif key.startswith("kept_"):
                self.kept[int(key[5:])] = np.array(d[key])


class ClassicalRun:
    """Classical conditional ensemble started from the matched Gaussian."""

    def __init__(self, params: SimParams, x0: float, p0: float, sigma_x: float, n_traj: int):
        self.params = params
        self.q = QInitParams.from_quantum(x0, p0, sigma_x, params.kbar, params.xi)
        self.ens = sample_q_initial(self.q, n_traj, params.seed)
        self.ids = np.arange(n_traj)
        self.strobe = 0
        S = params.n_periods + 1
        self.x = np.full((n_traj, S), np.nan)
        self.p = np.full((n_traj, S), np.nan)
        self._record()

    def _record(self):
        self.x[:, self.strobe] = self.ens.x
        self.p[:, self.strobe] = self.ens.p

    def advance(self):
        prm = self.params
        dW = ensemble_increments(prm.seed, self.ids, self.strobe, prm.steps_per_period, prm.dt, CLASSICAL)
        self.ens = evolve_ensemble(self.ens, 2 * np.pi * self.strobe, dW, prm)
        if not (np.all(np.isfinite(self.ens.x)) and np.all(np.isfinite(self.ens.p))):
            bad = np.flatnonzero(~(np.isfinite(self.ens.x) & np.isfinite(self.ens.p)))
            raise NumericalError(f"classical trajectories {bad.tolist()} non-finite in period {self.strobe}")
        self.strobe += 1
        self._record()

    def run(self, until: int | None = None, on_strobe=None):
        until = self.params.n_periods if until is None else until
        while self.strobe < until:
            self.advance()
            if on_strobe is not None:
                on_strobe(self)
        return self

    def state_dict(self):
        return {"x_now": self.ens.x, "p_now": self.ens.p, "strobe": np.array(self.strobe),
                "x": self.x, "p": self.p}

    def load_state_dict(self, d):
        self.strobe = int(d["strobe"])
        self.ens = ClassicalEnsemble(np.array(d["x_now"]), np.array(d["p_now"]), 2 * np.pi * self.strobe)
        self.x, self.p = np.array(d["x"]), np.array(d["p"])


# -- run directories ------------------------------------------------------------

def _portrait_seeds(spec: ScenarioSpec) -> np.ndarray:
    seeds = [(spec.x0, spec.p0)]
    extra = spec.n_traj - 1
    if extra > 0:
        nx = int(np.ceil(np.sqrt(extra)))
        ny = int(np.ceil(extra / nx))
        xs = np.linspace(-np.pi, np.pi, nx, endpoint=False)
        ps = np.linspace(-2.5, 2.5, ny)
        grid = [(x, p) for p in ps for x in xs][:extra]
        seeds.extend(grid)
    return np.array(seeds)


def _checkpoint_paths(run_dir: Path):
    return run_dir / "checkpoint.npz", run_dir / "checkpoint.json"


def _write_checkpoint(run_dir: Path, engine):
    npz, meta = _checkpoint_paths(run_dir)
    import io as _io
    buf = _io.BytesIO()
    np.savez(buf, **engine.state_dict())
    data = buf.getvalue()
    sio.atomic_write_bytes(npz, data)
    import hashlib
    sio.atomic_write_bytes(meta, json.dumps({"strobe": engine.strobe,
                                             "sha256": hashlib.sha256(data).hexdigest()}).encode())


def _load_checkpoint(run_dir: Path):
    npz, meta = _checkpoint_paths(run_dir)
    if not npz.exists() or not meta.exists():
        raise CheckpointError(f"no checkpoint in {run_dir}")
    info = json.loads(meta.read_text())
    if sio.sha256_file(npz) != info["sha256"]:
        raise CheckpointError(f"checkpoint checksum mismatch in {run_dir}")
    with np.load(npz) as z:
        return {k: z[k] for k in z.files}


def _build_engine(spec: ScenarioSpec):
    prm = spec.params
    if spec.kind == "classical_ensemble":
        return ClassicalRun(prm, spec.x0, spec.p0, spec.sigma_x, spec.n_traj)
    return QuantumEnsemble(prm, spec.x0, spec.p0, spec.sigma_x, spec.n_traj,
                           angles=spec.kind == "angles", n_bins=spec.n_bins,
                           keep_strobes=spec.dump_strobes)


def _write_outputs(spec: ScenarioSpec, run_dir: Path, engine) -> list[Path]:
    prm = spec.params
    files = []
    if spec.kind == "portrait":
        pts = engine
        rows = ((k, j, pts[k, j, 0], pts[k, j, 1]) for k in range(pts.shape[0]) for j in range(pts.shape[1]))
        files.append(sio.write_csv(run_dir / "portrait.csv", ["strobe_index", "seed_index", "x", "p"], rows))
        return files
    if spec.kind == "classical_ensemble":
        S = prm.n_periods + 1
        t = 2 * np.pi * np.arange(S)
        x, p = engine.x, engine.p
        se = p.std(axis=0, ddof=1) / np.sqrt(len(p)) if len(p) > 1 else np.zeros(S)
        rows = zip(t, p.mean(0), p.var(0), x.mean(0), x.var(0), se)
        files.append(sio.write_csv(run_dir / "classical_moments.csv",
                                   ["t", "mean_p", "var_p", "mean_x", "var_x", "stderr_p"], rows))
        traj_rows = ((k, s, x[k, s], p[k, s]) for k in range(len(x)) for s in range(S))
        files.append(sio.write_csv(run_dir / "classical_trajectories.csv",
                                   ["trajectory", "strobe", "x", "p"], traj_rows))
        return files
    # quantum kinds
    S = prm.n_periods + 1
    sc = engine.scalars
    rows = ((int(k), s, *(sc[name][r, s] for name in SCALARS))
            for r, k in enumerate(engine.ids) for s in range(S))
    files.append(sio.write_csv(run_dir / "trajectories.csv", ["trajectory", "strobe", *SCALARS], rows))
    mom = engine.moments()
    rows = zip(range(S), mom.mean_p, mom.var_of_means, mom.mean_cond_var, mom.pooled_var, mom.stderr_mean)
    files.append(sio.write_csv(run_dir / "moments.csv",
                               ["strobe", "mean_p", "var_of_means", "mean_cond_var", "pooled_var",
                                "stderr_mean"], rows))
    for s in sorted(engine.kept):
        for r, k in enumerate(engine.ids):
            files.append(sio.write_state(run_dir / "states" / f"traj{int(k):05d}_strobe{s:04d}.bin",
                                         engine.kept[s][r], prm.kbar, 2 * np.pi * s))
    if spec.kind == "angles":
        th = engine.theta
        rows = ((s, th[s, 0], th[s, 1], int(th[s, 2])) for s in range(S))
        files.append(sio.write_csv(run_dir / "theta_ave.csv", ["strobe", "theta_ave", "stderr", "n_pairs"], rows))
        for s, (edges, counts) in sorted(engine.histograms.items()):
            files.append(sio.write_csv(run_dir / f"histogram_strobe{s:04d}.csv", ["bin_lo", "bin_hi", "count"],
                                       zip(edges[:-1], edges[1:], counts)))
    if spec.kind == "wigner":
        grid = engine.grid
        from .model import WaveFunction
        for s in sorted(engine.kept):
            for r, k in enumerate(engine.ids):
                w = wigner_transform(WaveFunction(grid, engine.kept[s][r], 2 * np.pi * s))
                rows = ((w.x[i], w.p[j], w.values[i, j]) for i in range(w.nx) for j in range(w.np))
                stem = f"wigner_traj{int(k):05d}_strobe{s:04d}"
                files.append(sio.write_csv(run_dir / f"{stem}.csv", ["x", "p", "P"], rows))
                files.append(sio.write_wigner_binary(run_dir / f"{stem}.bin", w.values, prm.kbar, 2 * np.pi * s))
    return files


def _finish(spec, run_dir: Path, engine, started: float, run_id: str) -> dict:
    files = _write_outputs(spec, run_dir, engine)
    manifest = {str(f.relative_to(run_dir)): sio.sha256_file(f) for f in sorted(files)}
    sio.atomic_write_bytes(run_dir / "manifest.json", json.dumps(manifest, indent=1, sort_keys=True).encode())
    meta = json.loads((run_dir / "run.json").read_text())
    meta["complete"] = True
    sio.atomic_write_bytes(run_dir / "run.json", json.dumps(meta, indent=1, sort_keys=True).encode())
    for p in _checkpoint_paths(run_dir):
        if p.exists():
            p.unlink()
    return {"run_id": run_id, "kind": spec.kind, "wall_time": round(time.time() - started, 3),
            "run_dir": str(run_dir), "manifest": manifest}


def _execute(spec, run_dir: Path, engine, workers, stop_after, checkpoint_every, started, run_id):
    prm = spec.params

    def on_strobe(eng):
        if eng.strobe % checkpoint_every == 0 or eng.strobe == prm.n_periods:
            _write_checkpoint(run_dir, eng)

    until = prm.n_periods if stop_after is None else min(stop_after, prm.n_periods)
    if isinstance(engine, QuantumEnsemble):
        engine.run(until, workers=workers, on_strobe=on_strobe)
    else:
        engine.run(until, on_strobe=on_strobe)
    if engine.strobe < prm.n_periods:
        _write_checkpoint(run_dir, engine)
        return {"run_id": run_id, "kind": spec.kind, "wall_time": round(time.time() - started, 3),
                "run_dir": str(run_dir), "interrupted_at": engine.strobe, "manifest": {}}
    return _finish(spec, run_dir, engine, started, run_id)


def run_scenario(spec: ScenarioSpec, out_dir, workers: int = 1, stop_after: int | None = None,
                 checkpoint_every: int = 10) -> dict:
    """Run a scenario into ``out_dir`` and return the JSON-able summary.

    ``stop_after`` halts at that strobe leaving a checkpoint, as if interrupted.
    """
    started = time.time()
    run_dir = Path(out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    run_id = uuid.uuid4().hex[:12]
    meta = {"run_id": run_id, "config": spec.to_config(), "dump_strobes": list(spec.dump_strobes),
            "n_bins": spec.n_bins, "complete": False}
    sio.atomic_write_bytes(run_dir / "run.json", json.dumps(meta, indent=1, sort_keys=True).encode())
    if spec.kind == "portrait":
        pts = stroboscopic_portrait(_portrait_seeds(spec), spec.params.n_periods,
                                    _noise_free(spec.params))
        return _finish(spec, run_dir, pts, started, run_id)
    engine = _build_engine(spec)
    return _execute(spec, run_dir, engine, workers, stop_after, checkpoint_every, started, run_id)


def _noise_free(params: SimParams) -> SimParams:
    from dataclasses import replace
    return replace(params, D=0.0)


def load_spec(run_dir) -> ScenarioSpec:
    meta = json.loads((Path(run_dir) / "run.json").read_text())
    spec = ScenarioSpec.from_config(meta["config"])
    spec.dump_strobes = tuple(meta["dump_strobes"])
    spec.n_bins = meta.get("n_bins", DEFAULT_BINS)
    return spec


def resume(run_dir, workers: int = 1, stop_after: int | None = None, checkpoint_every: int = 10) -> dict:
    """Continue an interrupted run from its checkpoint; completed runs are a no-op."""
    started = time.time()
    run_dir = Path(run_dir)
    meta_path = run_dir / "run.json"
    if not meta_path.exists():
        raise CheckpointError(f"{run_dir} is not a run directory")
    meta = json.loads(meta_path.read_text())
    spec = load_spec(run_dir)
    if meta.get("complete"):
        manifest = json.loads((run_dir / "manifest.json").read_text())
        return {"run_id": meta["run_id"], "kind": spec.kind, "wall_time": 0.0, "run_dir": str(run_dir),
                "manifest": manifest, "resumed": False}
    if spec.kind == "portrait":
        return run_scenario(spec, run_dir)
    state = _load_checkpoint(run_dir)
    engine = _build_engine(spec)
    engine.load_state_dict(state)
    out = _execute(spec, run_dir, engine, workers, stop_after, checkpoint_every, started, meta["run_id"])
    out["resumed"] = True
    return out


# -- figure tables -----------------------------------------------------------------

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")


def _runs(run_dirs):
    out = []
    for d in run_dirs:
        d = Path(d)
        if not (d / "run.json").exists():
            raise EmitError(f"{d}: missing run.json (not a run directory)")
        meta = json.loads((d / "run.json").read_text())
        if not meta.get("complete"):
            raise EmitError(f"{d}: run is incomplete; resume it first")
        out.append((d, load_spec(d)))
    return out


def _orbit_label(spec: ScenarioSpec) -> str:
    return classify_orbit(spec.x0, spec.p0, _noise_free(spec.params)).label


def _need(path: Path) -> Path:
    if not path.exists():
        raise EmitError(f"missing input {path}")
    return path


def emit_plot_data(run_dirs, figure: str, out=None) -> Path:
    """Write the table needed to redraw ``figure`` from completed runs.

    fig2/fig3 overlay a quantum run's moments with a classical run's;
    fig4 places theta_ave series of angle runs side by side, labelled by the
    classical character of their initial condition; fig5/fig6 give the angle
    histogram at strobe 200 (or the last dumped strobe) of the regular/chaotic run.
    """
    if isinstance(run_dirs, (str, Path)):
        run_dirs = [run_dirs]
    if figure not in FIGURES:
        raise EmitError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    runs = _runs(run_dirs)
    out = Path(out) if out else runs[0][0] / f"{figure}.csv"

    if figure in ("fig2", "fig3"):
        quantum = [(d, s) for d, s in runs if s.kind in ("quantum_ensemble", "angles", "wigner")]
        classical = [(d, s) for d, s in runs if s.kind == "classical_ensemble"]
        if not quantum:
            raise EmitError(f"{figure} needs a quantum ensemble run (moments.csv)")
        if not classical:
            raise EmitError(f"{figure} needs a classical_ensemble run (classical_moments.csv)")
        _, q = sio.read_csv(_need(quantum[0][0] / "moments.csv"))
        _, c = sio.read_csv(_need(classical[0][0] / "classical_moments.csv"))
        S = min(len(q), len(c))
        rows = ((int(q[s, 0]), q[s, 1], q[s, 3], q[s, 4], q[s, 5], c[s, 1], c[s, 2], c[s, 5]) for s in range(S))
        return sio.write_csv(out, ["strobe", "quantum_mean_p", "quantum_mean_cond_var", "quantum_pooled_var",
                                   "quantum_stderr", "classical_mean_p", "classical_var_p",
                                   "classical_stderr"], rows)

    angle_runs = [(d, s) for d, s in runs if s.kind == "angles"]
    if not angle_runs:
        raise EmitError(f"{figure} needs an angles run")
    labelled = []
    for d, s in angle_runs:
        label = _orbit_label(s)
        if any(lab == label for _, _, lab in labelled):
            label = f"{label}_x0={s.x0:g}_p0={s.p0:g}"
        labelled.append((d, s, label))

    if figure == "fig4":
        header, cols = ["strobe"], []
        for d, s, label in labelled:
            _, th = sio.read_csv(_need(d / "theta_ave.csv"))
            header += [f"theta_ave_{label}", f"stderr_{label}"]
            cols.append(th)
        S = min(len(c) for c in cols)
        rows = ([s] + [v for c in cols for v in (c[s, 1], c[s, 2])] for s in range(S))
        return sio.write_csv(out, header, rows)

    want = "regular" if figure == "fig5" else "chaotic"
    match = [(d, s) for d, s, lab in labelled if lab.startswith(want)]
    if not match:
        if len(labelled) == 1:
            match = [labelled[0][:2]]
        else:
            raise EmitError(f"{figure} needs an angles run with a {want} initial state")
    d, s = match[0]
    strobe = 200 if 200 in s.dump_strobes else max(s.dump_strobes)
    _, h = sio.read_csv(_need(d / f"histogram_strobe{strobe:04d}.csv"))
    return sio.write_csv(out, ["bin_lo", "bin_hi", "count"], ((r[0], r[1], int(r[2])) for r in h))
