"""Experiment procedures: seeded grids, matched-noise trials, CSV emission.

Every experiment follows the same pattern: build the benchmark system
from a config, derive per-trial seeds from (master seed, experiment name,
trial index), run each controller against the identical noise realization
per trial, and emit one summary CSV plus raw per-trial CSVs and a JSON
manifest under out_dir/<experiment>/<system>/. Summary statistics are
mean, standard error, and a 1.96-stderr normal 95% interval across
trials; re-running with the same seed reproduces the summary byte for
byte (wall-clock values excepted).
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__, rng
from .controllers import (B_MPC, INIT_RANDOM, INIT_SEP_WARM, SEP, SEP_MPC,
                          SEP_MPC_LBFGS, ControllerSpec, bmpc_action,
                          sep_mpc_action)
from .estimation import Belief, kalman_update
from .optim import LbfgsConfig
from .results_io import (write_manifest, write_raw_rollout, write_summary,
                         write_table)
from .rollout import rollout
from .systems import (make_double_integrator, make_random_system, sample_noise,
                      simulate_step)

log = logging.getLogger(__name__)

H_GRID = (5, 10, 15, 20, 25, 30)
RHO_GRID = (0.85, 0.9, 0.95, 1.0, 1.05, 1.1)
RSCALE_GRID = (1.0, 10.0, 100.0)
C0_GRID = (0.01, 0.1, 1.0)
ITER_GRID = (0, 1, 2, 5, 10, 20)
GAP_BELIEFS = 10
GAP_ALPHAS = 20
GAP_TRACE_RANGE = (0.06, 190.0)

MAIN_CONTROLLERS = (SEP, SEP_MPC, B_MPC)
RUNTIME_CONTROLLERS = (SEP, SEP_MPC, SEP_MPC_LBFGS, B_MPC)

RANDOM = "random"
DOUBLE_INTEGRATOR = "double_integrator"
SYSTEM_DEFAULTS = {
    RANDOM: {"sigma_z": 0.1, "horizon": 10},
    DOUBLE_INTEGRATOR: {"sigma_z": 1.0, "horizon": 15},
}

CONFIG_FILE_FIELDS = ("system", "rho", "c0", "c1", "h", "r_scale",
                      "sigma_w", "sigma_z", "seed")


def normalize_system(name: str) -> str:
    canon = str(name).replace("-", "_")
    if canon not in SYSTEM_DEFAULTS:
        raise ValueError(f"unknown system {name!r}; choose from "
                         f"{sorted(SYSTEM_DEFAULTS)}")
    return canon


@dataclass(frozen=True)
class ExperimentConfig:
    """Benchmark and harness settings; None fields pick context defaults."""

    system: str = RANDOM
    rho: float = 0.95
    c0: float = 0.01
    c1: float = 3.0
    h: float = 0.3
    r_scale: float = 1.0
    sigma_w: float = 0.1
    sigma_z: float | None = None
    seed: int = 0
    trials: int = 10
    steps: int | None = None
    horizon: int | None = None
    out_dir: Path = Path("results")
    parallel: int = 1
    controllers: tuple | None = None
    lbfgs: LbfgsConfig = field(default_factory=LbfgsConfig)

    def resolved(self, steps_default=300, horizon_default=None):
        """Fill in system- and experiment-dependent defaults."""
        system = normalize_system(self.system)
        sysd = SYSTEM_DEFAULTS[system]
        sigma_z = self.sigma_z if self.sigma_z is not None else sysd["sigma_z"]
        horizon = self.horizon
        if horizon is None:
            horizon = horizon_default if horizon_default is not None else sysd["horizon"]
        steps = self.steps if self.steps is not None else steps_default
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if steps < 1 or horizon < 1:
            raise ValueError("steps and horizon must be >= 1")
        return replace(self, system=system, sigma_z=sigma_z,
                       horizon=horizon, steps=steps, out_dir=Path(self.out_dir))

    def snapshot(self) -> dict:
        d = asdict(self)
        d["out_dir"] = str(self.out_dir)
        d["controllers"] = list(self.controllers) if self.controllers else None
        d["lbfgs"] = asdict(self.lbfgs)
        return d


def load_config_file(path) -> dict:
    """Parse a key-value config file; only benchmark fields are accepted."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a key-value mapping")
    unknown = sorted(set(data) - set(CONFIG_FILE_FIELDS))
    if unknown:
        raise ValueError(f"unknown config keys {unknown}; allowed keys are "
                         f"{list(CONFIG_FILE_FIELDS)}")
    if "system" in data:
        data["system"] = normalize_system(data["system"])
    return data


def build_system(cfg: ExperimentConfig):
    """Instantiate the configured benchmark system (seeded by the master seed)."""
    if cfg.system == RANDOM:
        return make_random_system(rho_target=cfg.rho, c0=cfg.c0,
                                  r_scale=cfg.r_scale, sigma_w=cfg.sigma_w,
                                  sigma_z=cfg.sigma_z, seed=cfg.seed)
    return make_double_integrator(rho=cfg.rho, c0=cfg.c0, r_scale=cfg.r_scale,
                                  sigma_w=cfg.sigma_w, sigma_z=cfg.sigma_z,
                                  c1=cfg.c1, h=cfg.h)


def trial_seed(master_seed: int, experiment: str, trial: int) -> int:
    """Per-trial seed mixing the master seed, experiment name, and index."""
    return rng.derive_seed(master_seed, rng.experiment_key(experiment), trial)


def _rollout_job(args):
    sys, spec, T, noise_seed = args
    noise = sample_noise(sys, T, noise_seed)
    stream = rng.stream(noise_seed, rng.PLANNER_INIT)
    return rollout(sys, spec, T, noise, planner_stream=stream)


def _run_trials(sys, spec, T, seeds, parallel):
    jobs = [(sys, spec, T, s) for s in seeds]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            return list(ex.map(_rollout_job, jobs))
    return [_rollout_job(j) for j in jobs]


def _stats(values):
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    if values.size > 1:
        stderr = float(np.std(values, ddof=1) / np.sqrt(values.size))
    else:
        stderr = 0.0
    return {"mean": mean, "stderr": stderr, "ci95": 1.96 * stderr}


def _controller_spec(kind, cfg, horizon=None, init_scheme=INIT_RANDOM,
                     lbfgs=None):
    return ControllerSpec(kind=kind,
                          horizon=None if kind == SEP else horizon,
                          lbfgs=lbfgs if lbfgs is not None else cfg.lbfgs,
                          init_scheme=init_scheme)


def _selected(cfg, defaults):
    if cfg.controllers is None:
        return defaults
    picked = tuple(c for c in defaults if c in cfg.controllers)
    if not picked:
        raise ValueError(f"controller filter {cfg.controllers} leaves nothing "
                         f"to run from {defaults}")
    return picked


@dataclass
class ExperimentResult:
    """Where an experiment landed on disk plus its in-memory summary rows."""

    experiment: str
    system: str
    columns: tuple
    rows: list
    summary_path: Path
    manifest_path: Path
    raw_paths: list


def _emit(cfg, experiment, axis_cols, rows, raw_records=(), raw_tables=(),
          seeds=(), wall=0.0):
    base = Path(cfg.out_dir) / experiment / cfg.system
    raw_paths = []
    for name, record in raw_records:
        raw_paths.append(write_raw_rollout(base / "raw" / name, record))
    for name, columns, table_rows in raw_tables:
        raw_paths.append(write_table(base / "raw" / name, columns, table_rows))
    summary_path = write_summary(base / "summary.csv", axis_cols, rows)
    manifest_path = write_manifest(base / "manifest.json", {
        "experiment": experiment,
        "system": cfg.system,
        "config": cfg.snapshot(),
        "trial_seeds": [int(s) for s in seeds],
        "artifacts": {
            "summary": str(summary_path),
            "raw": [str(p) for p in raw_paths],
        },
        "wall_clock_seconds": wall,
        "created": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
    })
    from .results_io import summary_columns
    return ExperimentResult(experiment=experiment, system=cfg.system,
                            columns=summary_columns(axis_cols), rows=rows,
                            summary_path=summary_path,
                            manifest_path=manifest_path, raw_paths=raw_paths)


def _lead(cfg, experiment, controller):
    return {"experiment": experiment, "system": cfg.system,
            "controller": controller}


def run_h_sweep(cfg: ExperimentConfig, h_grid=H_GRID) -> ExperimentResult:
    """Mean total cost versus planning horizon for the main controllers."""
    cfg = cfg.resolved()
    exp = "h-sweep"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]
    controllers = _selected(cfg, MAIN_CONTROLLERS)

    rows, raw = [], []
    for ctrl in controllers:
        if ctrl == SEP:
            # One rollout per trial; its row repeats across the grid since
            # the full-horizon policy never sees H.
            log.info("%s: running %s", exp, ctrl)
            recs = _run_trials(sys, _controller_spec(SEP, cfg), cfg.steps,
                               seeds, cfg.parallel)
            raw += [(f"sep_trial{i}.csv", r) for i, r in enumerate(recs)]
            stats = _stats([r.total_cost for r in recs])
            for H in h_grid:
                rows.append(_lead(cfg, exp, ctrl) | {"H": H} | stats)
            continue
        for H in h_grid:
            log.info("%s: running %s at H=%d", exp, ctrl, H)
            recs = _run_trials(sys, _controller_spec(ctrl, cfg, horizon=H),
                               cfg.steps, seeds, cfg.parallel)
            raw += [(f"{ctrl}_H{H}_trial{i}.csv", r) for i, r in enumerate(recs)]
            rows.append(_lead(cfg, exp, ctrl) | {"H": H}
                        | _stats([r.total_cost for r in recs]))
    return _emit(cfg, exp, ("H",), rows, raw_records=raw, seeds=seeds,
                 wall=time.perf_counter() - t0)


def run_decompose(cfg: ExperimentConfig) -> ExperimentResult:
    """State/input/total cost decomposition at the benchmark horizon.

    The state component includes the terminal state cost so that the
    state and input components add up to the total exactly.
    """
    cfg = cfg.resolved()
    exp = "decompose"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]

    rows, raw = [], []
    for ctrl in _selected(cfg, MAIN_CONTROLLERS):
        log.info("%s: running %s", exp, ctrl)
        recs = _run_trials(sys, _controller_spec(ctrl, cfg, horizon=cfg.horizon),
                           cfg.steps, seeds, cfg.parallel)
        raw += [(f"{ctrl}_trial{i}.csv", r) for i, r in enumerate(recs)]
        components = {
            "state": [r.state_cost_sum + r.terminal_cost for r in recs],
            "input": [r.input_cost_sum for r in recs],
            "total": [r.total_cost for r in recs],
        }
        for name, vals in components.items():
            rows.append(_lead(cfg, exp, ctrl)
                        | {"H": cfg.horizon, "component": name} | _stats(vals))
    return _emit(cfg, exp, ("H", "component"), rows, raw_records=raw,
                 seeds=seeds, wall=time.perf_counter() - t0)


def run_kf_diag(cfg: ExperimentConfig) -> ExperimentResult:
    """Per-step estimation-error and covariance-trace curves per controller."""
    cfg = cfg.resolved()
    exp = "kf-diag"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]

    rows, raw = [], []
    for ctrl in _selected(cfg, MAIN_CONTROLLERS):
        log.info("%s: running %s", exp, ctrl)
        recs = _run_trials(sys, _controller_spec(ctrl, cfg, horizon=cfg.horizon),
                           cfg.steps, seeds, cfg.parallel)
        raw += [(f"{ctrl}_trial{i}.csv", r) for i, r in enumerate(recs)]
        for metric, attr in (("est_err", "est_errs"), ("tr_sigma", "tr_sigmas")):
            curves = np.stack([getattr(r, attr) for r in recs])
            for t in range(cfg.steps + 1):
                rows.append(_lead(cfg, exp, ctrl)
                            | {"metric": metric, "t": t} | _stats(curves[:, t]))
    return _emit(cfg, exp, ("metric", "t"), rows, raw_records=raw, seeds=seeds,
                 wall=time.perf_counter() - t0)


def run_counterfactual(cfg: ExperimentConfig) -> ExperimentResult:
    """Input coordinates along one trajectory: applied certainty-equivalent
    MPC inputs versus the belief planner's re-solved action at each belief."""
    cfg = cfg.resolved()
    exp = "counterfactual"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    seed = trial_seed(cfg.seed, exp, 0)
    noise = sample_noise(sys, cfg.steps, seed)
    stream = rng.stream(seed, rng.PLANNER_INIT)

    rows = []
    b = Belief(mean=sys.x0_mean.copy(), cov=sys.Sigma0.copy())
    x = noise.x0
    for t in range(cfg.steps):
        H = min(cfg.horizon, cfg.steps - t)
        u_sep = sep_mpc_action(sys, b, H)
        res = bmpc_action(sys, b, H, cfg.lbfgs, INIT_RANDOM, stream)
        for j in range(sys.p):
            diff = float(res.u[j] - u_sep[j])
            rows.append(_lead(cfg, exp, "b-mpc-vs-sep-mpc")
                        | {"t": t, "coord": j + 1,
                           "u_sep_mpc": float(u_sep[j]),
                           "u_b_mpc": float(res.u[j]),
                           "mean": diff, "stderr": 0.0, "ci95": 0.0})
        x, y = simulate_step(sys, x, u_sep, noise.ws[t], noise.zs[t])
        b = kalman_update(sys, b, u_sep, y)
    return _emit(cfg, exp, ("t", "coord", "u_sep_mpc", "u_b_mpc"), rows,
                 seeds=[seed], wall=time.perf_counter() - t0)


def run_synthetic_gap(cfg: ExperimentConfig) -> ExperimentResult:
    """Action gap between the belief planner and certainty-equivalent MPC on
    synthetic beliefs with isotropic covariance of growing trace."""
    cfg = cfg.resolved()
    exp = "synthetic-gap"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    lo, hi = GAP_TRACE_RANGE
    alphas = np.geomspace(lo / sys.n, hi / sys.n, GAP_ALPHAS)

    grid_rows = []
    gaps = np.empty((GAP_BELIEFS, GAP_ALPHAS))
    seeds = [trial_seed(cfg.seed, exp, j) for j in range(GAP_BELIEFS)]
    eye = np.eye(sys.n)
    for j, seed in enumerate(seeds):
        mean = 0.5 * rng.stream(seed, rng.INIT_STATE).standard_normal(sys.n)
        stream = rng.stream(seed, rng.PLANNER_INIT)
        for a, alpha in enumerate(alphas):
            b = Belief(mean=mean, cov=alpha * eye)
            res = bmpc_action(sys, b, cfg.horizon, cfg.lbfgs, INIT_RANDOM, stream)
            gap = float(np.linalg.norm(res.u - sep_mpc_action(sys, b, cfg.horizon)))
            gaps[j, a] = gap
            grid_rows.append({"belief": j, "alpha": float(alpha),
                              "tr_sigma": float(sys.n * alpha), "gap": gap})

    rows = []
    for a, alpha in enumerate(alphas):
        q25, med, q75 = np.quantile(gaps[:, a], [0.25, 0.5, 0.75])
        rows.append(_lead(cfg, exp, "b-mpc-vs-sep-mpc")
                    | {"alpha": float(alpha), "tr_sigma": float(sys.n * alpha),
                       "median": float(med), "q25": float(q25),
                       "q75": float(q75)}
                    | _stats(gaps[:, a]))
    table = ("grid.csv", ("belief", "alpha", "tr_sigma", "gap"), grid_rows)
    return _emit(cfg, exp, ("alpha", "tr_sigma", "median", "q25", "q75"), rows,
                 raw_tables=[table], seeds=seeds,
                 wall=time.perf_counter() - t0)


def run_heatmap(cfg: ExperimentConfig, h_grid=H_GRID) -> ExperimentResult:
    """Relative cost gain of the belief planner over a grid of input-cost
    scales and base observation gains, each cell at its best horizon."""
    cfg = cfg.resolved()
    exp = "heatmap"
    t0 = time.perf_counter()
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]

    rows, raw = [], []
    for r_scale in RSCALE_GRID:
        for c0 in C0_GRID:
            cell = replace(cfg, r_scale=r_scale, c0=c0)
            sys = build_system(cell)
            tag = f"r{r_scale:g}_c{c0:g}"
            log.info("%s: cell %s", exp, tag)
            sep_recs = _run_trials(sys, _controller_spec(SEP, cfg), cfg.steps,
                                   seeds, cfg.parallel)
            raw += [(f"sep_{tag}_trial{i}.csv", r)
                    for i, r in enumerate(sep_recs)]
            sep_totals = np.array([r.total_cost for r in sep_recs])

            best = None
            for H in h_grid:
                recs = _run_trials(sys, _controller_spec(B_MPC, cfg, horizon=H),
                                   cfg.steps, seeds, cfg.parallel)
                raw += [(f"b-mpc_{tag}_H{H}_trial{i}.csv", r)
                        for i, r in enumerate(recs)]
                totals = np.array([r.total_cost for r in recs])
                if best is None or totals.mean() < best[1].mean():
                    best = (H, totals)
            best_h, bmpc_totals = best
            sep_mean = float(sep_totals.mean())
            bmpc_mean = float(bmpc_totals.mean())
            gain = 100.0 * (sep_mean - bmpc_mean) / sep_mean
            per_trial = 100.0 * (sep_totals - bmpc_totals) / sep_totals
            spread = _stats(per_trial)
            rows.append(_lead(cfg, exp, B_MPC)
                        | {"r_scale": r_scale, "c0": c0, "best_h": best_h,
                           "sep_mean_cost": sep_mean,
                           "bmpc_mean_cost": bmpc_mean,
                           "mean": gain, "stderr": spread["stderr"],
                           "ci95": spread["ci95"]})
    return _emit(cfg, exp,
                 ("r_scale", "c0", "best_h", "sep_mean_cost", "bmpc_mean_cost"),
                 rows, raw_records=raw, seeds=seeds,
                 wall=time.perf_counter() - t0)


def run_rho_sweep(cfg: ExperimentConfig, rho_grid=RHO_GRID) -> ExperimentResult:
    """Mean total cost versus spectral radius for the main controllers."""
    cfg = cfg.resolved()
    exp = "rho-sweep"
    t0 = time.perf_counter()
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]
    controllers = _selected(cfg, MAIN_CONTROLLERS)

    rows, raw = [], []
    by_ctrl = {ctrl: [] for ctrl in controllers}
    for rho in rho_grid:
        sys = build_system(replace(cfg, rho=rho))
        for ctrl in controllers:
            log.info("%s: %s at rho=%g", exp, ctrl, rho)
            recs = _run_trials(sys,
                               _controller_spec(ctrl, cfg, horizon=cfg.horizon),
                               cfg.steps, seeds, cfg.parallel)
            raw += [(f"{ctrl}_rho{rho:g}_trial{i}.csv", r)
                    for i, r in enumerate(recs)]
            by_ctrl[ctrl].append((rho, _stats([r.total_cost for r in recs])))
    for ctrl in controllers:
        for rho, stats in by_ctrl[ctrl]:
            rows.append(_lead(cfg, exp, ctrl) | {"rho": rho} | stats)
    return _emit(cfg, exp, ("rho",), rows, raw_records=raw, seeds=seeds,
                 wall=time.perf_counter() - t0)


def run_runtime_study(cfg: ExperimentConfig, h_grid=H_GRID) -> ExperimentResult:
    """Mean wall-clock per rollout versus horizon for all four controllers.

    Trials run strictly sequentially regardless of cfg.parallel so the
    timings are not polluted by multiprocessing contention.
    """
    cfg = cfg.resolved()
    exp = "runtime"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]

    rows, raw = [], []
    for ctrl in _selected(cfg, RUNTIME_CONTROLLERS):
        for H in h_grid:
            log.info("%s: timing %s at H=%d", exp, ctrl, H)
            recs = _run_trials(sys, _controller_spec(ctrl, cfg, horizon=H),
                               cfg.steps, seeds, parallel=1)
            raw += [(f"{ctrl}_H{H}_trial{i}.csv", r)
                    for i, r in enumerate(recs)]
            rows.append(_lead(cfg, exp, ctrl) | {"H": H}
                        | _stats([r.wall_clock_seconds for r in recs]))
    return _emit(cfg, exp, ("H",), rows, raw_records=raw, seeds=seeds,
                 wall=time.perf_counter() - t0)


def run_init_study(cfg: ExperimentConfig, iter_grid=ITER_GRID) -> ExperimentResult:
    """Belief-planner cost versus optimizer budget for the two init schemes."""
    cfg = cfg.resolved(steps_default=100, horizon_default=15)
    exp = "init-study"
    t0 = time.perf_counter()
    sys = build_system(cfg)
    seeds = [trial_seed(cfg.seed, exp, i) for i in range(cfg.trials)]

    rows, raw = [], []
    for scheme in (INIT_RANDOM, INIT_SEP_WARM):
        for iters in iter_grid:
            log.info("%s: %s init, max_iters=%d", exp, scheme, iters)
            spec = _controller_spec(B_MPC, cfg, horizon=cfg.horizon,
                                    init_scheme=scheme,
                                    lbfgs=replace(cfg.lbfgs, max_iters=iters))
            recs = _run_trials(sys, spec, cfg.steps, seeds, cfg.parallel)
            raw += [(f"b-mpc_{scheme}_iters{iters}_trial{i}.csv", r)
                    for i, r in enumerate(recs)]
            rows.append(_lead(cfg, exp, B_MPC)
                        | {"init": scheme, "max_iters": iters}
                        | _stats([r.total_cost for r in recs]))
    return _emit(cfg, exp, ("init", "max_iters"), rows, raw_records=raw,
                 seeds=seeds, wall=time.perf_counter() - t0)


EXPERIMENT_RUNNERS = {
    "h-sweep": run_h_sweep,
    "decompose": run_decompose,
    "kf-diag": run_kf_diag,
    "counterfactual": run_counterfactual,
    "synthetic-gap": run_synthetic_gap,
    "heatmap": run_heatmap,
    "rho-sweep": run_rho_sweep,
    "runtime": run_runtime_study,
    "init-study": run_init_study,
}

# Experiments whose natural benchmark differs from the global default.
EXPERIMENT_SYSTEM_DEFAULTS = {"kf-diag": DOUBLE_INTEGRATOR}
