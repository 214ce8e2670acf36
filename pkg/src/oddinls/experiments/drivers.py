"""The five packaged experiments.  Each writes into its own directory and
returns a JSON-ready summary dict."""
from __future__ import annotations

import concurrent.futures
import dataclasses
import logging
import math
import warnings
from pathlib import Path

import numpy as np

from ..analysis import (
    hardy_ratio,
    scattering_report,
    small_data_certificate,
    wave_operator_roundtrip,
)
from ..domain import InitialSpec, State, sample_initial
from ..integrator import Schedule, convergence_study, evolve
from ..observables import admissible_pairs, max_relative_drift
from ..transform import homogeneous_norm
from .config import ParamsConfig, RunConfig
from .io import save_checkpoint, write_json, write_observables_csv

log = logging.getLogger(__name__)


def _checkpointer(out: Path, params):
    folder = out / "checkpoints"

    def save(state: State) -> None:
        folder.mkdir(exist_ok=True)
        save_checkpoint(state, folder / "last_good.inls", params)

    return save


def _drift_summary(observables) -> dict:
    return {
        "mass_drift": max_relative_drift(observables, "mass"),
        "energy_drift": max_relative_drift(observables, "e_total"),
    }


def run_evolve(cfg: RunConfig, out: Path) -> dict:
    grid, params, schedule = cfg.make_grid(), cfg.make_params(), cfg.make_schedule()
    u0 = sample_initial(cfg.initial, grid)
    ckpt = _checkpointer(out, params) if schedule.checkpoint_every else None
    traj = evolve(u0, schedule, params, interval=cfg.interval, checkpoint=ckpt)
    obs = traj.observables()
    write_observables_csv(obs, out / "observables.csv")
    report = {
        "experiment": "evolve",
        "steps": schedule.n_steps,
        "t_final": traj.final.t,
        "samples": len(obs),
        **_drift_summary(obs),
        "morawetz_bound_ok": _morawetz_ok(obs),
        "flags": traj.flags,
    }
    write_json(report, out / "report.json")
    return report


def _morawetz_ok(obs) -> bool:
    return all(abs(o.morawetz) <= math.sqrt(o.mass) * math.sqrt(2.0 * o.e_kin) * (1 + 1e-12) + 1e-300 for o in obs)


def run_convergence(cfg: RunConfig, out: Path) -> dict:
    grid, params = cfg.make_grid(), cfg.make_params()
    u0 = sample_initial(cfg.initial, grid)
    t_final = cfg.time.t_max
    study = convergence_study(u0, params, t_final, cfg.convergence.dt_list, cfg.convergence.refine)
    drifts = []
    last = None
    for dt in study.dt_list:
        stride = max(1, round(cfg.time.output_every * cfg.time.dt / dt))
        traj = evolve(u0, Schedule(dt, t_final, stride), params, ("mass", "energy"), on_wall="ignore")
        drifts.append(max_relative_drift(traj.observables(), "e_total"))
        last = traj
    write_observables_csv(last.observables(), out / "observables.csv")
    factors = [a / b if b > 0 else math.inf for a, b in zip(drifts, drifts[1:])]
    report = {
        "experiment": "convergence",
        "dt_list": list(study.dt_list),
        "errors": list(study.errors),
        "reference_dt": study.reference_dt,
        "order": study.order,
        "energy_drifts": drifts,
        "energy_halving_factors": factors,
    }
    write_json(report, out / "report.json")
    return report


def random_odd_packets(n: int, seed: int) -> list[InitialSpec]:
    """Seeded catalogue of symmetrised sine packets used by the Hardy sweep."""
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(n):
        specs.append(InitialSpec(
            "sine_packet",
            amplitude=float(rng.uniform(0.1, 2.0)),
            width=float(rng.uniform(0.2, 2.0)),
            center=float(rng.uniform(0.0, 5.0)),
            wavenumber=float(rng.uniform(0.0, 4.0)),
        ))
    return specs


def run_hardy(cfg: RunConfig, out: Path) -> dict:
    grid = cfg.make_grid()
    per_p = {}
    for p in cfg.hardy.p_values:
        per_p[p] = {"ratios": [], "sharp_constant": (p / (p - 1)) ** p}
    for spec in random_odd_packets(cfg.hardy.samples, cfg.seed):
        state = sample_initial(spec, grid)
        for p in cfg.hardy.p_values:
            per_p[p]["ratios"].append(hardy_ratio(state, p).ratio)
    analytic = hardy_ratio(lambda r: r * np.exp(-r), 2.0, derivative=lambda r: (1 - r) * np.exp(-r))
    report = {
        "experiment": "hardy",
        "seed": cfg.seed,
        "samples": cfg.hardy.samples,
        "by_p": [
            {
                "p": p,
                "sharp_constant": d["sharp_constant"],
                "max_ratio": max(d["ratios"], default=0.0),
                "all_hold": all(r <= d["sharp_constant"] for r in d["ratios"]),
                "ratios": d["ratios"],
            }
            for p, d in per_p.items()
        ],
        "analytic_r_exp_minus_r": analytic.to_dict(),
    }
    write_json(report, out / "report.json")
    return report


def run_scatter(cfg: RunConfig, out: Path) -> dict:
    grid, params, schedule = cfg.make_grid(), cfg.make_params(), cfg.make_schedule()
    u0 = sample_initial(cfg.initial, grid)
    window = cfg.scatter.window
    traj = evolve(
        u0, schedule, params, interval=cfg.interval, store_states=True, store_times=window
    )
    obs = traj.observables()
    write_observables_csv(obs, out / "observables.csv")
    scat = scattering_report(traj, window, cfg.scatter.tol)
    linf = np.array([o.linf_local for o in obs])
    quarter = max(1, len(linf) // 4)
    report = {
        "experiment": "scatter",
        **_drift_summary(obs),
        "scattering": scat.to_dict(),
        "local_decay": {
            "interval": list(cfg.interval),
            "linf_initial": float(linf[0]),
            "linf_final": float(linf[-1]),
            "ratio": float(linf[-1] / linf[0]) if linf[0] > 0 else 0.0,
            "first_quarter_mean": float(linf[:quarter].mean()),
            "last_quarter_mean": float(linf[-quarter:].mean()),
        },
        "morawetz_bound_ok": _morawetz_ok(obs),
        "flags": traj.flags,
    }
    if -0.5 < params.s_c < 0.5:
        # the certificate only needs the uniformly strided samples
        strided = dataclasses.replace(
            traj, samples=[s for s in traj.samples if s.obs is not None and s.state is not None]
        )
        pairs = admissible_pairs(params.s_c, [r for r in cfg.scatter.r_values if r >= 2 / (1 - 2 * params.s_c)])
        if pairs:
            report["small_data"] = small_data_certificate(u0, strided, pairs).to_dict()
    wo = cfg.scatter.wave_operator
    if wo is not None:
        phi = sample_initial(InitialSpec("odd_gaussian", amplitude=wo.amplitude, width=wo.width), grid)
        report["wave_operator"] = wave_operator_roundtrip(phi, wo.T_back, schedule, params).to_dict()
    write_json(report, out / "report.json")
    return report


RUNNERS = {
    "evolve": run_evolve,
    "convergence": run_convergence,
    "hardy": run_hardy,
    "scatter": run_scatter,
}


def _sweep_one(args) -> dict:
    cfg, experiment, out = args
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            rep = RUNNERS[experiment](cfg, out)
            status = "ok"
        except Exception as exc:  # a failed run must not sink the sweep
            rep = {"error": type(exc).__name__, "message": str(exc)}
            status = "failed"
            write_json(rep, out / "error.json")
    return {"alpha": cfg.params.alpha, "b": cfg.params.b, "dir": out.name, "status": status, "report": rep}


def run_sweep(cfg: RunConfig, out: Path, workers: int = 1) -> dict:
    jobs = []
    for a in cfg.sweep.alpha:
        for b in cfg.sweep.b:
            sub = cfg.replace(params=ParamsConfig(a, b))
            jobs.append((sub, cfg.sweep.experiment, out / f"alpha{a:g}_b{b:g}"))
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    summary = {
        "experiment": "sweep",
        "sub_experiment": cfg.sweep.experiment,
        "runs": [
            {k: r[k] for k in ("alpha", "b", "dir", "status")}
            | {"s_c": 0.5 - (2 - r["b"]) / r["alpha"], "scattering_regime": r["alpha"] > 4 - 2 * r["b"]}
            | {k: r["report"].get(k) for k in ("mass_drift", "energy_drift", "order") if k in r["report"]}
            for r in results
        ],
    }
    write_json(summary, out / "summary.json")
    return summary
