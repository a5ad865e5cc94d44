"""Unified command line: one binary, one subcommand per module.

    pairpop <module> <task> --config FILE [--seed S] [--out DIR] [--jobs N]

Every output CSV starts with comment headers carrying the tool version, the
config hash and the trial seed, so identical (config, seed) pairs produce
byte-identical files.  Exit codes: 0 ok, 2 config error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from pairpop import __version__
from pairpop import ddmap, lattice, measures, moran, pde, perc, selmut
from pairpop.config import ExperimentConfig, parse_config, trial_seed
from pairpop.errors import ConfigError, PairpopError


def _header(schema: str, cfg_hash: str, seed: int) -> str:
    return (
        f"# pairpop {__version__}\n"
        f"# schema={schema}\n"
        f"# config={cfg_hash}\n"
        f"# seed={seed}\n"
    )


def _write_csv(path: Path, schema, cfg_hash, seed, columns, rows):
    with open(path, "w") as fh:
        fh.write(_header(schema, cfg_hash, seed))
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _fitness_params(p: dict) -> measures.FitnessParams:
    L = p["L"]
    K = p.get("K")
    if K is None:
        K = [1.0] * (2 * L + 1)
    if p.get("B") is not None:
        return measures.FitnessParams(L, K, B=p["B"], mu=p.get("mu", 0.0))
    return measures.FitnessParams(L, K, b=p["b"], M=p["M"], mu=p.get("mu", 0.0))


def _ips_params(p: dict) -> lattice.IPSParams:
    sides = tuple(p["sides"])
    return lattice.IPSParams(
        lam=p["lam"],
        delta=p["delta"],
        birth_rule=p.get("rule", "paired"),
        d=len(sides),
        stirring=p.get("stirring", "none"),
        epsilon=p.get("epsilon") or None,
    )


# ---------------------------------------------------------------------------
# runners: (cfg, seed, outdir, tag) -> [paths]


def _run_selmut(cfg, seed, outdir, tag):
    p = cfg.params
    h = cfg.config_hash()
    if cfg.task == "cubic":
        cub = selmut.cubic_reduce_1d(p["b"], p["mu"])
        xs = np.linspace(0.0, 1.0, p["npoints"])
        rows = [(x, cub(x)) for x in xs]
        return [
            _write_csv(outdir / f"{tag}_cubic.csv", "selmut.cubic", h, seed,
                       ["pi0", "dpi0_dt"], rows)
        ]
    fp = _fitness_params(p)
    if cfg.task == "stationary":
        init = p.get("init")
        init_m = (
            measures.SimplexMeasure(init) if init else measures.SimplexMeasure.uniform(fp.L)
        )
        meas, resid = selmut.find_stationary(fp, init_m, tol=p["tol"])
        m = measures.fitness_vector(meas, fp)
        rows = [
            (x, meas.values[i], m[i], resid)
            for i, x in enumerate(range(-fp.L, fp.L + 1))
        ]
        return [
            _write_csv(outdir / f"{tag}_stationary.csv", "selmut.stationary", h, seed,
                       ["x", "pi_x", "m_x", "residual"], rows)
        ]
    if p.get("pi0") is not None:
        pi0 = measures.SimplexMeasure(p["pi0"])
    elif p.get("pi0_center") is not None:
        pi0 = selmut.symmetric_start(p["pi0_center"])
    else:
        pi0 = measures.SimplexMeasure.uniform(fp.L)
    traj = selmut.integrate(
        pi0, fp, T=p["T"], dt=p["dt"], method=p["method"],
        record_every=p["record_every"],
    )
    rows = []
    for t, state, V, mb in zip(traj.times, traj.states, traj.lyapunov, traj.mbar):
        for i, x in enumerate(range(-fp.L, fp.L + 1)):
            rows.append((t, x, state[i], V, mb))
    return [
        _write_csv(outdir / f"{tag}_trajectory.csv", "selmut.trajectory", h, seed,
                   ["t", "x", "pi_x", "V", "mbar"], rows)
    ]


def _dd_init(p, params):
    n = 2 * params.L + 1
    if p["init"] == "uniform":
        return np.full(n, 1.0 / n)
    if p["init"] == "delta":
        v = np.zeros(n)
        v[params.L] = 1.0
        return v
    v = np.zeros(n)
    v[1] = v[-2] = 0.45
    v[params.L] = 0.1
    return v


def _run_dd(cfg, seed, outdir, tag):
    p = cfg.params
    h = cfg.config_hash()
    params = ddmap.DDParams.rectangular(p["L"], p["M"], mu=p.get("mu") or None)
    init = _dd_init(p, params)
    if cfg.task == "run":
        rows = []
        v = init / init.sum()
        for it in range(p["iters"] + 1):
            if it % p["record_every"] == 0 or it == p["iters"]:
                for i, x in enumerate(range(-params.L, params.L + 1)):
                    rows.append((it, x, v[i]))
            if it < p["iters"]:
                v = ddmap.dd_step(v, params)
        return [
            _write_csv(outdir / f"{tag}_evolution.csv", "dd.evolution", h, seed,
                       ["iter", "x", "pi_x"], rows)
        ]
    if cfg.task == "stationary":
        res = ddmap.dd_stationary(params, init, max_iter=p["max_iter"], tol=p["tol"])
        rows = [
            (res.iterations, x, res.measure.values[i])
            for i, x in enumerate(range(-params.L, params.L + 1))
        ]
        return [
            _write_csv(outdir / f"{tag}_stationary.csv", "dd.stationary", h, seed,
                       ["iter", "x", "pi_x"], rows)
        ]
    # fan-out: one stationary CSV per grid point plus the index CSV
    rows = []
    paths = []
    for gp, mu in enumerate(p["mus"]):
        pm = ddmap.DDParams.rectangular(p["L"], p["M"], mu=mu)
        res = ddmap.dd_stationary(pm, init, max_iter=p["max_iter"], tol=p["tol"])
        rows.append(
            (mu, ddmap.middle_mass(res.measure, pm), res.vbar, res.iterations)
        )
        point_rows = [
            (res.iterations, x, res.measure.values[i])
            for i, x in enumerate(range(-pm.L, pm.L + 1))
        ]
        paths.append(
            _write_csv(outdir / f"{tag}_point{gp:02d}_stationary.csv",
                       "dd.stationary", h, seed, ["iter", "x", "pi_x"], point_rows)
        )
    paths.append(
        _write_csv(outdir / f"{tag}_sweep.csv", "dd.sweep", h, seed,
                   ["mu", "middle_mass", "vbar", "iters"], rows)
    )
    return paths


def _run_moran(cfg, seed, outdir, tag):
    p = cfg.params
    h = cfg.config_hash()
    fp = _fitness_params(p)
    init = measures.SimplexMeasure(p["pi0"]) if p.get("pi0") else None
    traj = moran.simulate(
        p["mode"], fp, N=p["N"], T=p["T"], seed=seed, init=init,
        record_events=p["events"], snapshot_dt=p["snapshot_dt"] or None,
    )
    paths = []
    if p["events"]:
        rows = [
            (t, fx, tx, moran.CHANNEL_NAMES[ch])
            for t, fx, tx, ch in zip(traj.times, traj.from_x, traj.to_x, traj.channel)
        ]
        paths.append(
            _write_csv(outdir / f"{tag}_events.csv", "moran.events", h, seed,
                       ["t", "from_x", "to_x", "channel"], rows)
        )
    if traj.snapshots:
        rows = []
        for t, counts in traj.snapshots:
            for i, x in enumerate(range(-fp.L, fp.L + 1)):
                rows.append((t, x, counts[i] / traj.N))
        paths.append(
            _write_csv(outdir / f"{tag}_snapshots.csv", "moran.snapshots", h, seed,
                       ["t", "x", "pi_x"], rows)
        )
    return paths


def _run_ips(cfg, seed, outdir, tag):
    p = cfg.params
    h = cfg.config_hash()
    params = _ips_params(p)
    torus = lattice.Torus(tuple(p["sides"]))
    if cfg.task == "run":
        state = (
            lattice.LatticeState.all_occupied(torus)
            if p["init"] == "all"
            else lattice.LatticeState.single_pair(torus, torus.nsites // 2)
        )
        log = lattice.GraphicalEventLog(seed, torus, params)
        sim = lattice.LatticeSimulation(params, log, state)
        rows = []
        every = p["snapshot_dt"] or p["T"]
        t = 0.0
        while t < p["T"] + 1e-12:
            sim.advance(min(t, p["T"]))
            if torus.d == 1:
                for x in range(torus.nsites):
                    rows.append((state.time, x, int(state.male[x]), int(state.female[x])))
            t += every
        summary = [(seed, int(state.particles > 0), sim.absorbed_at if sim.absorbed_at is not None else "")]
        return [
            _write_csv(outdir / f"{tag}_snapshots.csv", "ips.snapshots", h, seed,
                       ["t", "x", "male", "female"], rows),
            _write_csv(outdir / f"{tag}_summary.csv", "ips.summary", h, seed,
                       ["seed", "survival", "t_extinct"], summary),
        ]
    if cfg.task == "couple":
        rng = np.random.default_rng(seed)
        rows = []
        for k in range(p["pairs"]):
            lo = lattice.LatticeState(torus)
            hi = lattice.LatticeState(torus)
            bits = rng.random((2, torus.nsites))
            hi.male[:] = bits[0] < 0.6
            hi.female[:] = bits[1] < 0.6
            lo.male[:] = (bits[0] < 0.6) & (rng.random(torus.nsites) < 0.5)
            lo.female[:] = (bits[1] < 0.6) & (rng.random(torus.nsites) < 0.5)
            for st in (lo, hi):
                st.particles = int(st.male.sum()) + int(st.female.sum())
            log = lattice.GraphicalEventLog(seed + 7919 * k, torus, params)
            lattice.coupled_advance([lo, hi], params, log, p["T"])
            rows.append((k, int(lo.leq(hi))))
        return [
            _write_csv(outdir / f"{tag}_couple.csv", "ips.couple", h, seed,
                       ["pair", "ordered"], rows)
        ]
    if cfg.task == "dual":
        rows = []
        cstar = p["c_star"] if p["c_star"] >= 0 else None
        for trial in range(p["trials"]):
            stats = lattice.dual_influence(
                params, torus, p["t"], p["epsilon"], seed=trial_seed(seed, trial, "derive"),
                c_star=cstar,
            )
            rows.append((trial, stats.size, stats.collisions, stats.branch_events))
        return [
            _write_csv(outdir / f"{tag}_dual.csv", "ips.dual", h, seed,
                       ["trial", "cloud_size", "collisions", "branches"], rows)
        ]
    # goodevents
    state0 = lattice.LatticeState.all_occupied(torus)
    fieldrep = lattice.good_event_field(
        params, torus, state0, p["block_T"], p["width"], p["height"], seed
    )
    grid = perc.generate(0.0, 1, 1, mode="from_field", field=fieldrep)
    out = outdir / f"{tag}_goodevents.txt"
    with open(out, "w") as fh:
        fh.write(_header("ips.goodevents", h, seed))
        fh.write(grid.dump())
    rows = [
        (
            fieldrep.gamma_hat,
            fieldrep.on_front_good,
            fieldrep.on_front_trials,
            int(fieldrep.dominated()),
        )
    ]
    return [
        out,
        _write_csv(outdir / f"{tag}_goodevents.csv", "ips.goodevents", h, seed,
                   ["gamma_hat", "on_front_good", "on_front_trials", "dominated"], rows),
    ]


def _run_perc(cfg, seed, outdir, tag):
    p = cfg.params
    h = cfg.config_hash()
    if cfg.task == "survive":
        pval = p["p"] if p["p"] >= 0 else None
        est, se = perc.survival_mc(
            p["gamma"], p["width"], p["n_levels"], p["trials"], seed=seed,
            p=pval, W0=p.get("W0"), target=p["target"],
        )
        rows = [(p["gamma"], est, se, p["trials"])]
        return [
            _write_csv(outdir / f"{tag}_survival.csv", "perc.survival", h, seed,
                       ["gamma", "estimate", "stderr", "trials"], rows)
        ]
    if cfg.task == "exact":
        val = perc.survival_exact(
            p["gamma"], p["W0"], p["width"], p["n_levels"], p["target"]
        )
        rows = [(p["gamma"], val)]
        return [
            _write_csv(outdir / f"{tag}_exact.csv", "perc.exact", h, seed,
                       ["gamma", "probability"], rows)
        ]
    # fromips: build the block field, evolve, dominate-check
    params = lattice.IPSParams(lam=p["lam"], delta=p["delta"])
    torus = lattice.Torus(tuple(p["sides"]))
    state0 = lattice.LatticeState.all_occupied(torus)
    fieldrep = lattice.good_event_field(
        params, torus, state0, p["block_T"], p["width"], p["height"], seed
    )
    grid = perc.generate(0.0, 1, 1, mode="from_field", field=fieldrep)
    fronts = perc.evolve(grid, sorted(fieldrep.X[0]))
    rows = []
    for fr, X in zip(fronts, fieldrep.X):
        rows.append((fr.n, len(fr.wet), len(X), int(fr.wet <= X)))
    return [
        _write_csv(outdir / f"{tag}_fromips.csv", "perc.fromips", h, seed,
                   ["level", "wet", "pairs", "dominated"], rows)
    ]


def _run_pde(cfg, seed, outdir, tag):
    p = cfg.params
    h = cfg.config_hash()
    if cfg.task == "phase":
        rows = []
        for c in p["c_values"]:
            if c == 4.0:
                rows.append((c, "", "", "", "", ""))
                continue
            rep = pde.equilibria(c)
            if rep.has_interior:
                rows.append(
                    (c, rep.p_plus.point[0], rep.p_plus.point[1],
                     rep.p_minus.point[0], rep.p_minus.point[1],
                     int(rep.p_minus.label == "saddle"))
                )
            else:
                rows.append((c, "", "", "", "", ""))
        paths = [
            _write_csv(outdir / f"{tag}_phase.csv", "pde.phase", h, seed,
                       ["c", "Pplus_u", "Pplus_v", "Pminus_u", "Pminus_v", "saddle_flag"],
                       rows)
        ]
        if p["nullcline_c"] > 0:
            c = p["nullcline_c"]
            us = np.linspace(0.0, 1.0, p["npoints"])
            g1, g2 = pde.nullclines(c, us)
            rows = list(zip(us, g1, g2))
            paths.append(
                _write_csv(outdir / f"{tag}_nullclines.csv", "pde.nullclines", h, seed,
                           ["u", "v_gamma1", "v_gamma2"], rows)
            )
        return paths
    if cfg.task == "star":
        rep = pde.condition_star_check(
            p["c"], p["D1"], p["d1"], p["L"], p["l"], p["T"], p["s"],
            p["a0"], p["b0"], h=p["h"],
        )
        rows = list(zip(rep.times, rep.wet_width))
        out = [
            _write_csv(outdir / f"{tag}_star.csv", "pde.star", h, seed,
                       ["t", "wet_width"], rows),
            _write_csv(outdir / f"{tag}_star_summary.csv", "pde.star_summary", h, seed,
                       ["holds", "min_v_on_target"],
                       [(int(rep.holds), rep.min_v_on_target)]),
        ]
        return out
    spec = pde.ReactionSpec(p["system"], p["c"])
    if p["init"] == "const":
        vals = p.get("values") or [0.5] * len(spec.components)
        fld = pde.Field.constant(spec, vals, p["X"], p["h"])
    else:
        f0 = pde.profile_f0(p["profile_L"], p["profile_l"])
        amps = p.get("values") or ([p["a0"], p["b0"]][: len(spec.components)] or [p["a0"]])
        if len(amps) < len(spec.components):
            amps = list(amps) + [amps[-1]] * (len(spec.components) - len(amps))
        fld = pde.Field.from_profiles(
            spec, [(lambda a: (lambda x: a * f0(x)))(a) for a in amps], p["X"], p["h"]
        )
    rec = p["record_every"] or max(1, int(round(p["T"] / p["s"])) // 8)
    traj = pde.trotter_integrate(spec, fld, p["T"], p["s"], record_every=rec)
    rows = []
    for t, f in zip(traj.times, traj.fields):
        for i, x in enumerate(f.x):
            rows.append((t, x, *(f.comps[name][i] for name in spec.components)))
    return [
        _write_csv(outdir / f"{tag}_field.csv", "pde.field", h, seed,
                   ["t", "x", *spec.components], rows)
    ]


RUNNERS = {
    "selmut": _run_selmut,
    "dd": _run_dd,
    "moran": _run_moran,
    "ips": _run_ips,
    "perc": _run_perc,
    "pde": _run_pde,
}


def _one_trial(cfg: ExperimentConfig, trial: int) -> list:
    seed = trial_seed(cfg.seed, trial, cfg.seed_mode)
    tag = f"{cfg.experiment}_{trial:03d}"
    paths = RUNNERS[cfg.module](cfg, seed, Path(cfg.out), tag)
    return [
        {
            "path": str(p),
            "sha256": hashlib.sha256(Path(p).read_bytes()).hexdigest(),
            "trial": trial,
        }
        for p in paths
    ]


def run(cfg: ExperimentConfig) -> dict:
    """Execute all trials of a config; returns the run manifest.

    Trials fan out over a bounded worker pool (--jobs); each worker owns its
    derived RNG stream and writes its own files, and the single manifest
    writer merges them in trial order, so output bytes never depend on the
    pool size.
    """
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    artifacts = []
    if cfg.jobs > 1 and cfg.repeat > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for batch in pool.map(_one_trial, [cfg] * cfg.repeat, range(cfg.repeat)):
                artifacts.extend(batch)
    else:
        for trial in range(cfg.repeat):
            artifacts.extend(_one_trial(cfg, trial))
    manifest = {
        "tool": f"pairpop {__version__}",
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "wall_time_s": time.time() - t0,
        "artifacts": artifacts,
    }
    with open(outdir / f"{cfg.experiment}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pairpop", description=__doc__)
    parser.add_argument("module", choices=sorted(RUNNERS))
    parser.add_argument("task")
    parser.add_argument("--config", required=True)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--jobs", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
        override = {}
        if args.seed is not None:
            override["seed"] = args.seed
        if args.out is not None:
            override["out"] = args.out
        if args.jobs is not None:
            override["jobs"] = args.jobs
        if cfg.module != args.module or cfg.task != args.task:
            raise ConfigError(
                f"config is for {cfg.module} {cfg.task}, not {args.module} {args.task}"
            )
        if override:
            cfg = ExperimentConfig(**{**cfg.__dict__, **override})
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PairpopError, OSError) as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3
    print(json.dumps({"config": manifest["config_hash"], "artifacts": len(manifest["artifacts"])}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
