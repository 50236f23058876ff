"""Command-line front end.

Subcommands: `gen` writes model instances, `learn` runs the measure-then-fit
pipeline end-to-end, `sweep` scans N, beta, or system size with per-trial
seeds, `lab` dispatches the structural check suites, `hessian` and
`marginals` dump exact quantities for a stored model.

Every run records a manifest JSON (config snapshot, master seed, tool
version, per-trial seeds, output names).  Feeding a manifest back through
--config replays the run: CSV outputs are byte-identical because all
randomness flows from recorded seeds and wall-clock data is quarantined in
JSON sidecars.  Exit code 0 means every asserted check of that command
passed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .gibbs import diagonalize, gibbs, marginals
from .lab import (
    CheckReport,
    DirectionVector,
    akl_concentration_check,
    delta_gamma,
    embed_on_sites,
    global_to_local_check,
    infinite_temp_variance_check,
    lieb_robinson_decay,
    local_unitary_probe,
    local_variance_floor,
    lower_bound_family,
    strong_convexity_probe,
    verify_sum_bounds,
)
from .lattice import (
    DENSE_CAP_ENV,
    HamiltonianModel,
    LatticeSpec,
    assemble_hamiltonian,
    basis_stack,
    dense_cap,
    enumerate_basis,
    load_model,
    save_model,
)
from .measure import DEFAULT_DELTA_FAIL, SCHEMES, build_plan, sample_outcomes
from .qbp import FilterKernel, hessian_logZ, log_partition, quasilocal_W, verify_fourier_pair
from .reporting import (
    is_manifest,
    new_manifest,
    read_json,
    trial_seed,
    write_csv,
    write_json,
)
from .solver import SolverConfig, alpha_along_segment, error_bound, solve


class CLIError(Exception):
    """User-facing configuration or usage problem; exits with code 2."""


# ---------------------------------------------------------------------------
# Config plumbing.


def _load_config(path: str, command: str, cli_seed: int) -> tuple[dict, int]:
    """Resolve --config into (config, master_seed); manifests replay verbatim."""
    try:
        doc = read_json(path)
    except FileNotFoundError:
        raise CLIError(f"config file not found: {path}")
    except ValueError as exc:
        raise CLIError(f"config file {path} is not valid JSON: {exc}")
    if is_manifest(doc):
        if doc.get("command") != command:
            raise CLIError(
                f"manifest {path} records command {doc.get('command')!r}, not {command!r}"
            )
        return dict(doc["config"]), int(doc["master_seed"])
    if not isinstance(doc, dict):
        raise CLIError(f"config file {path} must hold a JSON object")
    return doc, cli_seed


def _require_fields(config: dict, command: str, spec: dict) -> list[str]:
    """Validate {field: predicate} over config; returns the offender list."""
    bad = []
    for field, (required, check, hint) in spec.items():
        if field not in config:
            if required:
                bad.append(f"{field} (missing, expected {hint})")
            continue
        if not check(config[field]):
            bad.append(f"{field} (expected {hint}, got {config[field]!r})")
    return bad


def _fail_fields(command: str, offenders: list[str]) -> None:
    if offenders:
        raise CLIError(f"invalid {command} config: " + "; ".join(offenders))


def _lattice_from_config(config: dict) -> LatticeSpec:
    lat = config.get("lattice")
    offenders = []
    if not isinstance(lat, dict):
        _fail_fields("gen", ["lattice (missing, expected object)"])
    dim = lat.get("dimension")
    sides = lat.get("side_lengths")
    if not isinstance(dim, int) or dim < 1:
        offenders.append(f"lattice.dimension (expected int >= 1, got {dim!r})")
    if (
        not isinstance(sides, list)
        or not sides
        or not all(isinstance(s, int) and s >= 1 for s in sides)
    ):
        offenders.append(f"lattice.side_lengths (expected list of ints >= 1, got {sides!r})")
    elif isinstance(dim, int) and len(sides) != dim:
        offenders.append("lattice.side_lengths (length must equal lattice.dimension)")
    periodic = lat.get("periodic", False)
    if not isinstance(periodic, bool):
        offenders.append(f"lattice.periodic (expected bool, got {periodic!r})")
    _fail_fields("gen", offenders)
    return LatticeSpec(dimension=dim, side_lengths=tuple(sides), periodic=periodic)


def _check_dense_cap(n_sites: int) -> None:
    cap = dense_cap()
    if n_sites > cap:
        raise CLIError(
            f"{n_sites} sites exceeds the dense-simulation cap {cap}; "
            f"set {DENSE_CAP_ENV} to raise it"
        )


def _solver_config(raw: dict | None) -> SolverConfig:
    if raw is None:
        return SolverConfig()
    if not isinstance(raw, dict):
        raise CLIError(f"solver config must be an object, got {raw!r}")
    known = set(SolverConfig.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise CLIError(f"unknown solver config fields: {', '.join(unknown)}")
    try:
        return SolverConfig(**raw)
    except ValueError as exc:
        raise CLIError(f"bad solver config: {exc}")


def _instance_mu(config: dict, m: int, rng: np.random.Generator) -> np.ndarray:
    mu_spec = config.get("mu", "random")
    if isinstance(mu_spec, str):
        if not mu_spec.startswith("random"):
            _fail_fields("gen", [f"mu (expected 'random' or list of {m} floats)"])
        return rng.uniform(-1.0, 1.0, m)
    if not isinstance(mu_spec, list) or len(mu_spec) != m:
        _fail_fields("gen", [f"mu (expected 'random' or list of {m} floats, got {mu_spec!r})"])
    mu = np.asarray(mu_spec, dtype=float)
    if np.any(np.abs(mu) > 1.0):
        raise CLIError("invalid gen config: mu (coefficients must lie in [-1, 1])")
    return mu


# ---------------------------------------------------------------------------
# gen


def cmd_gen(config: dict, seed: int, out: str) -> int:
    offenders = _require_fields(
        config,
        "gen",
        {
            "kappa": (True, lambda v: isinstance(v, int) and v >= 1, "int >= 1"),
            "beta": (True, lambda v: isinstance(v, (int, float)) and v > 0, "float > 0"),
        },
    )
    _fail_fields("gen", offenders)
    lattice = _lattice_from_config(config)
    basis = enumerate_basis(lattice, config["kappa"])
    rng = np.random.default_rng(seed)
    mu = _instance_mu(config, basis.m, rng)
    model = HamiltonianModel(basis=basis, mu=mu)

    model_path = os.path.join(out, "model.json")
    save_model(model, model_path)
    manifest = new_manifest("gen", config, seed, __version__)
    manifest["outputs"] = ["model.json"]
    write_json(os.path.join(out, "gen_manifest.json"), manifest)
    print(f"m={basis.m} n={lattice.n_sites}")
    return 0


# ---------------------------------------------------------------------------
# learn


def _learn_once(
    model: HamiltonianModel,
    beta: float,
    n_copies: int,
    scheme: str,
    delta_fail: float,
    seed: int,
    cfg: SolverConfig,
) -> dict:
    """Measure, fit, and compare against the stored truth; returns raw pieces."""
    basis = model.basis
    ensemble = gibbs(diagonalize(assemble_hamiltonian(model)), beta)
    plan = build_plan(basis, scheme, n_copies)
    estimates = sample_outcomes(plan, ensemble, seed=seed, delta_fail=delta_fail)
    mu_hat, trace = solve(estimates.e_hat, beta, basis, cfg)

    m = basis.m
    l2_error = float(np.linalg.norm(mu_hat - model.mu))
    delta_max = float(np.max(estimates.delta)) if m else 0.0
    alpha = alpha_along_segment(basis, model.mu, mu_hat, beta)
    pg_final = float(trace.grad_norms[-1]) if trace.grad_norms else 0.0
    # fold the solver residual into an effective marginal error so the bound
    # stays meaningful when measurement noise is zero (exact scheme)
    effective_delta = max(delta_max, pg_final / (2.0 * beta * math.sqrt(m)))
    bound = error_bound(effective_delta, alpha, beta, m) if alpha > 0 else math.inf
    return {
        "estimates": estimates,
        "trace": trace,
        "mu_hat": mu_hat,
        "l2_error": l2_error,
        "delta_max": delta_max,
        "alpha": alpha,
        "bound": bound,
        "bound_holds": bool(l2_error <= bound),
        "pg_final": pg_final,
    }


def _write_trace_csv(path: str, trace) -> None:
    rows = list(zip(trace.iterations, trace.objectives, trace.grad_norms, trace.steps))
    write_csv(path, ("iteration", "objective", "grad_norm", "step"), rows)


def cmd_learn(config: dict, seed: int, out: str, scheme_flag: str | None) -> int:
    offenders = _require_fields(
        config,
        "learn",
        {
            "model": (True, lambda v: isinstance(v, str), "path to a model JSON"),
            "N": (True, lambda v: isinstance(v, int) and v >= 0, "int >= 0"),
            "beta": (True, lambda v: isinstance(v, (int, float)) and v > 0, "float > 0"),
        },
    )
    _fail_fields("learn", offenders)
    scheme = scheme_flag or config.get("scheme", "grouped")
    if scheme not in SCHEMES:
        raise CLIError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    delta_fail = float(config.get("delta_fail", DEFAULT_DELTA_FAIL))
    cfg = _solver_config(config.get("solver"))
    try:
        model = load_model(config["model"])
    except FileNotFoundError:
        raise CLIError(f"model file not found: {config['model']}")
    _check_dense_cap(model.basis.lattice.n_sites)
    beta = float(config["beta"])

    trace_path = os.path.join(out, "trace.csv")
    try:
        run = _learn_once(model, beta, config["N"], scheme, delta_fail, seed, cfg)
    except ValueError as exc:
        raise CLIError(str(exc))
    except RuntimeError as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None:
            _write_trace_csv(trace_path, partial)
        raise CLIError(f"solver failed: {exc} (trace at {trace_path})")

    estimates = run["estimates"]
    est_rows = list(
        zip(range(model.basis.m), estimates.e_hat, estimates.delta, estimates.shots)
    )
    write_csv(os.path.join(out, "estimates.csv"), ("l", "e_hat", "delta", "shots"), est_rows)
    write_json(
        os.path.join(out, "estimates.json"),
        {
            "seed": estimates.seed,
            "scheme": estimates.scheme,
            "N_total": estimates.n_total,
            "delta_fail": estimates.delta_fail,
        },
    )
    trace = run["trace"]
    _write_trace_csv(trace_path, trace)
    result = {
        "l2_error": run["l2_error"],
        "delta_max": run["delta_max"],
        "iterations": len(trace.iterations),
        "converged": bool(trace.converged),
        "alpha_measured": run["alpha"],
        "bound_value": run["bound"],
        "bound_holds": run["bound_holds"],
        "pg_final": run["pg_final"],
        "wall_time_s": trace.wall_time,
        "m": model.basis.m,
        "n": model.basis.lattice.n_sites,
    }
    write_json(os.path.join(out, "result.json"), result)
    manifest = new_manifest("learn", {**config, "scheme": scheme}, seed, __version__)
    manifest["outputs"] = ["estimates.csv", "estimates.json", "trace.csv", "result.json"]
    write_json(os.path.join(out, "learn_manifest.json"), manifest)
    print(
        f"l2_error={run['l2_error']:.6g} delta_max={run['delta_max']:.6g} "
        f"iterations={len(trace.iterations)} converged={trace.converged}"
    )
    return 0 if trace.converged else 1


# ---------------------------------------------------------------------------
# sweep


SWEEP_HEADER = (
    "trial",
    "n",
    "m",
    "beta",
    "N",
    "delta_observed",
    "alpha_measured",
    "l2_error",
    "bound_value",
    "bound_holds",
)


def _trial_worker(payload: dict) -> dict:
    """One sweep trial; returns its CSV row, runtime, and any error text."""
    t0 = time.perf_counter()
    trial = payload["trial"]
    n = payload["n"]
    beta = payload["beta"]
    n_copies = payload["N"]
    try:
        lattice = LatticeSpec(dimension=1, side_lengths=(n,))
        basis = enumerate_basis(lattice, payload["kappa"])
        rng = np.random.default_rng(payload["seed"])
        if payload["mu"] is None:
            mu = rng.uniform(-1.0, 1.0, basis.m)
        else:
            mu = np.asarray(payload["mu"], dtype=float)
        measure_seed = int(rng.integers(2**63))  # decouple shot noise from mu
        model = HamiltonianModel(basis=basis, mu=mu)
        run = _learn_once(
            model,
            beta,
            n_copies,
            payload["scheme"],
            payload["delta_fail"],
            measure_seed,
            SolverConfig(**payload["solver"]),
        )
        row = (
            trial,
            n,
            basis.m,
            beta,
            n_copies,
            run["delta_max"],
            run["alpha"],
            run["l2_error"],
            run["bound"],
            run["bound_holds"],
        )
        error = None
    except Exception as exc:  # per-trial failures recorded, sweep continues
        row = (trial, n, -1, beta, n_copies, math.nan, math.nan, math.nan, math.nan, False)
        error = f"{type(exc).__name__}: {exc}"
    runtime = time.perf_counter() - t0
    if payload["fragment"] is not None:
        write_csv(payload["fragment"], SWEEP_HEADER, [row])
    return {"trial": trial, "row": row, "runtime": runtime, "error": error}


def _sweep_payloads(config: dict, seed: int, tmp_dir: str) -> list[dict]:
    axis = config["axis"]
    values = config["values"]
    trials = config["trials"]
    solver_raw = config.get("solver") or {}
    _solver_config(solver_raw)  # validate once up front
    payloads = []
    trial = 0
    for value in values:
        for _ in range(trials):
            n = int(value) if axis == "size" else int(config["n"])
            beta = float(value) if axis == "beta" else float(config["beta"])
            n_copies = int(value) if axis == "N" else int(config["N"])
            payloads.append(
                {
                    "trial": trial,
                    "seed": trial_seed(seed, trial),
                    "n": n,
                    "kappa": int(config.get("kappa", 2)),
                    "beta": beta,
                    "N": n_copies,
                    "scheme": config.get("scheme", "grouped"),
                    "delta_fail": float(config.get("delta_fail", DEFAULT_DELTA_FAIL)),
                    "mu": config.get("mu") if isinstance(config.get("mu"), list) else None,
                    "solver": solver_raw,
                    "fragment": os.path.join(tmp_dir, f"trial_{trial:06d}.csv"),
                }
            )
            trial += 1
    return payloads


def cmd_sweep(config: dict, seed: int, out: str, jobs: int) -> int:
    offenders = _require_fields(
        config,
        "sweep",
        {
            "axis": (True, lambda v: v in ("N", "beta", "size"), "one of N, beta, size"),
            "values": (
                True,
                lambda v: isinstance(v, list) and len(v) >= 1,
                "nonempty list",
            ),
            "trials": (True, lambda v: isinstance(v, int) and v >= 1, "int >= 1"),
        },
    )
    axis = config.get("axis")
    if axis in ("N", "beta") and not isinstance(config.get("n"), int):
        offenders.append("n (required unless axis is 'size')")
    if axis in ("N", "size") and not isinstance(config.get("beta"), (int, float)):
        offenders.append("beta (required unless axis is 'beta')")
    if axis in ("beta", "size") and not isinstance(config.get("N"), int):
        offenders.append("N (required unless axis is 'N')")
    if axis == "size" and isinstance(config.get("mu"), list):
        offenders.append("mu (explicit coefficients cannot span a size sweep)")
    _fail_fields("sweep", offenders)
    sizes = config["values"] if axis == "size" else [config["n"]]
    for n in sizes:
        _check_dense_cap(int(n))

    tmp_dir = os.path.join(out, "tmp")
    os.makedirs(tmp_dir, exist_ok=True)
    payloads = _sweep_payloads(config, seed, tmp_dir)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_trial_worker, payloads))
    else:
        results = [_trial_worker(p) for p in payloads]
    results.sort(key=lambda r: r["trial"])

    # merge per-trial fragments in index order, then drop the scratch dir
    rows = []
    for payload, res in zip(payloads, results):
        frag = payload["fragment"]
        with open(frag) as fh:
            body = fh.read().splitlines()
        rows.append(tuple(body[1].split(",")))
        os.remove(frag)
    os.rmdir(tmp_dir)
    sweep_path = os.path.join(out, "sweep.csv")
    with open(sweep_path, "w", newline="") as fh:
        fh.write(",".join(SWEEP_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")

    trials = config["trials"]
    cells = []
    medians = []
    for c, value in enumerate(config["values"]):
        errs = [
            res["row"][7]
            for res in results[c * trials : (c + 1) * trials]
            if res["error"] is None
        ]
        median = float(np.median(errs)) if errs else math.nan
        medians.append(median)
        cells.append((c, value, trials, trials - len(errs), median))
    write_csv(
        os.path.join(out, "cells.csv"),
        ("cell", "axis_value", "n_trials", "n_failed", "median_error"),
        cells,
    )

    slope = None
    if axis == "N":
        live = [(v, m_) for v, m_ in zip(config["values"], medians) if m_ > 0]
        if len(live) >= 2:
            slope = float(
                np.polyfit(np.log([v for v, _ in live]), np.log([m_ for _, m_ in live]), 1)[0]
            )
    failures = [
        {"trial": res["trial"], "error": res["error"]} for res in results if res["error"]
    ]
    violations = [
        res["trial"] for res in results if res["error"] is None and not res["row"][9]
    ]
    summary = {
        "axis": axis,
        "values": config["values"],
        "median_errors": medians,
        "slope_log_error_vs_log_N": slope,
        "n_trials": len(results),
        "failures": failures,
        "bound_violations": violations,
        "pass": not failures and not violations,
    }
    write_json(os.path.join(out, "sweep_summary.json"), summary)
    write_json(
        os.path.join(out, "sweep_timings.json"),
        {
            "trials": {str(res["trial"]): res["runtime"] for res in results},
            "total_s": sum(res["runtime"] for res in results),
        },
    )
    manifest = new_manifest("sweep", config, seed, __version__)
    manifest["outputs"] = ["sweep.csv", "cells.csv", "sweep_summary.json"]
    manifest["trial_seeds"] = [p["seed"] for p in payloads]
    write_json(os.path.join(out, "sweep_manifest.json"), manifest)
    slope_txt = "n/a" if slope is None else f"{slope:.3f}"
    print(
        f"trials={len(results)} failures={len(failures)} "
        f"bound_violations={len(violations)} slope={slope_txt}"
    )
    return 0 if summary["pass"] else 1


# ---------------------------------------------------------------------------
# lab suites


def _bundled_chain(n: int, kappa: int, seed: int, scale: float = 1.0) -> HamiltonianModel:
    lattice = LatticeSpec(dimension=1, side_lengths=(n,))
    basis = enumerate_basis(lattice, kappa)
    mu = np.random.default_rng(seed).uniform(-1.0, 1.0, basis.m) * scale
    return HamiltonianModel(basis=basis, mu=mu)


def _ising_chain(n: int, coupling: float, field: float) -> HamiltonianModel:
    """Sparse chain: nearest-neighbour ZZ plus on-site X, nothing else."""
    lattice = LatticeSpec(dimension=1, side_lengths=(n,))
    basis = enumerate_basis(lattice, 2)
    mu = np.zeros(basis.m)
    for i, op in enumerate(basis.ops):
        if op.letters == "ZZ":
            mu[i] = coupling
        elif op.letters == "X":
            mu[i] = field
    return HamiltonianModel(basis=basis, mu=mu)


def _suite_strong_convexity(config: dict, seed: int) -> list[CheckReport]:
    betas = config.get("betas", [0.2, 1.0, 3.0])
    trials = int(config.get("trials", 10))
    reports = []
    for k, (n, inst) in enumerate([(2, 0), (2, 1), (3, 0), (3, 1)]):
        model = _bundled_chain(n, 2, trial_seed(seed, k))
        for beta in betas:
            rep = strong_convexity_probe(model, float(beta), trials, trial_seed(seed, 50 + k))
            rep.grid.update(n=n, instance=inst)
            reports.append(rep)
    return reports


def _suite_infinite_temp(config: dict, seed: int) -> list[CheckReport]:
    betas = config.get("betas", [0.5, 1.0, 2.0])
    n_dirs = int(config.get("directions", 3))
    reports = []
    for k, n in enumerate((2, 3)):
        model = _bundled_chain(n, 2, trial_seed(seed, k))
        rng = np.random.default_rng(trial_seed(seed, 100 + k))
        for beta in betas:
            beta = float(beta)
            v = None
            for _ in range(n_dirs):
                v = DirectionVector.random(model.basis.m, rng).v
                rep = infinite_temp_variance_check(model, beta, v)
                rep.grid.update(n=n)
                reports.append(rep)
            W_t = quasilocal_W(v, model, beta)
            rep = global_to_local_check(W_t, tuple(range(n)), n)
            rep.grid.update(n=n, beta=beta)
            reports.append(rep)
            rep = local_variance_floor(v, model, beta)
            rep.grid.update(n=n)
            reports.append(rep)
    return reports


def _suite_akl(config: dict, seed: int) -> list[CheckReport]:
    fractions = config.get("window_fractions", [0.15, 0.25, 0.35])
    instances = [("dense", _bundled_chain(3, 2, trial_seed(seed, k), 0.5)) for k in range(3)]
    instances += [("sparse", _ising_chain(n, 0.4, 0.3)) for n in (4, 5)]
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    reports = []
    for tag, model in instances:
        energies = diagonalize(assemble_hamiltonian(model)).energies
        width = float(energies[-1] - energies[0])
        X = (model.basis.lattice.n_sites // 2,)
        for frac in fractions:
            x = float(energies[0] + frac * width)
            y = float(energies[-1] - frac * width)
            if y <= x:
                continue
            rep = akl_concentration_check(model, sigma_x, X, x, y)
            rep.grid.update(instance=tag)
            reports.append(rep)
    return reports


def _suite_delta_gamma(config: dict, seed: int) -> list[CheckReport]:
    betas = config.get("betas", [0.5, 2.0])
    model = _bundled_chain(3, 2, trial_seed(seed, 0), 0.7)
    spectral = diagonalize(assemble_hamiltonian(model))
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    observables = {
        "Z0": embed_on_sites(z, (0,), 3),
        "X1": embed_on_sites(x, (1,), 3),
        "Z0Z1": embed_on_sites(np.kron(z, z), (0, 1), 3),
    }
    reports = []
    for beta in betas:
        ensemble = gibbs(spectral, float(beta))
        for name, A in observables.items():
            top = 1.1 * float(np.max(np.abs(np.linalg.eigvalsh(A))))
            rows = []
            min_slack = math.inf
            ok = True
            for gamma in np.linspace(0.0, top, 12):
                try:
                    sc = delta_gamma(A, ensemble, float(gamma))
                except AssertionError as exc:
                    rows.append((name, float(beta), float(gamma), math.nan, math.nan, math.nan))
                    ok = False
                    continue
                rows.append(
                    (name, float(beta), float(gamma), sc.delta_gamma, sc.mean_square, sc.slack)
                )
                min_slack = min(min_slack, sc.slack)
            reports.append(
                CheckReport(
                    check="delta-gamma",
                    passed=ok and min_slack >= -1e-10,
                    min_slack=min_slack,
                    header=("observable", "beta", "gamma", "delta_gamma", "mean_square", "slack"),
                    rows=rows,
                    grid={"observable": name, "beta": float(beta)},
                )
            )
    return reports


def _suite_local_unitary(config: dict, seed: int) -> list[CheckReport]:
    trials = int(config.get("trials", 6))
    model = _bundled_chain(3, 2, trial_seed(seed, 0), 0.7)
    ensemble = gibbs(diagonalize(assemble_hamiltonian(model)), float(config.get("beta", 1.0)))
    z = np.diag([1.0, -1.0])
    observables = {
        "Z0": embed_on_sites(z, (0,), 3),
        "Z1Z2": embed_on_sites(np.kron(z, z), (1, 2), 3),
    }
    reports = []
    for k, (name, A) in enumerate(observables.items()):
        for X in ((0,), (1,)):
            rep = local_unitary_probe(A, ensemble, X, 3, trials, trial_seed(seed, 10 + k))
            rep.grid.update(observable=name)
            reports.append(rep)
    return reports


def _suite_lr_decay(config: dict, seed: int) -> list[CheckReport]:
    times = config.get("times", [0.25, 0.75])
    reports = []
    for n in (5, 6):
        model = _ising_chain(n, 0.5, 0.4)
        targets = [
            op
            for op in model.basis.ops
            if op.support == (n // 2,) and op.letters in ("Z", "X")
        ]
        for t in times:
            for op in targets:
                profile = lieb_robinson_decay(op, model, float(t), range(0, n))
                rows = [
                    (float(t), op.letters, op.support[0], r, norm)
                    for r, norm in zip(profile.radii, profile.norms)
                ]
                passed = profile.nonincreasing and profile.final_norm <= 1e-10
                reports.append(
                    CheckReport(
                        check="lr-decay",
                        passed=passed,
                        min_slack=1e-10 - profile.final_norm,
                        header=("t", "letters", "site", "radius", "truncation_norm"),
                        rows=rows,
                        grid={
                            "n": n,
                            "t": float(t),
                            "decay_rate": profile.a2,
                            "prefactor": profile.a1,
                        },
                    )
                )
    return reports


def _suite_sum_bounds(config: dict, seed: int) -> list[CheckReport]:
    return [verify_sum_bounds(config.get("points"))]


def _suite_lower_bound(config: dict, seed: int) -> list[CheckReport]:
    rng = np.random.default_rng(trial_seed(seed, 0))
    reports = []
    for m in config.get("sizes", [1, 2, 4, 8]):
        for beta in config.get("betas", [0.5, 1.0]):
            for eps in config.get("epsilons", [0.1, 0.5]):
                mu_zero = np.zeros(m)
                raw = np.abs(rng.standard_normal(m))
                norm = float(np.linalg.norm(raw))
                mu_edge = raw * (10.0 * eps / norm) if norm else mu_zero
                for mu in (mu_zero, mu_edge):
                    reports.append(lower_bound_family(m, float(beta), float(eps), mu))
    return reports


def _suite_fourier(config: dict, seed: int) -> list[CheckReport]:
    betas = config.get("betas", [0.5, 1.0, 2.0])
    omegas = np.asarray(
        config.get(
            "omegas",
            np.concatenate([np.linspace(-8.0, 8.0, 33), [1e-9, 1e-6, 1e-3]]),
        ),
        dtype=float,
    )
    reports = []
    for beta in betas:
        pair = verify_fourier_pair(FilterKernel(float(beta)), omegas)
        rows = [
            (float(beta), w, nu, ex, abs(nu - ex))
            for w, nu, ex in zip(pair.omegas, pair.numeric, pair.exact)
        ]
        reports.append(
            CheckReport(
                check="fourier",
                passed=pair.max_abs_error < 1e-4,
                min_slack=1e-4 - pair.max_abs_error,
                header=("beta", "omega", "numeric", "exact", "abs_error"),
                rows=rows,
                grid={
                    "beta": float(beta),
                    "max_abs_error": pair.max_abs_error,
                    "quad_error_estimate": pair.quad_error_estimate,
                },
            )
        )
    return reports


SUITES = {
    "strong-convexity": _suite_strong_convexity,
    "infinite-temp": _suite_infinite_temp,
    "akl": _suite_akl,
    "delta-gamma": _suite_delta_gamma,
    "local-unitary": _suite_local_unitary,
    "lr-decay": _suite_lr_decay,
    "sum-bounds": _suite_sum_bounds,
    "lower-bound": _suite_lower_bound,
    "fourier": _suite_fourier,
}


def cmd_lab(suite: str | None, config: dict, seed: int, out: str) -> int:
    suite = suite or config.get("suite")
    if suite not in SUITES:
        raise CLIError(
            f"unknown suite {suite!r}; available suites: {', '.join(sorted(SUITES))}"
        )
    reports = SUITES[suite](config, seed)
    outputs = []
    for i, rep in enumerate(reports):
        stem = f"{suite}_{i:02d}"
        write_csv(os.path.join(out, stem + ".csv"), rep.header, rep.rows)
        write_json(os.path.join(out, stem + ".json"), rep.summary_dict())
        outputs.extend([stem + ".csv", stem + ".json"])
    all_pass = all(rep.passed for rep in reports)
    write_json(
        os.path.join(out, f"{suite}_suite.json"),
        {
            "suite": suite,
            "pass": all_pass,
            "n_checks": len(reports),
            "reports": [rep.summary_dict() for rep in reports],
        },
    )
    manifest = new_manifest("lab", {**config, "suite": suite}, seed, __version__)
    manifest["outputs"] = outputs + [f"{suite}_suite.json"]
    write_json(os.path.join(out, "lab_manifest.json"), manifest)
    print(f"suite={suite} checks={len(reports)} pass={all_pass}")
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# hessian / marginals dumps


def _load_model_config(config: dict, command: str) -> tuple[HamiltonianModel, float]:
    offenders = _require_fields(
        config,
        command,
        {
            "model": (True, lambda v: isinstance(v, str), "path to a model JSON"),
            "beta": (True, lambda v: isinstance(v, (int, float)) and v > 0, "float > 0"),
        },
    )
    _fail_fields(command, offenders)
    try:
        model = load_model(config["model"])
    except FileNotFoundError:
        raise CLIError(f"model file not found: {config['model']}")
    _check_dense_cap(model.basis.lattice.n_sites)
    return model, float(config["beta"])


def cmd_hessian(config: dict, seed: int, out: str) -> int:
    model, beta = _load_model_config(config, "hessian")
    report = hessian_logZ(model, beta)
    rows = [
        (j, k, report.matrix[j, k])
        for j in range(model.basis.m)
        for k in range(model.basis.m)
    ]
    write_csv(os.path.join(out, "hessian.csv"), ("row", "col", "value"), rows)
    write_json(
        os.path.join(out, "hessian.json"),
        {
            "beta": report.beta,
            "m": model.basis.m,
            "min_eigenvalue": report.min_eigenvalue,
            "asymmetry": report.asymmetry,
        },
    )
    manifest = new_manifest("hessian", config, seed, __version__)
    manifest["outputs"] = ["hessian.csv", "hessian.json"]
    write_json(os.path.join(out, "hessian_manifest.json"), manifest)
    print(f"m={model.basis.m} min_eigenvalue={report.min_eigenvalue:.6g}")
    return 0


def cmd_marginals(config: dict, seed: int, out: str) -> int:
    model, beta = _load_model_config(config, "marginals")
    ensemble = gibbs(diagonalize(assemble_hamiltonian(model)), beta)
    values = marginals(basis_stack(model.basis), ensemble)
    write_csv(
        os.path.join(out, "marginals.csv"),
        ("l", "value"),
        list(zip(range(model.basis.m), values)),
    )
    write_json(
        os.path.join(out, "marginals.json"),
        {"beta": beta, "m": model.basis.m, "log_Z": log_partition(model, beta)},
    )
    manifest = new_manifest("marginals", config, seed, __version__)
    manifest["outputs"] = ["marginals.csv", "marginals.json"]
    write_json(os.path.join(out, "marginals_manifest.json"), manifest)
    print(f"m={model.basis.m} beta={beta:g}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbslearn",
        description=(
            "Generate local Hamiltonian instances, simulate Gibbs-state "
            "measurement, fit coefficients by convex duality, and run "
            "structural numerical checks."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="config or manifest JSON")
        p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
        p.add_argument("--out", default="out", help="output directory (created if missing)")

    common(sub.add_parser("gen", help="write a model instance from a config"))
    p_learn = sub.add_parser("learn", help="measure a Gibbs state and fit coefficients")
    common(p_learn)
    p_learn.add_argument("--scheme", choices=SCHEMES, help="override the config scheme")
    p_sweep = sub.add_parser("sweep", help="scan N, beta, or size over seeded trials")
    common(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel trial processes")
    p_lab = sub.add_parser("lab", help="run one structural check suite")
    p_lab.add_argument("suite", nargs="?", help=f"one of: {', '.join(sorted(SUITES))}")
    common(p_lab, config_required=False)
    common(sub.add_parser("hessian", help="dump the exact log-partition Hessian"))
    common(sub.add_parser("marginals", help="dump exact marginals of a stored model"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.seed < 0 or args.seed >= 2**64:
            raise CLIError("--seed must fit in an unsigned 64-bit integer")
        if args.config is not None:
            config, seed = _load_config(args.config, args.command, args.seed)
        else:
            config, seed = {}, args.seed
        os.makedirs(args.out, exist_ok=True)
        if args.command == "gen":
            return cmd_gen(config, seed, args.out)
        if args.command == "learn":
            return cmd_learn(config, seed, args.out, args.scheme)
        if args.command == "sweep":
            if args.jobs < 1:
                raise CLIError("--jobs must be at least 1")
            return cmd_sweep(config, seed, args.out, args.jobs)
        if args.command == "lab":
            return cmd_lab(args.suite, config, seed, args.out)
        if args.command == "hessian":
            return cmd_hessian(config, seed, args.out)
        return cmd_marginals(config, seed, args.out)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
