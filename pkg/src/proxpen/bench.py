"""Solve, verify and benchmark simplex QP instances.

These are the in-process counterparts of the ``proxpen`` subcommands.  A run
record is a plain dict (JSON-ready); the solution file adds the vectors.
"""

from __future__ import annotations

import csv
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .aipp import AippConfig, aipp, refine
from .baseline import CgConfig, pg_step, run_pg
from .instances import LinConstrQpInstance, SimplexQpInstance, gen_simplex_qp
from .io import RECORD_SCHEMA_VERSION
from .penalty import PenaltyConfig, build_penalty, qp_aipp, tolerance_map

__all__ = ["METHODS", "solve", "check", "bench_rows", "normal_cone_violation",
           "write_bench_csv"]

METHODS = ("aipp", "pg", "qp-aipp")


def _instance_info(inst: SimplexQpInstance, path=None) -> dict:
    info = {"kind": "linconstr_qp" if isinstance(inst, LinConstrQpInstance) else "simplex_qp",
            "l": inst.l, "n": inst.n, "M": inst.M, "m": inst.m, "seed": inst.seed}
    if isinstance(inst, LinConstrQpInstance):
        info["l_eq"] = inst.l_eq
    if path is not None:
        info["path"] = str(path)
    return info


def solve(inst: SimplexQpInstance, method: str, rho_bar: float = 1e-7,
          sigma: float = 0.3, lam=None, rho_hat: float = 1e-3, eta_hat: float = 1e-3,
          acg_mode: str = "practical", z0=None, path=None, trace=None):
    """Run one method on an instance; return ``(record, solution)``.

    For ``aipp`` and ``pg`` the stop test is
    ``|v| / (|grad g(z0)| + 1) <= rho_bar`` with ``z0`` the simplex centroid
    unless given.  The ``aipp`` pair reported is the refined one.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    z0 = inst.centroid() if z0 is None else np.asarray(z0, dtype=float)
    config = {"sigma": sigma, "acg_mode": acg_mode}
    sol = {"z0": z0.tolist()}
    t0 = time.perf_counter()

    if method == "qp-aipp":
        if not isinstance(inst, LinConstrQpInstance):
            raise ValueError("qp-aipp needs an instance with an equality system")
        cp = inst.constrained_problem()
        config.update(rho_hat=rho_hat, eta_hat=eta_hat, lam=1.0 / (2.0 * inst.m))
        triple, st = qp_aipp(cp, z0, PenaltyConfig(rho_hat, eta_hat, sigma=sigma,
                                                   acg_mode=acg_mode))
        z, v = triple.z, triple.v
        norm_v = float(np.linalg.norm(v))
        feas = cp.feasibility(z)
        rec_extra = {"criterion": norm_v, "tolerance": rho_hat,
                     "feasibility": feas, "feasibility_tolerance": eta_hat,
                     "c_schedule": st["c"], "inner_per_loop": st["inner"]}
        iters = {"inner": int(sum(st["inner"])), "outer": int(sum(st["outer"])),
                 "loops": st["loops"], "projections_per_iteration": 1}
        objective = cp.f.value(z)
        sol.update(p=triple.p.tolist(), c_final=st["c_final"], norm_sq=st["norm_sq"],
                   z_pre=st["z_pre"].tolist())
        ok = norm_v <= rho_hat and feas <= eta_hat
    else:
        problem = inst.problem()
        g = problem.smooth
        scale = float(np.linalg.norm(g.grad(z0))) + 1.0
        tol = rho_bar * scale
        if method == "pg":
            lam = 0.99 / inst.M if lam is None else lam
            z, v, st = run_pg(problem, z0, CgConfig(lam=lam, rho_bar=rho_bar), trace=trace)
            iters = {"inner": st["iterations"], "outer": st["iterations"],
                     "projections_per_iteration": 1, "projections": st["iterations"]}
            z_pre = st["z_prev"]
        else:
            lam = 0.9 / inst.m if lam is None else lam
            rb, eb = tolerance_map(tol, inst.m, inst.M)
            if lam * inst.m > 0.5:
                # keeps |v_g| <= tol when 1/lam < 2m
                eb = tol ** 2 / (32.0 * (inst.M + 1.0 / lam))
            checks = 0

            def stop(x):
                nonlocal checks
                checks += 1
                return np.linalg.norm(refine(problem, lam, x).v_g) <= tol

            if stop(z0):
                z_pre, iters = z0, {"inner": 0, "outer": 0}
            else:
                psol, st = aipp(problem, z0, AippConfig(lam=lam, rho_bar=rb, eps_bar=eb,
                                                        sigma=sigma, acg_mode=acg_mode),
                                stop=stop, trace=trace)
                z_pre, iters = psol.z, {"inner": st["inner"], "outer": st["outer"]}
            # each stopping test costs one extra projection
            iters["stop_checks"] = checks
            iters["projections_per_iteration"] = 1
            iters["projections"] = iters["inner"] + checks
            ref = refine(problem, lam, z_pre)
            z, v = ref.z_g, ref.v_g
        config.update(lam=lam, rho_bar=rho_bar)
        sol["z_pre"] = np.asarray(z_pre).tolist()
        crit = float(np.linalg.norm(v)) / scale
        rec_extra = {"criterion": crit, "tolerance": rho_bar}
        objective = g.value(z)
        ok = crit <= rho_bar

    record = {
        "schema_version": RECORD_SCHEMA_VERSION,
        "method": method,
        "instance": _instance_info(inst, path),
        "config": config,
        "iterations": iters,
        "objective": float(objective),
        **rec_extra,
        "wall_time": time.perf_counter() - t0,
        "status": "SUCCESS" if ok else "TOLERANCE_NOT_REACHED",
    }
    sol.update(z=z.tolist(), v=v.tolist())
    return record, sol


def normal_cone_violation(s, z) -> float:
    """``max_i s_i - <s, z>``; nonpositive iff ``s`` is normal to the simplex at ``z``."""
    s = np.asarray(s, dtype=float)
    return float(np.max(s) - s @ np.asarray(z, dtype=float))


def _reconstruct(inst, record, solution):
    """Rebuild ``(z, v)`` from the stored pre-step point."""
    method, lam = record["method"], record["config"]["lam"]
    z_pre = np.asarray(solution["z_pre"], dtype=float)
    if method == "pg":
        problem = inst.problem()
        g = problem.smooth
        z = pg_step(problem, lam, z_pre)
        return z, (z_pre - z) / lam + g.grad(z) - g.grad(z_pre)
    if method == "qp-aipp":
        problem = build_penalty(inst.constrained_problem(), float(solution["c_final"]),
                                float(solution["norm_sq"]))
    else:
        problem = inst.problem()
    ref = refine(problem, lam, z_pre)
    return ref.z_g, ref.v_g


def check(inst: SimplexQpInstance, record: dict, solution: dict) -> dict:
    """Recompute every acceptance condition of a stored solution.

    Returns ``{condition: {"value": ..., "limit": ..., "pass": bool}}`` plus
    an overall ``"pass"`` flag.
    """
    z = np.asarray(solution["z"], dtype=float)
    v = np.asarray(solution["v"], dtype=float)
    z0 = np.asarray(solution.get("z0", inst.centroid()), dtype=float)
    g = inst.oracle()
    grad = g.grad(z)
    report = {}

    def cond(name, value, limit):
        report[name] = {"value": float(value), "limit": float(limit),
                        "pass": bool(value <= limit)}

    dom = max(0.0, -float(z.min()), abs(float(z.sum()) - 1.0))
    cond("domain", dom, 1e-9)
    z_rec, v_rec = _reconstruct(inst, record, solution)
    cond("reconstruction", max(np.linalg.norm(z_rec - z) / (1.0 + np.linalg.norm(z)),
                               np.linalg.norm(v_rec - v) / (1.0 + np.linalg.norm(v))), 1e-9)
    s = v - grad
    if record["method"] == "qp-aipp":
        p = np.asarray(solution["p"], dtype=float)
        r = inst.A_eq @ z - inst.b_eq
        s = s - inst.A_eq.T @ p
        tol_v = record["config"]["rho_hat"]
        cond("norm_v", np.linalg.norm(v), tol_v)
        cond("feasibility", np.linalg.norm(r), record["config"]["eta_hat"])
        c = float(solution["c_final"])
        cond("multiplier", np.linalg.norm(p - c * r), 1e-12 * (1.0 + np.linalg.norm(p)))
    else:
        scale = float(np.linalg.norm(g.grad(z0))) + 1.0
        cond("relative_criterion", np.linalg.norm(v) / scale, record["config"]["rho_bar"])
    cond("inclusion", normal_cone_violation(s, z),
         1e-9 * (1.0 + np.abs(s).max() + np.abs(grad).max()))
    report["pass"] = all(c["pass"] for c in report.values())
    return report


def _cell(args):
    M, m, seed, l, n, methods, rho_bar, sigma = args
    inst = gen_simplex_qp(l, n, M, m, seed)
    out = {}
    for meth in methods:
        rec, _ = solve(inst, meth, rho_bar=rho_bar, sigma=sigma)
        out[meth] = (rec["iterations"]["inner"], rec["objective"], rec["status"])
    return out


def bench_rows(grid, methods=("pg", "aipp"), seeds=(1, 2, 3), l=10, n=50,
               rho_bar=1e-5, sigma=0.3, workers=None):
    """Median iteration counts per ``(M, m)`` row.

    Each row has ``M, m, gbar`` (median final objective), one count per
    method, ``gbar_spread`` (largest relative gap between methods' objective
    medians) and ``winner``.  Rows follow the grid order.
    """
    if workers is None:
        workers = int(os.environ.get("PROXPEN_THREADS", "1"))
    cells = [(float(M), float(m), int(s), l, n, tuple(methods), rho_bar, sigma)
             for M, m in grid for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    rows = []
    k = len(seeds)
    for i, (M, m) in enumerate(grid):
        chunk = results[i * k:(i + 1) * k]
        row = {"M": M, "m": m}
        objs = {meth: statistics.median(r[meth][1] for r in chunk) for meth in methods}
        row["gbar"] = statistics.median(r[meth][1] for r in chunk for meth in methods)
        for meth in methods:
            row[meth] = statistics.median(r[meth][0] for r in chunk)
        vals = list(objs.values())
        ref = max(abs(x) for x in vals) or 1.0
        row["gbar_spread"] = (max(vals) - min(vals)) / ref
        row["winner"] = min(methods, key=lambda meth: row[meth])
        row["all_success"] = all(r[meth][2] == "SUCCESS" for r in chunk for meth in methods)
        rows.append(row)
    return rows


def write_bench_csv(rows, stream, methods):
    fields = ["M", "m", "gbar", *methods, "winner", "gbar_spread", "all_success"]
    w = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(row[k]) if isinstance(row[k], float) else row[k]) for k in fields})
