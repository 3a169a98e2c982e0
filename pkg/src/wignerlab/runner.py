"""Named scenarios assembled into report documents with built-in checks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import scenarios as sc
from .meas import DEFAULT_SEED, FriendPolicy
from .qcore import basis_state, fidelity, maximally_mixed, DensityOperator
from .reports import ReportDocument, check


@dataclass(frozen=True)
class RunOptions:
    """Every scenario parameter reachable from the command line; None means default."""

    seed: int = DEFAULT_SEED
    policy: FriendPolicy | None = None
    phis: tuple[float, ...] | None = None
    m: tuple[int, ...] | None = None
    leak: float | None = None
    grid_deg: float | None = None
    agents: tuple[str, ...] | None = None
    alpha: float | None = None
    budget: float = 60.0


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# scenario builders


def build_fr(opts: RunOptions) -> ReportDocument:
    policy = opts.policy or FriendPolicy.PREMEASURE
    r, secs = _timed(sc.run_fr, policy, opts.seed)
    derived = {
        "p_ok_okbar": r.p_ok_okbar,
        "p_wg_minus": r.p_wg_minus,
        "p_ok_given_okbar": r.p_ok_given_okbar,
        "p_T_and_ok": r.p_T_and_ok,
    }
    total = sum(r.joint.values())
    drift = max(abs(r.joint[k] - r.joint_direct.get(k, 0.0)) for k in r.joint)
    checks = [
        check("joint table sums to 1", total, 1.0, 1e-12),
        check("sequential and joint readout agree", drift, 0.0, 1e-12),
        check("P(ok, okbar) = P(okbar) P(ok|okbar)", r.p_ok_okbar, r.p_wg_minus * r.p_ok_given_okbar, 1e-12),
        check("P(T, s in |->) before the Wigners", r.p_T_and_ok, 0.0, 1e-12),
    ]
    tables = {"joint": r.rows()}
    if policy is FriendPolicy.PREMEASURE:
        checks += [
            check("P(W_g=okbar, W_s=ok)", r.p_ok_okbar, 1 / 12, 1e-9),
            check("P(W_g=okbar)", r.p_wg_minus, 1 / 6, 1e-9),
            check("P(W_s=ok | W_g=okbar)", r.p_ok_given_okbar, 0.5, 1e-9),
        ]
    else:
        derived["p_ok_given_T"] = r.p_ok_given_T
        checks += [
            check("P(W_g=okbar)", r.p_wg_minus, 0.5, 1e-9),
            check("P(W_s=ok | F_g holds T)", r.p_ok_given_T, 0.5, 1e-9),
        ]
        rows = []
        for phi, dist in r.symmetric_lab.items():
            rows.append({"phi": phi, "p_plus": dist["+"], "p_minus": dist["-"]})
            checks.append(check(f"decohered lab |+;{phi:.4f}> is random", dist["+"], 0.5, 1e-12))
        tables["symmetric_lab"] = rows
    return ReportDocument(
        "fr",
        parameters={"policy": policy},
        tables=tables,
        derived_quantities=derived,
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": secs},
    )


GHZ_PERFECT = (((0.0, 0.0, 0.0), 1.0),
               ((0.0, math.pi / 2, math.pi / 2), -1.0),
               ((math.pi / 2, math.pi / 2, 0.0), -1.0),
               ((math.pi / 2, 0.0, math.pi / 2), -1.0))


def build_ghz(opts: RunOptions) -> ReportDocument:
    phis = tuple(opts.phis) if opts.phis else (0.0, math.pi / 2, math.pi / 2)
    if len(phis) != 3:
        raise ValueError("ghz takes exactly three angles")
    agents = tuple(sc.Agent(a) for a in (opts.agents or ("wigner",) * 3))
    t0 = time.perf_counter()
    settings = sc.GHZSettings(phis, agents)
    dist = sc.ghz_distribution(settings)
    e = sc.run_ghz_correlation(settings)
    reference = sc.ghz_distribution(sc.GHZSettings(phis, (sc.Agent.WIGNER,) * 3))
    drift = max(abs(dist.get(k, 0.0) - reference.get(k, 0.0)) for k in set(dist) | set(reference))
    checks = [
        check("E = cos(phi1 + phi2 + phi3)", e, math.cos(sum(phis)), 1e-12),
        check("distribution equals the all-Wigner one", drift, 0.0, 1e-12),
    ]
    perfect = []
    for angles, target in GHZ_PERFECT:
        value = sc.run_ghz_correlation(sc.GHZSettings(angles, agents))
        perfect.append({"phi1": angles[0], "phi2": angles[1], "phi3": angles[2], "E": value})
        checks.append(check(f"E{tuple(round(a, 4) for a in angles)}", value, target, 1e-12))
    rows = [{"r": k[0], "s": k[1], "t": k[2], "probability": p} for k, p in dist.items()]
    return ReportDocument(
        "ghz",
        parameters={"phis": phis, "agents": [a.value for a in agents]},
        tables={"distribution": rows, "perfect_correlations": perfect},
        derived_quantities={"correlation": e},
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0},
    )


def build_counterfactual(opts: RunOptions) -> ReportDocument:
    t0 = time.perf_counter()
    found = sc.counterfactual_search(sc.GHZ_CONSTRAINTS)
    checks = [check("assignments meeting all four constraints", len(found), 0, 0)]
    drops = []
    for n, (mask, target) in enumerate(sc.GHZ_CONSTRAINTS):
        rest = sc.GHZ_CONSTRAINTS[:n] + sc.GHZ_CONSTRAINTS[n + 1 :]
        count = len(sc.counterfactual_search(rest))
        drops.append({"dropped": f"{mask}={target:+d}", "count": count})
        checks.append(check(f"dropping {mask}={target:+d} leaves solutions", count, 1, 0, ">="))
    checks.append(check("dropping www=+1 leaves 8", drops[0]["count"], 8, 0))
    checks.append(check("www=+1 alone", len(sc.counterfactual_search([("www", 1)])), 32, 0))
    return ReportDocument(
        "counterfactual",
        parameters={"constraints": [f"{m}={t:+d}" for m, t in sc.GHZ_CONSTRAINTS]},
        tables={"assignments": [vars(a) for a in sorted(found)], "drop_one": drops},
        derived_quantities={"count": len(found)},
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0},
    )


def build_brukner(opts: RunOptions) -> ReportDocument:
    policy = opts.policy or FriendPolicy.PREMEASURE
    grid = opts.grid_deg if opts.grid_deg is not None else (10.0 if policy is FriendPolicy.FULL else None)
    r, secs = _timed(sc.run_brukner_chsh, policy, sc.CHSH_ANGLES, grid)
    target = 2 * math.sqrt(2) if policy is FriendPolicy.PREMEASURE else math.sqrt(2)
    checks = [check("S at the standard angles", r.S, target, 1e-9)]
    if policy is FriendPolicy.PREMEASURE:
        checks.append(check("S above the classical bound 2", r.S, 2.0, 0.0, ">="))
    derived = {"S": r.S}
    if r.grid_max is not None:
        derived["grid_max"] = r.grid_max
        if policy is FriendPolicy.FULL:
            checks.append(check(f"max S over the {grid:g} degree grid", r.grid_max, 2.0, 1e-9, "<="))
    rows = [{"a": a, "b": b, "E": v} for (a, b), v in r.correlators.items()]
    return ReportDocument(
        "brukner",
        parameters={"policy": policy, "angles": r.angles, "grid_deg": grid},
        tables={"correlators": rows},
        derived_quantities=derived,
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": secs},
    )


def build_eraser(opts: RunOptions) -> ReportDocument:
    phi = opts.phis[0] if opts.phis else 0.0
    t0 = time.perf_counter()
    on = sc.run_eraser(phi, True)
    off = sc.run_eraser(phi, False)
    marked = sc.run_eraser(phi, True, which_path=True)
    rows = [
        {"phi": x, "p_filter_on": a, "p_filter_off": b, "p_which_path": c}
        for x, a, b, c in zip(on.phis, on.sweep, off.sweep, marked.sweep)
    ]
    checks = [
        check("visibility, filter on", on.visibility, 1.0, 1e-12),
        check("visibility, filter off", off.visibility, 0.0, 1e-12),
        check("visibility with a which-path record", marked.visibility, 0.0, 1e-12),
        check("p_detector1 filter on = (1 + sin phi)/4", on.p_detector1, (1 + math.sin(phi)) / 4, 1e-12),
        check("p_detector1 filter off", off.p_detector1, 0.5, 1e-12),
    ]
    return ReportDocument(
        "eraser",
        parameters={"phi": phi, "points": len(on.phis)},
        tables={"sweep": rows},
        derived_quantities={
            "p_detector1_filter_on": on.p_detector1,
            "p_detector1_filter_off": off.p_detector1,
            "visibility_filter_on": on.visibility,
            "visibility_filter_off": off.visibility,
            "visibility_which_path": marked.visibility,
        },
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0},
        sweep="sweep",
    )


def _cut_sweep(name: str, ms, leak: float) -> tuple[list, list, list]:
    rows, results, checks = [], [], []
    for m in ms:
        res = sc.run_cut_scaling(sc.CutScalingConfig(m, leak))
        results.append(res)
        rows.append({"m": m, "p": leak, "visibility": res.visibility, "seconds": res.seconds})
        if leak == 0 or m == 0:
            checks.append(check(f"m={m}: visibility", res.visibility, 1.0, 1e-12))
        else:
            checks.append(check(f"m={m}: visibility = (1-p)^m", res.visibility, (1 - leak) ** m, 1e-10))
    rise = max((b.visibility - a.visibility for a, b in zip(results, results[1:])), default=0.0)
    checks.append(check("visibility non-increasing in m", rise, 0.0, 1e-12, "<="))
    return rows, results, checks


def build_cut_scaling(opts: RunOptions) -> ReportDocument:
    ms = tuple(opts.m) if opts.m else tuple(range(1, 13))
    leak = 0.1 if opts.leak is None else opts.leak
    t0 = time.perf_counter()
    rows, results, checks = _cut_sweep("cut-scaling", ms, leak)
    below = [r.m for r in results if r.visibility < 0.5]
    return ReportDocument(
        "cut-scaling",
        parameters={"m": ms, "p": leak, "threshold": 0.5},
        tables={"sweep": rows},
        derived_quantities={"m_threshold": below[0] if below else None},
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0},
        sweep="sweep",
    )


def build_bench(opts: RunOptions) -> ReportDocument:
    """Wall clock per m; the largest m must finish within the budget."""
    ms = tuple(opts.m) if opts.m else tuple(range(2, 21, 2))
    leak = 0.0 if opts.leak is None else opts.leak
    t0 = time.perf_counter()
    rows, results, checks = _cut_sweep("bench", ms, leak)
    last = results[-1]
    checks.append(check(f"m={last.m} run within budget (s)", last.seconds, opts.budget, 0.0, "<="))
    return ReportDocument(
        "bench",
        parameters={"m": ms, "p": leak, "budget": opts.budget},
        tables={"sweep": rows},
        derived_quantities={},
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0, "per_m": {r.m: r.seconds for r in results}},
        sweep="sweep",
    )


def build_sealed_lab(opts: RunOptions) -> ReportDocument:
    alpha = math.pi / 6 if opts.alpha is None else opts.alpha
    phi = opts.phis[0] if opts.phis else math.pi / 4
    t0 = time.perf_counter()
    pol = sc.SL_POL
    inputs = {"h": basis_state([pol], [0]).density(), "mixed": maximally_mixed([pol])}
    pure = {"h": basis_state([pol], [0]), "v": basis_state([pol], [1])}
    rows, checks = [], []
    for name, rho in inputs.items():
        rep = sc.run_sealed_lab(sc.SealedLabSetting(alpha, phi, rho))
        row = {"input": name}
        row.update({f"p_{x}": rep.exits[x] for x in sc.EXITS})
        rows.append(row)
        for exit_name in ("h", "v"):
            m = rep.exit_polarization[exit_name]
            if m is not None:
                f = fidelity(DensityOperator((pol,), m), pure[exit_name])
                checks.append(check(f"{name} input: exit {exit_name} carries pure {exit_name}", f, 1.0, 1e-12))
    mixed, h = rows[1], rows[0]
    checks += [
        check("mixed input: P(exit h)", mixed["p_h"], 0.5, 1e-12),
        check("mixed input: P(exit v)", mixed["p_v"], 0.5, 1e-12),
        check("h input: P(exit h) = cos^2 alpha", h["p_h"], math.cos(alpha) ** 2, 1e-12),
        check("no photon leaves unmeasured", h["p_no-measurement"] + mixed["p_no-measurement"], 0.0, 1e-12),
    ]
    return ReportDocument(
        "sealed-lab",
        parameters={"alpha": alpha, "phi": phi},
        tables={"exits": rows},
        derived_quantities={},
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0},
    )


def build_concordant(opts: RunOptions) -> ReportDocument:
    t0 = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    cases = [(1 / math.sqrt(2), 1 / math.sqrt(2)), (1.0, 0.0)]
    for _ in range(5):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z /= np.linalg.norm(z)
        cases.append((complex(z[0]), complex(z[1])))
    rows, checks = [], []
    for n, (a, b) in enumerate(cases):
        r = sc.run_concordant_wigner(a, b, opts.seed)
        rows.append({"alpha": complex(a), "beta": complex(b), "agreement": r.agreement})
        checks.append(check(f"case {n}: Wigner confirms the Friend", r.agreement, 1.0, 1e-12))
    both_h = sc.run_concordant_wigner(1.0, 0.0, opts.seed).joint.get(("H", "H"), 0.0)
    checks.append(check("alpha = 1: both report H", both_h, 1.0, 1e-12))
    return ReportDocument(
        "concordant",
        parameters={"cases": len(cases)},
        tables={"agreement": rows},
        derived_quantities={"agreement": rows[0]["agreement"]},
        assertions=checks,
        seed=opts.seed,
        timings={"seconds": time.perf_counter() - t0},
    )


SCENARIOS: dict[str, Callable[[RunOptions], ReportDocument]] = {
    "fr": build_fr,
    "ghz": build_ghz,
    "counterfactual": build_counterfactual,
    "brukner": build_brukner,
    "eraser": build_eraser,
    "cut-scaling": build_cut_scaling,
    "sealed-lab": build_sealed_lab,
    "concordant": build_concordant,
}


def run_scenario(name: str, opts: RunOptions | None = None) -> ReportDocument:
    try:
        builder = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None
    return builder(opts or RunOptions())
