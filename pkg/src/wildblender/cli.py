"""Command line front end: ``wildblender <subcommand> [flags]``.

Every subcommand writes ``summary.json`` (canonical, no timestamps), one CSV
per table and a ``meta.json`` sidecar with timing.  Exit status is 0 when all
checks pass, 1 when a check fails (named on stderr) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .bridges import bridge_interval
from .chain import Schedule, build_chain, check_record, lemma_bounds
from .errors import WildBlenderError
from .eras import era_sequence
from .folding import curve_consistency, image_curves, verify_folding
from .model import ModelParams, validate_params
from .numerics import BigFloat, as_rat, rat_str
from .perturb import BumpSpec, choose_L, norm_bound, perturbation_schedule, series_value
from .stats import (CoordX, birkhoff_run, historic_targets, near_targets, to_fraction,
                    verify_historic, verify_physical)
from .wander import (build_box_seq, find_k1, historic_k1, orbit_equivalence,
                     verify_wandering)

SUBCOMMANDS = ("validate", "bridges", "chain", "perturb", "wander", "birkhoff",
               "physical", "folding", "all")
CONFIG_SCHEMA = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config

@dataclass
class RunConfig:
    params: ModelParams
    schedule: str = "physical"
    K: int = 10
    wander_K: int = 40
    blocks: int = 5
    eras: int = 4
    k1: int | None = None
    precision: int = 64
    workers: int = 1
    x0: Fraction = Fraction(3, 4)
    rho: Fraction = Fraction(1, 10)
    bridge_levels: int = 10
    eps: tuple = (Fraction(1), Fraction(1, 100), Fraction(1, 10 ** 6))
    exact_step_budget: int = 20000
    out: Path = Path("out")

    @property
    def mode(self) -> str:
        return "exact" if self.precision == 0 else f"bigfloat:{self.precision}"

    def to_json(self) -> dict:
        return {"schema": CONFIG_SCHEMA, "params": self.params.to_json()["params"],
                "schedule": self.schedule, "K": self.K, "wander_K": self.wander_K,
                "blocks": self.blocks, "eras": self.eras, "k1": self.k1,
                "precision": self.precision, "workers": self.workers,
                "x0": rat_str(self.x0), "rho": rat_str(self.rho),
                "bridge_levels": self.bridge_levels, "eps": [rat_str(e) for e in self.eps],
                "exact_step_budget": self.exact_step_budget}


def default_config_text() -> str:
    return resources.files("wildblender").joinpath("data/reference.json").read_text()


def load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(default_config_text())
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file {path} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc


_INT_KEYS = ("K", "wander_K", "blocks", "eras", "k1", "precision", "workers",
             "bridge_levels", "exact_step_budget")


def make_config(args) -> RunConfig:
    data = load_config(args.config)
    if data.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
        raise UsageError(f"unsupported config schema {data.get('schema')}")
    unknown = set(data) - {"schema", "params", "schedule", "x0", "rho", "eps", *_INT_KEYS}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    try:
        params = ModelParams.from_json(data.get("params", {}))
        kw = {k: data[k] for k in _INT_KEYS if k in data}
        for key in ("x0", "rho"):
            if key in data:
                kw[key] = as_rat(data[key])
        if "eps" in data:
            kw["eps"] = tuple(as_rat(e) for e in data["eps"])
        if "schedule" in data:
            kw["schedule"] = data["schedule"]
        for key in _INT_KEYS + ("schedule",):
            val = getattr(args, key, None)
            if val is not None:
                kw[key] = val
        for key in ("x0", "rho"):
            val = getattr(args, key, None)
            if val is not None:
                kw[key] = as_rat(val)
    except (WildBlenderError, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    cfg = RunConfig(params=params, out=Path(args.out), **kw)
    if cfg.precision != 0 and cfg.precision < 53:
        raise UsageError("--precision must be 0 (exact) or at least 53 bits")
    if cfg.workers < 1 or cfg.K < 1 or cfg.blocks < 1 or cfg.eras < 1:
        raise UsageError("K, blocks, eras and workers must be positive")
    try:
        Schedule.parse(cfg.schedule, k1=cfg.k1 or 1)
    except (WildBlenderError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return cfg


# ---------------------------------------------------------------- results

@dataclass
class Result:
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def check(self, name: str, ok: bool):
        self.summary.setdefault("checks", {})[name] = bool(ok)
        if not ok:
            self.failures.append(name)


def _enc(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (Fraction, int)):
        return rat_str(v) if isinstance(v, Fraction) else v
    if isinstance(v, dict):
        return {k: _enc(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_enc(x) for x in v]
    return v


def write_outputs(out: Path, name: str, res: Result, cfg: RunConfig, seconds: float):
    out.mkdir(parents=True, exist_ok=True)
    summary = {"subcommand": name, "passed": not res.failures, "failures": res.failures,
               "config": cfg.to_json(), **_enc(res.summary)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for table, (header, rows) in res.tables.items():
        with open(out / f"{table}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_enc(c) if not isinstance(c, (list, dict)) else json.dumps(_enc(c))
                            for c in row])
    meta = {"subcommand": name, "seconds": round(seconds, 3), "version": __version__,
            "argv": sys.argv[1:]}
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- subcommands

def run_validate(cfg: RunConfig) -> Result:
    res = Result()
    rep = validate_params(cfg.params)
    rows = [[c.name, c.relation, _enc(c.lhs), _enc(c.rhs), c.passed, "exact"]
            for c in rep.constraints]
    res.tables["validate"] = (["constraint", "relation", "lhs", "rhs", "passed", "mode"], rows)
    for c in rep.constraints:
        res.check(f"validate:{c.name}", c.passed)
    return res


def run_bridges(cfg: RunConfig) -> Result:
    p = cfg.params
    res = Result()
    rows = []
    all_disjoint = all_widths = True
    for n in range(1, cfg.bridge_levels + 1):
        ivs = [(format(i, f"0{n}b"), bridge_interval(p, format(i, f"0{n}b"))) for i in range(2 ** n)]
        width = p.lambda_u ** -n
        ivs.sort(key=lambda t: t[1].lo)
        disjoint = all(a.hi < b.lo for (_, a), (_, b) in zip(ivs, ivs[1:]))
        widths = all(iv.width == width for _, iv in ivs)
        all_disjoint &= disjoint
        all_widths &= widths
        rows.append([n, 2 ** n, width, disjoint, widths, "exact"])
    res.tables["bridges"] = (["n", "count", "width", "pairwise_disjoint", "widths_exact", "mode"], rows)
    res.check("bridges:pairwise_disjoint", all_disjoint)
    res.check("bridges:widths", all_widths)
    return res


def _schedule(cfg: RunConfig) -> Schedule:
    return Schedule.parse(cfg.schedule, k1=cfg.k1)


def run_chain(cfg: RunConfig) -> Result:
    p = cfg.params
    res = Result()
    chain = build_chain(p, _schedule(cfg), cfg.K, majority_from=None)
    n0, n1 = lemma_bounds(p)
    c0, c1 = lemma_bounds(p, contraction="lambda_cs1")
    rows = []
    agg = {}
    for rec in chain:
        ch = check_record(p, rec)
        ch["m_bound"] = rec.m <= n0 + n1 * rec.k
        ch["m_bound_lambda_cs1"] = rec.m <= c0 + c1 * rec.k
        for key, ok in ch.items():
            agg[key] = agg.get(key, True) and ok
        w = rec.w_hat
        rows.append([rec.k, rec.n_hat, len(rec.w_bar), len(rec.u), len(rec.alpha), rec.m,
                     w.zeros, w.ones, rec.t_next, *[ch[k] for k in sorted(ch)], "exact"])
    names = sorted(agg)
    res.tables["chain"] = (["k", "n_hat", "w_bar_len", "v_free_len", "alpha_len", "m",
                            "zeros", "ones", "t_next", *names, "mode"], rows)
    res.summary["m_bound"] = {"N0": n0, "N1": n1, "N0_lambda_cs1": c0, "N1_lambda_cs1": c1}
    res.summary["records"] = [rec.to_json() | {"w_hat_len": rec.n_hat}
                              for rec in chain if rec.k <= 3]
    for key in names:
        res.check(f"chain:{key}", agg[key])
    return res


def run_perturb(cfg: RunConfig) -> Result:
    p = cfg.params
    res = Result()
    bump = BumpSpec(p.r)
    Ls = [choose_L(p, bump, e) for e in cfg.eps]
    rows = [[e, L, series_value(p, L, p.r), norm_bound(p, bump, L), "exact"]
            for e, L in zip(cfg.eps, Ls)]
    res.tables["perturb"] = (["eps", "L", "series", "norm_bound", "mode"], rows)
    res.summary["series_value"] = series_value(p, p.L, p.r)
    res.summary["derivative_bounds"] = list(bump.derivative_bounds())
    order = sorted(zip(cfg.eps, Ls), key=lambda t: -t[0])
    res.check("perturb:choose_L_monotone",
              all(b[1] >= a[1] for a, b in zip(order, order[1:])))
    res.check("perturb:bound_below_eps",
              all(norm_bound(p, bump, L) < e for e, L in zip(cfg.eps, Ls)))
    chain = build_chain(p, _schedule(cfg), cfg.K, majority_from=None)
    res.check("perturb:supports_disjoint", perturbation_schedule(chain).supports_disjoint())
    return res


def _wander_chain(cfg: RunConfig):
    return build_chain(cfg.params, Schedule("physical"), cfg.wander_K, majority_from=None)


def run_wander(cfg: RunConfig, need: int = 5) -> Result:
    res = Result()
    chain = _wander_chain(cfg)
    k1, _ = find_k1(chain, 1, need=need, mode="anchored")
    res.summary["k1"] = k1
    if k1 is None:
        res.check("wander:k1_found", False)
        return res
    boxes = build_box_seq(chain, k1, K=k1 + need - 1, mode="anchored")
    rep = verify_wandering(chain, boxes)
    names = sorted(rep.rows[0].checks)
    res.tables["wander"] = (["k", "E", "rho", "rho_log2", *names, "mode"],
                            [[r.k, boxes[r.k].E, r.rho, r.to_json()["rho_log2"],
                              *[r.checks[n] for n in names], "exact"] for r in rep.rows])
    res.check("wander:inclusion", rep.run_from(k1) >= need)
    res.check("wander:rho_decreasing", rep.rho_decreasing(k1, need))
    res.check("wander:rho_below_half", all(r.rho < Fraction(1, 2) for r in rep.rows))
    eq = orbit_equivalence(chain, boxes, range(k1, k1 + need), grid=3, workers=cfg.workers)
    res.tables["orbit"] = (["k", "points", "mismatches", "mode"],
                           [[k, n, bad if isinstance(bad, int) else len(bad), "exact"]
                            for k, (n, bad) in sorted(eq.items())])
    res.check("wander:orbit_equivalence", all(not bad for _, bad in eq.values()))
    return res


def _arith(cfg: RunConfig):
    return None if cfg.precision == 0 else BigFloat(cfg.precision)


def _budget(cfg: RunConfig, chain, k_start, k_end):
    steps = sum(chain[k].n_hat + 2 for k in range(k_start, k_end))
    if cfg.precision == 0 and steps > cfg.exact_step_budget:
        raise UsageError(f"exact mode needs {steps} steps, over the budget of "
                         f"{cfg.exact_step_budget}; use --precision")
    return steps


def run_birkhoff(cfg: RunConfig) -> Result:
    p = cfg.params
    res = Result()
    if cfg.k1 is None:
        found = historic_k1(p, cfg.eras, k_from=1)
        if found is None:
            res.check("birkhoff:k1_found", False)
            return res
        k1, chain = found[0], found[1]
    else:
        k1 = cfg.k1
        chain = build_chain(p, Schedule("historic", k1=k1), era_sequence(k1, cfg.eras).ks[-1] + 3,
                            majority_from=None)
    es = era_sequence(k1, cfg.eras)
    steps = _budget(cfg, chain, k1, es.ks[-1])
    run = birkhoff_run(chain, k1, es.ks[-1], (CoordX,), mode=_arith(cfg))
    rep = verify_historic(p, run, es, CoordX)
    even_t, odd_t = historic_targets(p, CoordX)
    rows = [[k, es.era_of(k), end, float(to_fraction(s) / end), run.mode]
            for k, end, s in zip(run.ks, run.ends, run.sums["x"])]
    res.tables["birkhoff"] = (["k", "era", "steps", "cumulative_x", "mode"], rows)
    res.summary.update({
        "k1": k1, "eras": list(es.ks), "steps": steps, "mode": run.mode,
        "targets": {"even": even_t, "odd": odd_t},
        "era_values": [{"value": float(v), "mode": run.mode} for v in rep.values],
        "distances": [{"value": float(abs(v - (even_t if s % 2 == 0 else odd_t))), "mode": run.mode}
                      for s, v in enumerate(rep.values, 1)],
        "separation": {"value": float(rep.separation), "mode": run.mode},
        "claim_rows": [{k: (float(v) if isinstance(v, Fraction) else v) for k, v in r.items()}
                       for r in rep.claim_rows],
    })
    res.check("birkhoff:separation", rep.separated)
    res.check("birkhoff:monotone", rep.monotone)
    return res


def run_physical(cfg: RunConfig) -> Result:
    p = cfg.params
    res = Result()
    sched = _schedule(cfg)
    if sched.kind == "historic":
        raise UsageError("physical needs a physical or periodic schedule")
    k_start = cfg.k1 or 21
    chain = build_chain(p, sched, k_start + cfg.blocks + 1, majority_from=None)
    _budget(cfg, chain, k_start, k_start + cfg.blocks)
    run = birkhoff_run(chain, k_start, k_start + cfg.blocks, (CoordX,), mode=_arith(cfg),
                       near=(near_targets(p, sched), cfg.rho))
    rep = verify_physical(chain, run, cfg.rho)
    res.tables["physical"] = (["k", "near", "steps", "fraction", "cumulative", "bound", "mode"],
                              [[r["k"], r["near"], r["steps"], float(r["fraction"]),
                                float(r["cumulative"]), r["bound"], run.mode] for r in rep.rows])
    res.summary.update({"schedule": rep.schedule, "window": list(rep.window), "k_start": k_start})
    res.check("physical:increasing", rep.increasing)
    res.check("physical:above_bound", rep.above_bound)
    return res


def run_folding(cfg: RunConfig) -> Result:
    p = cfg.params
    res = Result()
    try:
        rep = verify_folding(p, cfg.x0)
    except WildBlenderError as exc:
        raise UsageError(str(exc)) from exc
    res.summary["folding"] = rep.to_json()
    res.summary["curves"] = [c.to_json() for c in image_curves(p)]
    res.tables["folding"] = (["curve", "sign", "z_center", "z_radicand", "z_exact", "transverse",
                              "within_arc", "mode"],
                             [[h.curve, h.z.sign, h.z.center, h.z.radicand, h.z.exact,
                               h.transverse, h.within_arc, "exact"] for h in rep.intersections])
    for name, ok in rep.checks.items():
        res.check(f"folding:{name}", ok)
    res.check("folding:curve_consistency", curve_consistency(p))
    return res


RUNNERS = {
    "validate": run_validate, "bridges": run_bridges, "chain": run_chain,
    "perturb": run_perturb, "wander": run_wander, "birkhoff": run_birkhoff,
    "physical": run_physical, "folding": run_folding,
}


def run_all(cfg: RunConfig) -> Result:
    res = Result()
    for name, fn in RUNNERS.items():
        sub = fn(cfg)
        res.summary[name] = sub.summary
        res.failures += sub.failures
        for table, data in sub.tables.items():
            res.tables[table] = data
    return res


RUNNERS["all"] = run_all


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wildblender", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run config (default: packaged reference)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--precision", type=int, help="big-float bits, 0 for exact")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--K", type=int, help="chain length")
        sp.add_argument("--eras", type=int)
        sp.add_argument("--blocks", type=int)
        sp.add_argument("--k1", type=int, help="first index (historic era start or physical block)")
        sp.add_argument("--schedule", help="physical | periodic:n | historic:k1")
        sp.add_argument("--x0", help="disc position for folding, p/q")
        sp.add_argument("--rho", help="neighbourhood radius, p/q")
    return ap


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)  # exact outputs have very long numerators
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        t0 = time.perf_counter()
        res = RUNNERS[args.subcommand](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    write_outputs(cfg.out, args.subcommand, res, cfg, time.perf_counter() - t0)
    print(json.dumps({"subcommand": args.subcommand, "passed": not res.failures,
                      "failures": res.failures, "out": str(cfg.out)}))
    for name in res.failures:
        print(f"FAILED {name}", file=sys.stderr)
    return 1 if res.failures else 0


if __name__ == "__main__":
    sys.exit(main())
