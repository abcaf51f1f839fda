"""Command-line driver: model catalog, experiments, sweeps, reports.

Subcommands: validate | cycles | sweep | basin | sdi | knots.
Tabular results go to CSV, structured records to JSON; a run_meta.txt
sidecar isolates timestamps and tool version so the data files stay
byte-reproducible.  Exit codes: 0 success, 2 configuration error,
3 assumption failure, 4 detection failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cycles import (
    CycleDetectionError,
    basin_census,
    cycle_census,
    find_limit_cycle,
)
from .geometry import TAU, hausdorff_dist
from .knots import homeo_class, is_ambient_isotopic, link_consistent
from .models import (
    ModelError,
    catalog_model,
    critical_curves,
    graph_model,
    model_from_json,
    sine_link_model,
    validate_assumptions,
)
from .sdi import slow_divergence_integral

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSUMPTIONS = 3
EXIT_DETECTION = 4

EPS_MAX = 0.25


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--model", help="catalog label or path to a model JSON file")
    common.add_argument("--m", type=int, help="sine-link m (curve pair count)")
    common.add_argument("--k", type=int, help="sine-link k (vertical wraps)")
    common.add_argument("--l", type=int, help="sine-link l (horizontal wraps)")
    common.add_argument("--slow", choices=["unit", "cosine"], help="slow drift variant")
    common.add_argument("--phi", help='graph-model phi as JSON, e.g. \'{"q":1,"sin":[1.0]}\'')
    common.add_argument("--eps", help="comma-separated eps list, e.g. 0.1,0.05")
    common.add_argument("--grid", type=int, help="basin grid size per axis")
    common.add_argument("--relaxed", action="store_true", default=None,
                        help="accept regular finite-order contact points")
    common.add_argument("--seed", type=int, help="RNG seed for multi-seed restarts")
    common.add_argument("--restarts", type=int, help="extra detections per curve")
    common.add_argument("--workers", type=int, help="worker budget for sweep rows")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"],
                        help="tabular output format (csv default; json adds .json tables)")
    common.add_argument("--pair", action="append",
                        help="winding pair 'k,l' (knots subcommand; repeatable)")

    p = argparse.ArgumentParser(
        prog="torusflow",
        description="slow-fast dynamics on the 2-torus: knotted critical "
                    "curves and their limit-cycle links",
    )
    p.add_argument("--version", action="version", version=f"torusflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("validate", "check the model assumptions and write a report"),
        ("cycles", "detect the limit-cycle link at each eps"),
        ("sweep", "cycle + divergence-integral sweep over a decreasing eps list"),
        ("basin", "classify omega/alpha limits on a uniform grid"),
        ("sdi", "slow divergence integrals of the critical curves"),
        ("knots", "torus-knot classification of winding pairs or a model's link"),
    ]:
        sub.add_parser(name, parents=[common], help=helptext)
    return p


DEFAULTS = {
    "eps": [0.1, 0.05],
    "grid": 20,
    "relaxed": False,
    "seed": 0,
    "restarts": 0,
    "workers": 1,
    "out": "out",
    "fmt": "csv",
    "slow": "unit",
}


def merge_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        if "format" in file_cfg:
            file_cfg["fmt"] = file_cfg.pop("format")
        cfg.update(file_cfg)
    for key in ("model", "m", "k", "l", "slow", "phi", "eps", "grid", "relaxed",
                "seed", "restarts", "workers", "out", "fmt", "pair"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if isinstance(cfg.get("eps"), str):
        try:
            cfg["eps"] = [float(tok) for tok in cfg["eps"].split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"cannot parse eps list: {cfg['eps']!r}") from exc
    if not cfg.get("eps"):
        raise ConfigError("eps list is empty")
    for e in cfg["eps"]:
        if not (0.0 < e <= EPS_MAX):
            raise ConfigError(f"eps {e} outside (0, {EPS_MAX}]")
    if cfg["grid"] < 4:
        raise ConfigError("grid must be at least 4")
    return cfg


def resolve_model(cfg: dict):
    if cfg.get("phi"):
        phi = cfg["phi"]
        if isinstance(phi, str):
            try:
                phi = json.loads(phi)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"cannot parse --phi JSON: {exc}") from exc
        try:
            return graph_model(phi)
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc
    label = cfg.get("model")
    if label:
        try:
            return catalog_model(label)
        except ModelError:
            if Path(label).exists():
                try:
                    return model_from_json(label)
                except (ModelError, json.JSONDecodeError) as exc:
                    raise ConfigError(f"bad model file {label}: {exc}") from exc
            raise ConfigError(f"unknown model {label!r}")
    if cfg.get("m") and cfg.get("k") is not None and cfg.get("l") is not None:
        try:
            return sine_link_model(cfg["m"], cfg["k"], cfg["l"], slow_variant=cfg["slow"])
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("no model given: use --model, --phi, or --m/--k/--l")


# ---------------------------------------------------------------------------
# writers


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_meta(outdir: Path, argv: list[str]):
    with open(outdir / "run_meta.txt", "w") as fh:
        fh.write(f"tool: torusflow {__version__}\n")
        fh.write(f"timestamp: {time.strftime('%Y-%m-%dT%H:%M:%S%z')}\n")
        fh.write(f"argv: {' '.join(argv)}\n")


def eps_tag(eps: float) -> str:
    return f"{eps:g}"


def write_curves_csv(outdir: Path, curves):
    rows = []
    for c in curves:
        wrapped = c.curve.wrapped
        for s, (pl, pw) in enumerate(zip(c.curve.samples, wrapped)):
            rows.append([c.index, s, float(pl[0]), float(pl[1]),
                         float(pw[0]), float(pw[1])])
    write_csv(outdir / "curves.csv",
              ["curve_index", "sample", "x_lift", "y_lift", "x", "y"], rows)


def write_census_outputs(outdir: Path, census, curves, fmt: str):
    tag = eps_tag(census.eps)
    doc = census.to_dict()
    doc["critical_curves"] = [
        {
            "index": c.index,
            "stability": c.stability,
            "winding": [c.winding.k, c.winding.l],
            "contacts": [cp.to_dict() for cp in c.contacts],
        }
        for c in curves
    ]
    write_json(outdir / f"census_eps{tag}.json", doc)
    rows = []
    for ci, cyc in enumerate(census.cycles):
        wrapped = cyc.orbit.wrapped
        n = len(cyc.orbit.samples)
        for s in range(n):
            t = cyc.period * s / (n - 1)
            pl, pw = cyc.orbit.samples[s], wrapped[s]
            rows.append([ci, float(t), float(pl[0]), float(pl[1]),
                         float(pw[0]), float(pw[1])])
    write_csv(outdir / f"orbits_eps{tag}.csv",
              ["cycle_index", "t", "x_lift", "y_lift", "x", "y"], rows)


SWEEP_HEADER = [
    "eps", "curve_index", "winding_k", "winding_l", "period", "div_integral",
    "eps_times_div_integral", "sdi", "sdi_method", "kappa", "bracket_pass",
    "hausdorff", "gap_abs", "gap_decreasing", "hausdorff_decreasing", "multiplier",
]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: dict, outdir: Path) -> int:
    model = resolve_model(cfg)
    curves = critical_curves(model)
    report = validate_assumptions(model, curves)
    write_json(outdir / "validation.json", report.to_dict())
    write_curves_csv(outdir, curves)
    ok = report.relaxed_pass if cfg["relaxed"] else report.strict_pass
    mode = "relaxed" if cfg["relaxed"] else "strict"
    print(f"validate [{mode}]: {'pass' if ok else 'FAIL'} "
          f"({len(curves)} curves, windings_equal={report.windings_equal})")
    return EXIT_OK if ok else EXIT_ASSUMPTIONS


def _gate_assumptions(model, curves, cfg) -> int | None:
    report = validate_assumptions(model, curves)
    ok = report.relaxed_pass if cfg["relaxed"] else report.strict_pass
    if not ok:
        mode = "relaxed" if cfg["relaxed"] else "strict"
        print(f"assumption validation failed in {mode} mode", file=sys.stderr)
        return EXIT_ASSUMPTIONS
    return None


def cmd_cycles(cfg: dict, outdir: Path) -> int:
    model = resolve_model(cfg)
    curves = critical_curves(model)
    gate = _gate_assumptions(model, curves, cfg)
    if gate is not None:
        return gate
    write_curves_csv(outdir, curves)
    failures = []
    for eps in cfg["eps"]:
        try:
            census = cycle_census(
                model, eps, curves=curves,
                restarts=cfg["restarts"], seed=cfg["seed"],
            )
        except CycleDetectionError as exc:
            failures.append({"eps": eps, "error": str(exc)})
            print(f"cycles eps={eps}: FAILED ({exc})", file=sys.stderr)
            continue
        write_census_outputs(outdir, census, curves, cfg["fmt"])
        print(f"cycles eps={eps}: {census.attracting_count} attracting + "
              f"{census.repelling_count} repelling, winding {census.winding}")
    if failures:
        write_json(outdir / "census_errors.json", failures)
        return EXIT_DETECTION
    return EXIT_OK


def cmd_sweep(cfg: dict, outdir: Path) -> int:
    model = resolve_model(cfg)
    eps_list = cfg["eps"]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("sweep eps list must be strictly decreasing")
    curves = critical_curves(model)
    gate = _gate_assumptions(model, curves, cfg)
    if gate is not None:
        return gate
    write_curves_csv(outdir, curves)
    sdis = {c.index: slow_divergence_integral(model, c) for c in curves}

    def detect(job):
        eps, curve = job
        return find_limit_cycle(model, eps, curve)

    jobs = [(eps, c) for eps in eps_list for c in curves]
    failures = []
    results = {}
    workers = max(1, int(cfg["workers"]))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for job, res in zip(jobs, pool.map(lambda j: _try_detect(detect, j), jobs)):
                results[(job[0], job[1].index)] = res
    else:
        for job in jobs:
            results[(job[0], job[1].index)] = _try_detect(detect, job)

    rows = []
    prev_gap: dict[int, float] = {}
    prev_hd: dict[int, float] = {}
    for eps in eps_list:
        census_cycles = []
        for c in curves:
            res = results[(eps, c.index)]
            if isinstance(res, Exception):
                failures.append({"eps": eps, "curve": c.index, "error": str(res)})
                continue
            census_cycles.append(res)
            sdi = sdis[c.index]
            kappa = 0.1 * abs(sdi.value)
            scaled = eps * res.div_integral
            gap = abs(scaled - sdi.value)
            hd = hausdorff_dist(res.orbit, c.curve)
            gap_dec = "" if c.index not in prev_gap else str(gap < prev_gap[c.index]).lower()
            hd_dec = "" if c.index not in prev_hd else str(hd < prev_hd[c.index]).lower()
            prev_gap[c.index] = gap
            prev_hd[c.index] = hd
            rows.append([
                eps, c.index, res.winding.k, res.winding.l, res.period,
                res.div_integral, scaled, sdi.value, sdi.method, kappa,
                str(sdi.value - kappa <= scaled <= sdi.value + kappa).lower(),
                hd, gap, gap_dec, hd_dec, res.multiplier,
            ])
        if census_cycles:
            _write_sweep_census(outdir, model, eps, census_cycles, curves, cfg)
    write_csv(outdir / "sweep.csv", SWEEP_HEADER, rows)
    if cfg["fmt"] == "json":
        write_json(outdir / "sweep.json",
                   [dict(zip(SWEEP_HEADER, r)) for r in rows])
    print(f"sweep: {len(rows)} rows over eps {eps_list}")
    if failures:
        write_json(outdir / "sweep_errors.json", failures)
        return EXIT_DETECTION
    return EXIT_OK


def _try_detect(detect, job):
    try:
        return detect(job)
    except CycleDetectionError as exc:
        return exc


def _write_sweep_census(outdir, model, eps, cycles_list, curves, cfg):
    from .cycles import CycleCensus

    att = sum(1 for c in cycles_list if c.stability == "attracting")
    census = CycleCensus(
        model_label=model.label, eps=eps, cycles=cycles_list,
        attracting_count=att, repelling_count=len(cycles_list) - att,
        min_pairwise_dist=math.nan,
    )
    write_census_outputs(outdir, census, curves, cfg["fmt"])


def cmd_basin(cfg: dict, outdir: Path) -> int:
    model = resolve_model(cfg)
    curves = critical_curves(model)
    gate = _gate_assumptions(model, curves, cfg)
    if gate is not None:
        return gate
    code = EXIT_OK
    for eps in cfg["eps"]:
        try:
            census = cycle_census(model, eps, curves=curves)
            basin = basin_census(model, eps, cfg["grid"], census=census)
        except CycleDetectionError as exc:
            print(f"basin eps={eps}: FAILED ({exc})", file=sys.stderr)
            code = EXIT_DETECTION
            continue
        rows = [
            [e.i, e.j, e.x, e.y, e.status, e.omega_index, e.alpha_index]
            for e in basin.entries
        ]
        write_csv(outdir / f"basin_eps{eps_tag(eps)}.csv",
                  ["i", "j", "x", "y", "status", "omega_index", "alpha_index"], rows)
        print(f"basin eps={eps}: {basin.classified_fraction:.1%} classified "
              f"on a {cfg['grid']}x{cfg['grid']} grid")
    return code


def cmd_sdi(cfg: dict, outdir: Path) -> int:
    model = resolve_model(cfg)
    curves = critical_curves(model)
    rows = []
    for c in curves:
        for method in ("analytic", "quadrature"):
            try:
                v = slow_divergence_integral(model, c, method=method)
            except ValueError:
                continue
            rows.append([c.index, c.stability, v.method, v.value, v.est_error])
    write_csv(outdir / "sdi.csv",
              ["curve_index", "stability", "method", "value", "est_error"], rows)
    print(f"sdi: {len(rows)} rows for {len(curves)} curves")
    return EXIT_OK


def cmd_knots(cfg: dict, outdir: Path) -> int:
    doc: dict = {}
    pairs = []
    for token in cfg.get("pair") or []:
        try:
            k, l = (int(t) for t in token.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --pair {token!r}; expected 'k,l'") from exc
        pairs.append((k, l))
    if pairs:
        doc["pairs"] = [
            {"pair": list(p), "homeo_class": homeo_class(p).to_dict()} for p in pairs
        ]
        doc["ambient_isotopy"] = [
            {"a": list(a), "b": list(b), "isotopic": is_ambient_isotopic(a, b)}
            for i, a in enumerate(pairs)
            for b in pairs[i + 1:]
        ]
    if cfg.get("model") or cfg.get("phi") or cfg.get("m"):
        model = resolve_model(cfg)
        curves = critical_curves(model)
        doc["model"] = model.label
        doc["curve_windings"] = [[c.winding.k, c.winding.l] for c in curves]
        doc["link_consistent"] = link_consistent([c.curve for c in curves])
    if not doc:
        raise ConfigError("knots: give --pair entries and/or a model")
    write_json(outdir / "knots.json", doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "cycles": cmd_cycles,
    "sweep": cmd_sweep,
    "basin": cmd_basin,
    "sdi": cmd_sdi,
    "knots": cmd_knots,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
        outdir = Path(cfg["out"])
        outdir.mkdir(parents=True, exist_ok=True)
        write_meta(outdir, ["torusflow"] + list(argv))
        return COMMANDS[args.command](cfg, outdir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
