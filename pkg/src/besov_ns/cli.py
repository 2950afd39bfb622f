"""Command-line front end: config ingestion, orchestration and artifact emission.

Exit codes: 0 when every gate passes, 1 when a gate fails, 2 on a config error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from .harness import (
    ConfigError,
    DecayConfig,
    check_convolution_inequality,
    fit_rate,
    linear_decay_run,
    make_initial_data,
    nonlinear_decay_run,
)
from .linear import LinearSymbol, verify_lemma31
from .littlewood_paley import (
    BesovParams,
    besov_norm,
    bernstein_ratio,
    dyadic_block,
    partition_for_grid,
    uncovered_fraction,
)
from .model import ModelError, PRESETS, derive_constants, make_model
from .output import csv_text, dump_json, loglog_svg, atomic_write
from .products import PROPOSITIONS, ProductCheckConfig, default_grid, product_estimate_ratio
from .spectral import dilate, make_grid, random_field

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
FORMATS = ("csv", "json", "svg")


# ---------------------------------------------------------------------------
# option tables


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(",", " ").split()]


def _pairs(text) -> list[tuple[float, float]]:
    if isinstance(text, (list, tuple)):
        return [tuple(float(y) for y in p) for p in text]
    out = []
    for chunk in str(text).split(";"):
        if chunk.strip():
            a, b = chunk.split(",")
            out.append((float(a), float(b)))
    return out


def _formats(text) -> list[str]:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    items = [str(x).strip() for x in items if str(x).strip()]
    for f in items:
        if f not in FORMATS:
            raise ConfigError(f"unknown output format {f!r}; choose from {FORMATS}")
    return items


def _paths(items) -> list[str]:
    if isinstance(items, (list, tuple)):
        return [str(x) for x in items]
    return [str(items)]


def _params(items) -> dict[str, float]:
    if isinstance(items, dict):
        return {str(k): float(v) for k, v in items.items()}
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"model parameter {item!r} must look like name=value")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
    return out


# (dest, flag type, default, help); the config-file section follows the dest name
COMMON = [
    ("out", str, "out", "output directory"),
    ("formats", _formats, "csv,json", "comma list of csv, json, svg"),
]
MODEL = [
    ("preset", str, "ideal", f"equation-of-state preset: {', '.join(PRESETS)}"),
    ("param", _params, [], "model parameter override name=value (repeatable)"),
]
OPTIONS: dict[str, list[tuple[str, Callable, Any, str]]] = {
    "lp-check": COMMON + [
        ("dim", int, 3, "spatial dimension"),
        ("n", int, 64, "grid points per side"),
        ("L", float, 2 * math.pi, "torus side length"),
        ("j0", int, 0, "low/high block threshold"),
        ("trials", int, 4, "random fields per check"),
        ("seed", int, 0, "random seed"),
        ("tol", float, 1e-8, "partition-of-unity tolerance"),
    ],
    "symbol-spectrum": COMMON + MODEL + [
        ("dim", int, 3, "spatial dimension"),
        ("rho_min", float, 1e-3, "smallest |xi|"),
        ("rho_max", float, 1e2, "largest |xi|"),
        ("n_rho", int, 121, "log-spaced samples of |xi|"),
    ],
    "linear-decay": COMMON + MODEL + [
        ("dim", int, 3, "spatial dimension"),
        ("p", float, 2.0, "Lebesgue exponent of the data class"),
        ("s1", float, 1.5, "low-frequency data regularity"),
        ("s", _floats, [0.0], "measurement regularities"),
        ("eps", float, 0.05, "regularity loss in the decay functional"),
        ("j0", int, 0, "low/high block threshold"),
        ("tmin", float, 1.0, "first sample time"),
        ("tmax", float, 1e4, "last sample time"),
        ("n_t", int, 41, "log-spaced sample times"),
        ("window", _floats, None, "fit window t_lo t_hi (default last two decades)"),
        ("tol", float, 0.05, "allowed exponent deviation"),
        ("lemma_jmin", int, -6, "lowest block for the rate fit"),
        ("lemma_C", float, 10.0, "ratio constant for the rate fit"),
    ],
    "nonlinear-decay": COMMON + MODEL + [
        ("dim", int, 3, "spatial dimension"),
        ("n", int, 32, "grid points per side"),
        ("L", float, 32 * math.pi, "torus side length"),
        ("p", float, 2.0, "Lebesgue exponent of the data class"),
        ("s1", float, 1.5, "low-frequency data regularity"),
        ("eps", float, 0.05, "regularity loss in the decay functional"),
        ("j0", int, 2, "low/high block threshold"),
        ("amplitude", float, 1e-2, "RMS of the density perturbation"),
        ("tmax", float, 50.0, "final time"),
        ("dt", float, 0.25, "maximal time step"),
        ("seed", int, 0, "random seed"),
        ("window", _floats, None, "fit window t_lo t_hi (default last decade)"),
        ("tol", float, 0.15, "allowed exponent deviation"),
        ("growth", float, 10.0, "allowed growth of the decay functional after t = 1"),
    ],
    "product-check": COMMON + [
        ("prop", str, "all", f"estimate label or 'all': {', '.join(PROPOSITIONS)}"),
        ("trials", int, 200, "random pairs per estimate"),
        ("j0", int, -2, "low/high block threshold"),
        ("p", float, 2.0, "Lebesgue exponent"),
        ("s1", float, 1.0, "low-frequency regularity for the nonlinear-term estimates"),
        ("n0", int, None, "fixed block offset for the paraproduct variants (default scan 0..4)"),
        ("seed", int, 0, "random seed"),
        ("spread", float, 10.0, "allowed max/median ratio"),
    ],
    "ineq-check": COMMON + [
        ("pairs", _pairs, "0.5,1.25;1,1.5;1.2,1.25", "semicolon list of sigma1,sigma2"),
        ("reject", _pairs, "1,1", "pairs that must be rejected"),
        ("t_max", float, 1e3, "time horizon"),
        ("n_t", int, 121, "sample times"),
        ("rel_tol", float, 0.01, "allowed relative change under refinement"),
    ],
    "report": COMMON + [
        ("inputs", _paths, [], "summary JSON files to merge"),
    ],
}

# config-file sections; every key must be an option of some subcommand
SECTIONS = ("grid", "partition", "model", "decay", "products", "inequality", "spectrum", "lemma", "output")
_ALIASES = {("output", "dir"): "out", ("model", "params"): "param", ("grid", "d"): "dim"}


def _all_dests() -> set[str]:
    return {o[0] for opts in OPTIONS.values() for o in opts}


def load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    """Flatten a nested YAML document into option names."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a mapping of sections")
    known = _all_dests()
    flat: dict[str, Any] = {}
    for section, body in doc.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section {section!r}; choose from {SECTIONS}")
        if not isinstance(body, dict):
            raise ConfigError(f"config section {section!r} must be a mapping")
        for key, value in body.items():
            dest = _ALIASES.get((section, key), key)
            if dest not in known:
                raise ConfigError(f"unknown key {key!r} in section {section!r}")
            flat[dest] = value
    return flat


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="besov-ns", description="Decay and product-estimate verification suites.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=argparse.SUPPRESS, help="YAML config file; flags override it")
        for dest, _, default, help_ in opts:
            flag = "--" + dest.replace("_", "-")
            if dest == "inputs":
                sp.add_argument("inputs", nargs="*", default=argparse.SUPPRESS, help=help_)
            elif dest == "param":
                sp.add_argument(flag, action="append", default=argparse.SUPPRESS, help=help_)
            elif dest in ("s", "window"):
                sp.add_argument(flag, nargs="+", default=argparse.SUPPRESS, help=help_)
            else:
                sp.add_argument(flag, default=argparse.SUPPRESS, help=f"{help_} (default {default})")
    return parser


def resolve(command: str, flags: dict[str, Any]) -> dict[str, Any]:
    """Built-in defaults, then config file, then flags; every value parsed by its option type."""
    opts = {o[0]: o for o in OPTIONS[command]}
    cfg = {k: o[2] for k, o in opts.items()}
    if "config" in flags:
        file_vals = load_config_file(flags["config"])
        cfg.update({k: v for k, v in file_vals.items() if k in opts})
    cfg.update({k: v for k, v in flags.items() if k in opts})
    out = {}
    for k, v in cfg.items():
        conv = opts[k][1]
        if v is None:
            out[k] = None
            continue
        try:
            if conv in (int, float, str):
                if isinstance(v, list):
                    v = v[-1]
                out[k] = conv(v)
            else:
                out[k] = conv(v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {k}: {v!r} ({exc})") from exc
    return out


# ---------------------------------------------------------------------------
# helpers


def worker_count() -> int:
    raw = os.environ.get("BESOV_NS_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"BESOV_NS_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"BESOV_NS_THREADS must be a positive integer, got {raw!r}")
    return n


def pool_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over a process pool capped by BESOV_NS_THREADS."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _model_and_consts(cfg: dict):
    model = make_model(cfg["preset"], **cfg["param"])
    return model, derive_constants(model)


class Emitter:
    def __init__(self, command: str, cfg: dict):
        self.command, self.cfg = command, cfg
        self.dir = Path(cfg["out"])
        self.written: list[str] = []

    def csv(self, stem: str, header, rows) -> None:
        if "csv" in self.cfg["formats"]:
            self.written.append(str(atomic_write(self.dir / f"{stem}.csv", csv_text(header, rows))))

    def svg(self, stem: str, x, y, title: str, slope: float | None) -> None:
        if "svg" in self.cfg["formats"]:
            self.written.append(str(atomic_write(self.dir / f"{stem}.svg", loglog_svg(x, y, title, slope))))

    def summary(self, results: dict, gates: dict[str, bool]) -> bool:
        passed = all(gates.values())
        if "json" in self.cfg["formats"]:
            body = {"command": self.command, "config": self.cfg, "results": results, "gates": gates, "passed": passed}
            path = self.dir / f"{self.command}.json"
            self.written.append(str(atomic_write(path, dump_json(body))))
        for name, ok in gates.items():
            print(f"{'PASS' if ok else 'FAIL'} {self.command}: {name}")
        return passed


# ---------------------------------------------------------------------------
# subcommands


def cmd_lp_check(cfg: dict) -> bool:
    d, n, L = cfg["dim"], cfg["n"], cfg["L"]
    grid = make_grid(d, n, L)
    part = partition_for_grid(grid, cfg["j0"])
    em = Emitter("lp-check", cfg)
    rng = np.random.default_rng(cfg["seed"])

    # partition of unity over every resolved nonzero wavevector
    k = grid.kmag
    total = sum(part.block_symbol(j, k) for j in part.blocks)
    resolved = (k > 0) & ~grid.nyquist_mask
    pou = float(np.max(np.abs(total[resolved] - 1.0)))

    # Bernstein: first derivative in L^2 of a block stays within the annulus bounds
    js = [j for j in part.blocks if 0.75 * 2.0**j >= grid.k_min and 8 / 3 * 2.0**j <= grid.k_nyquist]
    bern_rows, bern_ok = [], True
    for j in js:
        vals = []
        for _ in range(cfg["trials"]):
            f = dyadic_block(random_field(grid, rng), j, part)
            vals.append(bernstein_ratio(f, j, 1, 2.0, 2.0))
        lo, hi = min(vals), max(vals)
        bern_ok &= 0.75 - 1e-9 <= lo and hi <= 8 / 3 + 1e-9
        bern_rows.append((j, lo, hi))

    # embedding B^s_{2,1} into B^{s - d(1/2 - 1/p)}_{p,1} and the dyadic scaling law
    emb, scal = [], []
    band = 0.45 * grid.k_nyquist
    for _ in range(cfg["trials"]):
        f = random_field(grid, rng, k_max=band)
        if uncovered_fraction(f, part) > 0.01:
            warn("more than 1% of the L^2 mass lies outside the covered blocks")
        for p in (4.0, math.inf):
            shift = d * (0.5 - (0.0 if math.isinf(p) else 1 / p))
            emb.append(besov_norm(f, BesovParams(1.0 - shift, p, 1), part) / besov_norm(f, BesovParams(1.0, 2, 1), part))
        g = dilate(f, 2.0)
        wide = partition_for_grid(g.grid, cfg["j0"])
        wide = type(wide)(min(wide.j_min, part.j_min), max(wide.j_max, part.j_max), wide.j0)
        for s in (-1.0, 0.0, 1.5):
            r = besov_norm(g, BesovParams(s, 2, 1), wide) / besov_norm(f, BesovParams(s, 2, 1), wide)
            scal.append(abs(r / 2.0 ** (s - d / 2) - 1))
    em.csv("lp-check-bernstein", ["j", "ratio_min", "ratio_max"], bern_rows)
    results = {
        "partition": {"j_min": part.j_min, "j_max": part.j_max, "max_deviation": pou},
        "bernstein": [{"j": j, "min": a, "max": b} for j, a, b in bern_rows],
        "embedding_max_ratio": max(emb),
        "scaling_max_rel_error": max(scal),
    }
    gates = {
        "partition of unity": pou <= cfg["tol"],
        "bernstein bounds": bool(bern_ok),
        "embedding bounded": max(emb) <= 10.0,
        "dyadic scaling": max(scal) <= 1e-6,
    }
    return em.summary(results, gates)


def cmd_symbol_spectrum(cfg: dict) -> bool:
    if not 0 < cfg["rho_min"] < cfg["rho_max"]:
        raise ConfigError("require 0 < rho_min < rho_max")
    if cfg["n_rho"] < 2:
        raise ConfigError("need at least two samples of |xi|")
    _, consts = _model_and_consts(cfg)
    sym = LinearSymbol.from_constants(consts, cfg["dim"])
    rho = np.geomspace(cfg["rho_min"], cfg["rho_max"], cfg["n_rho"])
    ev = sym.radial_eigenvalues(rho)
    order = np.argsort(ev.real, axis=-1)
    ev = np.take_along_axis(ev, order, axis=-1)
    trans = -sym.transverse_rate(rho)
    rows = [(r, *[x for z in e for x in (z.real, z.imag)], tr) for r, e, tr in zip(rho, ev, trans)]
    header = ["rho"] + [f"{part}{i}" for i in range(3) for part in ("re", "im")] + ["transverse"]
    em = Emitter("symbol-spectrum", cfg)
    em.csv("symbol-spectrum", header, rows)
    top = np.maximum(ev.real.max(axis=-1), trans)
    em.svg("symbol-spectrum", rho, -top, "spectral gap", 2.0)
    results = {"constants": asdict(consts), "max_real_part": float(top.max())}
    return em.summary(results, {"dissipative spectrum": bool(np.all(top < 0))})


def _decay_cfg(cfg: dict, **extra) -> DecayConfig:
    return DecayConfig(d=cfg["dim"], p=cfg["p"], s1=cfg["s1"], eps=cfg["eps"], j0=cfg["j0"], **extra)


def cmd_linear_decay(cfg: dict) -> bool:
    if cfg["p"] != 2:
        raise ConfigError("radial quadrature measures L^2 blocks; require p = 2")
    dc = _decay_cfg(cfg)
    if cfg["lemma_jmin"] > dc.j0:
        raise ConfigError(f"require lemma_jmin <= j0 = {dc.j0}")
    if not 0 < cfg["tmin"] < cfg["tmax"]:
        raise ConfigError("require 0 < tmin < tmax")
    _, consts = _model_and_consts(cfg)
    t = np.geomspace(cfg["tmin"], cfg["tmax"], cfg["n_t"])
    window = tuple(cfg["window"]) if cfg["window"] else (cfg["tmax"] / 100, cfg["tmax"])
    if len(window) != 2:
        raise ConfigError("window takes two times")
    rec = linear_decay_run(dc, consts, cfg["s"], t)
    em = Emitter("linear-decay", cfg)
    header = ["t"] + [f"low_s={s:.4g}" for s in cfg["s"]]
    em.csv("linear-decay", header, [(ti, *[rec.norms[s][i] for s in cfg["s"]]) for i, ti in enumerate(t)])
    fits, gates = {}, {}
    for s in cfg["s"]:
        fit = fit_rate(t, rec.norms[s], window)
        target = -(dc.s1 + s) / 2
        fits[f"{s:.4g}"] = {"exponent": fit.exponent, "target": target, "r2": fit.r2, "reliable": fit.reliable}
        gates[f"exponent s={s:.4g}"] = abs(fit.exponent - target) <= cfg["tol"]
        em.svg(f"linear-decay-s{s:.4g}", t, rec.norms[s], f"low-frequency norm, s={s:.4g}", target)
    part = partition_for_grid(make_grid(dc.d, 8, 2 * math.pi), dc.j0)
    part = type(part)(min(part.j_min, cfg["lemma_jmin"]), part.j_max, dc.j0)
    lem = verify_lemma31(range(cfg["lemma_jmin"], dc.j0 + 1), consts, part, C=cfg["lemma_C"], d=dc.d)
    gates["block rate positive"] = lem.c0 > 0
    results = {
        "fits": fits,
        "block_rate": {"c0": lem.c0, "C": lem.C, "ratios": lem.ratios, "spectral_rates": lem.spectral_rates},
    }
    return em.summary(results, gates)


def cmd_nonlinear_decay(cfg: dict) -> bool:
    dc = _decay_cfg(cfg, seed=cfg["seed"])
    if cfg["amplitude"] <= 0 or cfg["dt"] <= 0 or cfg["tmax"] <= 1:
        raise ConfigError("require amplitude > 0, dt > 0 and tmax > 1")
    model, _ = _model_and_consts(cfg)
    grid = make_grid(cfg["dim"], cfg["n"], cfg["L"])
    part = partition_for_grid(grid, dc.j0)
    frac = uncovered_fraction(make_initial_data(dc, cfg["amplitude"], grid, part).a, part)
    if frac > 0.01:
        warn(f"{100 * frac:.2f}% of the L^2 mass lies outside the covered blocks")
    run = nonlinear_decay_run(dc, grid, model, cfg["amplitude"], cfg["tmax"], cfg["dt"], part=part)
    rec = run.record
    em = Emitter("nonlinear-decay", cfg)
    if "csv" in cfg["formats"]:
        em.written.append(str(atomic_write(em.dir / "nonlinear-decay.csv", rec.to_csv())))
    t, low = rec.t, rec.column("low_s0")
    window = tuple(cfg["window"]) if cfg["window"] else (cfg["tmax"] / 10, cfg["tmax"])
    fit = fit_rate(t, low, window)
    target = -(dc.s1 + 0.0) / 2
    em.svg("nonlinear-decay", t, low, "low-frequency norm, s=0", target)
    D = rec.column("D_p")
    i1 = int(np.argmin(np.abs(t - 1.0)))
    growth = float(np.max(D[t >= t[i1]]) / D[i1])
    results = {
        "fit": {"exponent": fit.exponent, "target": target, "r2": fit.r2, "window": list(window)},
        "min_density": run.min_density,
        "rejections": run.rejections,
        "steps": run.steps,
        "D_p_growth": growth,
        "initial": run.initial,
        "partition": {"j_min": part.j_min, "j_max": part.j_max, "j0": part.j0},
    }
    gates = {
        "density floor never hit": run.rejections == 0,
        "low-frequency exponent": abs(fit.exponent - target) <= cfg["tol"],
        "decay functional bounded": growth <= cfg["growth"],
    }
    return em.summary(results, gates)


def _product_job(args):
    cfg = ProductCheckConfig(**args)
    st = product_estimate_ratio(cfg)
    return st.summary()


def cmd_product_check(cfg: dict) -> bool:
    props = list(PROPOSITIONS) if cfg["prop"] == "all" else [x.strip() for x in cfg["prop"].split(",")]
    jobs = []
    for prop in props:
        args = dict(prop=prop, p=cfg["p"], s1=cfg["s1"], trials=cfg["trials"], n0=cfg["n0"], j0=cfg["j0"],
                    seed=cfg["seed"], spread_limit=cfg["spread"])
        ProductCheckConfig(**args)  # validate everything before running anything
        jobs.append(args)
    grid = default_grid()
    summaries = pool_map(_product_job, jobs)
    em = Emitter("product-check", cfg)
    em.csv("product-check", ["estimate", "max", "median", "spread", "passed"],
           [(s["prop"], s["max"], s["median"], s["spread"], s["passed"]) for s in summaries])
    results = {"grid": {"d": grid.d, "n": grid.n, "L": grid.L}, "estimates": summaries}
    gates = {s["prop"]: bool(s["passed"]) for s in summaries}
    return em.summary(results, gates)


def _ineq_job(args):
    s1, s2, t_max, n_t = args
    coarse = check_convolution_inequality(s1, s2, t_max, 0, n_t)
    fine = check_convolution_inequality(s1, s2, t_max, 1, n_t)
    return coarse.sup, fine.sup, coarse.t_at_sup


def cmd_ineq_check(cfg: dict) -> bool:
    for s1, s2 in cfg["pairs"]:
        if not (0 <= s1 <= s2 and s2 > 1):
            raise ConfigError(f"pair ({s1}, {s2}): require 0 <= sigma1 <= sigma2 and sigma2 > 1")
    out = pool_map(_ineq_job, [(s1, s2, cfg["t_max"], cfg["n_t"]) for s1, s2 in cfg["pairs"]])
    em = Emitter("ineq-check", cfg)
    rows, gates, results = [], {}, {"pairs": [], "rejected": []}
    for (s1, s2), (c, f, tsup) in zip(cfg["pairs"], out):
        rel = abs(c - f) / abs(f) if f else math.inf
        ok = math.isfinite(c) and math.isfinite(f) and rel <= cfg["rel_tol"]
        rows.append((s1, s2, c, f, rel, tsup))
        results["pairs"].append({"sigma1": s1, "sigma2": s2, "sup": f, "sup_coarse": c, "rel_change": rel, "t_at_sup": tsup})
        gates[f"stable ({s1:g}, {s2:g})"] = bool(ok)
    for s1, s2 in cfg["reject"]:
        try:
            check_convolution_inequality(s1, s2, cfg["t_max"], 0, 8)
            rejected = False
        except ConfigError:
            rejected = True
        results["rejected"].append({"sigma1": s1, "sigma2": s2, "rejected": rejected})
        gates[f"rejects ({s1:g}, {s2:g})"] = rejected
    em.csv("ineq-check", ["sigma1", "sigma2", "sup_coarse", "sup_fine", "rel_change", "t_at_sup"], rows)
    return em.summary(results, gates)


def cmd_report(cfg: dict) -> bool:
    if not cfg["inputs"]:
        raise ConfigError("report needs at least one summary JSON file")
    rows, entries = [], []
    for path in cfg["inputs"]:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read summary {path}: {exc}") from exc
        if doc.get("schema") != 1 or "gates" not in doc:
            raise ConfigError(f"{path} is not a summary file with schema 1")
        for gate, ok in sorted(doc["gates"].items()):
            rows.append((doc["command"], gate, bool(ok)))
        entries.append({"command": doc["command"], "passed": bool(doc["passed"]), "gates": doc["gates"]})
    em = Emitter("report", cfg)
    em.csv("report", ["command", "gate", "passed"], rows)
    gates = {f"{c}: {g}": ok for c, g, ok in rows}
    return em.summary({"entries": entries}, gates)


COMMANDS: dict[str, Callable[[dict], bool]] = {
    "lp-check": cmd_lp_check,
    "symbol-spectrum": cmd_symbol_spectrum,
    "linear-decay": cmd_linear_decay,
    "nonlinear-decay": cmd_nonlinear_decay,
    "product-check": cmd_product_check,
    "ineq-check": cmd_ineq_check,
    "report": cmd_report,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    if ns.command is None:
        parser.print_usage(sys.stderr)
        print("error: missing subcommand", file=sys.stderr)
        return EXIT_CONFIG
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        cfg = resolve(ns.command, flags)
        worker_count()
        passed = COMMANDS[ns.command](cfg)
    except (ConfigError, ModelError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_PASS if passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
