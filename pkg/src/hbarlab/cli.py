"""Command-line entry point: ``hbarlab <subcommand> [options]``.

Exit codes: 0 when every enabled check passes, 2 when a check fails (or a
numerical routine gives up), 1 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import explosion, field as hfield, fuzzy, groupoid, moyal, planck
from .config import FORMATS, RunConfig, load_config, parse_config
from .errors import ConfigError, FieldValidationError, HbarlabError, ProfileError
from .output import csv_text, json_text, write_text

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # file stem -> (header, rows)
    document: dict = field(default_factory=dict)
    info: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# registry


def registry() -> list[tuple[str, str, str]]:
    """``(name, kind, description)`` for every builtin, sorted by name."""
    rows = [
        ("broken-constant-pi", "groupoid", "constant-Poisson groupoid with a corrupted product (negative control)"),
        ("constant-pi", "groupoid", "exploded constant Poisson structure on R^2 with explicit structure maps"),
        ("pair-groupoid", "groupoid", "pair groupoid of R, all structure maps exact"),
        ("fibonacci", "profile", "two-sphere areas (1/hbar, 1/lambda(hbar)), integral at hbar = 1/F_2k"),
        ("golden-linear", "profile", "areas (1/hbar, phi/hbar), never simultaneously integral"),
        ("rational-linear", "profile", "areas (2/hbar, 3/hbar), rational constant ratio"),
        ("single-sphere", "profile", "area 1/hbar, admissible set {1/k}"),
    ]
    map_text = {
        "constant-pi-m": "groupoid multiplication in exploded chart form",
        "constant-pi-pr1": "first projection from composable pairs",
        "constant-pi-pr2": "second projection from composable pairs",
        "cubic": "compatible cubic map on a (1,1,1) chart",
        "identity": "identity map of a chart",
        "inclusion": "inclusion of a smaller chart",
        "not-normal": "(x, y, z + y), breaks the normal-bundle condition (negative control)",
        "projection": "projection from a (2,1,1) chart",
        "quadratic": "compatible quadratic map on a (1,1,1) chart",
        "shear": "compatible shear on a (1,1,1) chart",
        "squash": "compatible map with a quadratic normal term",
    }
    rows += [(n, "map", map_text.get(n, "compatible map")) for n in explosion.BUILTIN_MAPS]
    rows += [(n, "sphere-symbol", f"polynomial symbol {n} on the unit sphere") for n in fuzzy.builtin_symbols()]
    for n in ("constant", "gaussian", "x1-window", "x2-window"):
        rows.append((n, "lattice-symbol", f"rapidly decaying symbol {n} on the plane"))
    return sorted(rows, key=lambda r: (r[0], r[1]))


# ---------------------------------------------------------------------------
# subcommand runners


def _fmt(v: float) -> str:
    return f"{v:.3e}"


def run_check(p: dict, rng) -> Outcome:
    if p["model"] not in groupoid.MODELS:
        raise ConfigError(f"unknown groupoid model {p['model']!r}; choose from {sorted(groupoid.MODELS)}",
                          "/parameters/model")
    model = groupoid.MODELS[p["model"]]()
    rep = groupoid.check_axioms(model, n_samples=p["n"], tol=p.get("tol"), rng=rng, zero_fraction=p["zero_fraction"])
    out = Outcome()
    rows = []
    for name, r in rep.residuals.items():
        ok = r < rep.tol
        out.checks.append(Check(name, ok, f"max residual {_fmt(r)} (tol {rep.tol:.1e})"))
        rows.append([name, r, rep.tol, "pass" if ok else "fail"])
    doc = {"axioms": rep.to_dict(), "model": p["model"]}
    if p["forms"] and "omega" in model.forms:
        fr = groupoid.check_forms(model, model.forms["omega"], rng=rng)
        for name, r in (("omega_closed", fr.closedness), ("omega_multiplicative", fr.multiplicativity)):
            ok = r < fr.tol
            out.checks.append(Check(name, ok, f"max residual {_fmt(r)} (tol {fr.tol:.1e})"))
            rows.append([name, r, fr.tol, "pass" if ok else "fail"])
        out.checks.append(Check("omega_nondegenerate", fr.verdict != "degenerate", f"min |det| {_fmt(fr.min_abs_det)}"))
        doc["forms"] = fr.to_dict()
    out.tables["check"] = (["diagram", "max_residual", "tol", "verdict"], rows)
    out.document = doc
    return out


def run_explode(p: dict, rng) -> Outcome:
    map_arg = p["map"]
    try:
        phi = explosion.map_from_config({"builtin": map_arg} if isinstance(map_arg, str) else map_arg)
    except KeyError as e:
        raise ConfigError(str(e).strip("'\""), "/parameters/map") from e
    tol = p["tol"]
    out = Outcome()
    comp = explosion.check_compatible(phi, samples=p["samples"], rng=rng)
    rows = [[f"compatible_{k}", v, comp.tol] for k, v in comp.residuals.items()]
    for k, v in comp.residuals.items():
        out.checks.append(Check(f"compatible_{k}", v < comp.tol, f"max residual {_fmt(v)} (tol {comp.tol:.1e})"))
    if comp.passed:
        S = phi.source
        pts = [explosion.ExplodedPoint(q.x, q.y, q.z, 0.0) for q in S.sample_exploded(rng, p["samples"], 0.5)]
        jac = cont = 0.0
        for q in pts:
            J = explosion.explode_jacobian(phi, q)
            Jfd = explosion.exploded_fd_jacobian(phi, q)
            jac = max(jac, float(np.max(np.abs(J - Jfd)) / max(1.0, np.max(np.abs(J)))))
            v0 = explosion.explode_map(phi, q).as_array()[:-1]
            lim = explosion.limit_at_zero(phi, q)
            cont = max(cont, float(np.max(np.abs(lim - v0)) / max(1.0, np.max(np.abs(v0)))))
        for name, v in (("jacobian_vs_fd", jac), ("continuity_at_zero", cont)):
            out.checks.append(Check(name, v < tol, f"max relative error {_fmt(v)} (tol {tol:.1e})"))
            rows.append([name, v, tol])
        cls = explosion.classify_map(phi, rng=rng)
        out.info += [f"{k}: {v}" for k, v in cls.items()]
        out.document["classification"] = cls
    out.tables["explode"] = (["check", "value", "tol"], rows)
    out.document.update({"map": phi.name, "compatibility": comp.to_dict(),
                         "rows": [{"check": r[0], "value": r[1], "tol": r[2]} for r in rows]})
    return out


def run_moyal(p: dict, rng) -> Outcome:
    data = groupoid.ConstantPoissonData.standard(2)
    out = Outcome()
    rows = []
    for h in p["hbar"]:
        K = moyal.unit_multiplier(h, data, n_points=p["n_points"])
        err = float(np.max(np.abs(moyal.kahler_product(K, K, data).values - K.values)))
        ok = err < p["tol"]
        out.checks.append(Check(f"idempotence_hbar={h:g}", ok, f"max |K*K - K| {_fmt(err)} (tol {p['tol']:.1e})"))
        rows.append(["idempotence", h, err, p["tol"]])
    hs = sorted(p["ev0_hbar"], reverse=True)
    yg = moyal.Grid.covering(2, p["n_points"], moyal.default_extent(hs[-1], data))
    fam = [moyal.unit_multiplier(h, data, ygrid=yg) for h in hs]
    lim, res = moyal.ev0(fam, None, np.zeros(2), data)
    err = abs(lim - 1)
    out.checks.append(Check("ev0_unit", err < p["ev0_tol"], f"|ev0(K) - 1| {_fmt(err)} (tol {p['ev0_tol']:.1e})"))
    rows.append(["ev0_unit", 0.0, err, p["ev0_tol"]])
    out.tables["moyal"] = (["check", "hbar", "value", "tol"], rows)
    out.document = {"rows": [dict(zip(("check", "hbar", "value", "tol"), r)) for r in rows],
                    "ev0_limit": lim, "ev0_residual": res}
    return out


def _k_list(p: dict) -> list[int]:
    if "hbar" in p:
        return [round(1 / h) for h in p["hbar"]]
    return list(p["k_list"])


def run_fuzzy(p: dict, rng) -> Outcome:
    try:
        f = fuzzy.get_symbol(p["symbol"])
    except KeyError as e:
        raise ConfigError(str(e).strip("'\""), "/parameters/symbol") from e
    ks = _k_list(p)
    curve = fuzzy.classical_limit_curve(f, ks)
    out = Outcome()
    out.tables["fuzzy"] = (["k", "hbar", "sup_error", "fitted_order"],
                           [[k, 1.0 / k, e, curve.order] for k, e in curve.rows()])
    out.checks.append(Check("monotone_decay", curve.monotone, f"errors {', '.join(_fmt(e) for e in curve.errors)}"))
    if "expect_order" in p:
        ok = abs(curve.order - p["expect_order"]) <= p["order_tol"]
        out.checks.append(Check("fitted_order", ok, f"{curve.order:.3f} vs {p['expect_order']} +- {p['order_tol']}"))
    else:
        out.info.append(f"fitted order {curve.order:.3f}")
    out.document = {"symbol": f.name, "k": curve.k, "errors": curve.errors, "fitted_order": curve.order,
                    "monotone": curve.monotone}
    return out


def _profile(p: dict) -> planck.AreaProfile:
    if "profile_file" in p:
        path = Path(p["profile_file"])
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot load profile table {path}: {e}", "/parameters/profile_file") from e
        try:
            return planck.laurent_profile(doc.get("name", path.stem), doc["components"], doc.get("hbar_max", 1.0),
                                          doc.get("rho"))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed profile table {path}: {e}", "/parameters/profile_file") from e
    try:
        return planck.get_profile(p["model"])
    except KeyError as e:
        raise ConfigError(str(e).strip("'\""), "/parameters/model") from e


def run_planck(p: dict, rng) -> Outcome:
    prof = _profile(p)
    pset = planck.bohr_sommerfeld_set(prof, p["min_hbar"], p["scan_step"])
    out = Outcome()
    m = len(prof)
    header = ["hbar"] + [f"n{i + 1}" for i in range(m)] + ["size"]
    out.tables["planck"] = (header, [list(r) for r in pset.rows()])
    worst = 0.0
    for e in pset.admissible:
        worst = max(worst, float(np.max(np.abs(prof.values(e.hbar) - np.array(e.integers)))))
    out.checks.append(Check("integrality", worst < 1e-10, f"max |A_i - n_i| {_fmt(worst)} over {len(pset)} entries"))
    out.info.append(f"{len(pset)} admissible hbar >= {p['min_hbar']:g}; symmetric under sign: {pset.symmetric}")
    out.document = {"set": pset.to_dict()}
    if p["ratio"]:
        rep = planck.monodromy_ratio_report(prof)
        rows = []
        for key, st in rep.ratio_stats.items():
            rat = rep.rationality.get(key, {})
            rows.append([key, st["min"], st["max"], st["relative_spread"], rat.get("constant", False),
                         rat.get("witness") or ""])
        out.tables["planck_ratio"] = (["pair", "min", "max", "relative_spread", "constant", "witness"], rows)
        out.info.append(f"integrability screen: {rep.verdict}" + (f" ({', '.join(rep.failing)})" if rep.failing else ""))
        out.checks.append(Check("ratio_screen_determinate", rep.verdict != "indeterminate", rep.verdict))
        out.document["integrability"] = rep.to_dict()
    return out


def run_field(p: dict, rng) -> Outcome:
    backend = p["backend"]
    if backend == "fuzzy":
        if "k_list" in p:
            index = [1.0 / k for k in p["k_list"]]
        elif "hbar" in p:
            index = p["hbar"]
        else:
            index = [1.0 / k for k in range(1, p.get("k_max", 32) + 1)]
        model = hfield.assemble_field("fuzzy", index, k_max=p.get("k_max"))
    else:
        model = hfield.assemble_field("moyal", p.get("hbar", [0.4, 0.2, 0.1]), case=p["case"], n_points=p["n_points"])
    try:
        section = hfield.symbol_section(model, p["symbol"])
        window = p.get("fit_window")
        if window is None and backend == "fuzzy":
            small = [h for h in model.positive if h <= 1 / 8 + 1e-12]
            window = (min(small), 1 / 8) if len(small) >= 3 else None
        rep = hfield.continuity_report(section, p.get("second"), fit_window=window)
    except KeyError as e:
        raise ConfigError(str(e).strip("'\""), "/parameters/symbol") from e
    out = Outcome()
    out.tables["field"] = (list(rep.COLUMNS), rep.table())
    smallest = rep.rows[-2]
    sup0 = rep.rows[-1]["norm"]
    gap = smallest["norm_gap"]
    out.checks.append(Check("norm_continuity", gap < 0.15 * max(sup0, 1e-300) or gap < 1e-12,
                            f"norm gap {_fmt(gap)} at hbar={smallest['hbar']:g} (limit 0.15 sup|f| = {0.15 * sup0:.3e})"))
    out.info += [f"order {k}: {'vanishes' if v is None else f'{v:.3f}'}" for k, v in rep.orders.items()]
    out.document = rep.to_dict()
    return out


RUNNERS: dict[str, Callable] = {
    "check": run_check, "explode": run_explode, "moyal": run_moyal,
    "fuzzy": run_fuzzy, "planck": run_planck, "field": run_field,
}


# ---------------------------------------------------------------------------
# argument parsing


def _floats(s: str) -> list[float]:
    try:
        return [float(eval_fraction(t)) for t in s.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def eval_fraction(t: str) -> float:
    t = t.strip()
    if "/" in t:
        a, b = t.split("/", 1)
        return float(a) / float(b)
    return float(t)


def _ints(s: str) -> list[int]:
    try:
        return [int(t) for t in s.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _common(parser: argparse.ArgumentParser, top: bool) -> None:
    d = None if top else argparse.SUPPRESS
    parser.add_argument("--config", default=d, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=d, help="random seed (default 0)")
    parser.add_argument("--output-dir", default=d, help="directory for report files (default hbarlab-out)")
    parser.add_argument("--format", choices=FORMATS, default=d, help="report format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hbarlab", description="Numerical experiments on exploded groupoids and their quantizations.")
    _common(ap, True)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    S = argparse.SUPPRESS

    c = sub.add_parser("check", help="groupoid axiom harness")
    c.add_argument("--model", default=S)
    c.add_argument("--n", type=int, default=S)
    c.add_argument("--tol", type=float, default=S)
    c.add_argument("--zero-fraction", type=float, default=S)
    c.add_argument("--forms", action="store_true", default=S, help="also check the symplectic form")

    e = sub.add_parser("explode", help="explosion calculus checks for a compatible map")
    e.add_argument("--map", default=S)
    e.add_argument("--samples", type=int, default=S)
    e.add_argument("--tol", type=float, default=S)

    m = sub.add_parser("moyal", help="unit multiplier and classical limit in the Kahler case")
    m.add_argument("--hbar", type=_floats, default=S)
    m.add_argument("--ev0-hbar", type=_floats, default=S)
    m.add_argument("--n-points", type=int, default=S)
    m.add_argument("--tol", type=float, default=S)
    m.add_argument("--ev0-tol", type=float, default=S)

    f = sub.add_parser("fuzzy", help="classical limit of Berezin-Toeplitz quantization on the sphere")
    f.add_argument("--k-list", type=_ints, default=S)
    f.add_argument("--hbar", type=_floats, default=S)
    f.add_argument("--symbol", default=S)
    f.add_argument("--expect-order", type=float, default=S)
    f.add_argument("--order-tol", type=float, default=S)

    p = sub.add_parser("planck", help="admissible Planck values and integrability screen")
    p.add_argument("--model", default=S)
    p.add_argument("--profile-file", default=S)
    p.add_argument("--min-hbar", type=float, default=S)
    p.add_argument("--scan-step", type=float, default=S)
    p.add_argument("--ratio", action="store_true", default=S, help="also run the monodromy ratio screen")

    fl = sub.add_parser("field", help="continuity report of a symbol section")
    fl.add_argument("--backend", choices=("fuzzy", "moyal"), default=S)
    fl.add_argument("--symbol", default=S)
    fl.add_argument("--second", default=S, help="second symbol for product and Dirac defects")
    fl.add_argument("--k-max", type=int, default=S)
    fl.add_argument("--k-list", type=_ints, default=S)
    fl.add_argument("--hbar", type=_floats, default=S)
    fl.add_argument("--case", choices=("function", "flat_V"), default=S)
    fl.add_argument("--n-points", type=int, default=S)
    fl.add_argument("--fit-window", type=_floats, default=S)

    for sp in (c, e, m, f, p, fl):
        _common(sp, False)

    sub.add_parser("list-models", help="builtin models, maps, symbols and profiles")
    v = sub.add_parser("validate", help="validate a configuration file without running it")
    v.add_argument("path")
    return ap


_GLOBAL = ("config", "seed", "output_dir", "format", "command")


def _resolve(args: argparse.Namespace) -> RunConfig:
    ns = vars(args)
    cli_params = {k: v for k, v in ns.items() if k not in _GLOBAL}
    if ns.get("config"):
        cfg = load_config(ns["config"])
        if ns.get("command") and ns["command"] != cfg.subcommand:
            raise ConfigError(f"command line says {ns['command']!r} but the config says {cfg.subcommand!r}",
                              "/subcommand")
        doc = {"subcommand": cfg.subcommand, "parameters": {**cfg.parameters, **cli_params}, "seed": cfg.seed,
               "output_dir": cfg.output_dir, "format": cfg.format}
    else:
        if not ns.get("command"):
            raise UsageError("hbarlab: a subcommand or --config is required")
        doc = {"subcommand": ns["command"], "parameters": cli_params}
    for key in ("seed", "output_dir", "format"):
        if ns.get(key) is not None:
            doc[key] = ns[key]
    return parse_config(doc)


def run(cfg: RunConfig, stdout=None) -> int:
    """Run one configuration, write its reports and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    params = cfg.resolved()
    rng = np.random.default_rng(cfg.seed)
    outdir = Path(cfg.output_dir)
    try:
        outcome = RUNNERS[cfg.subcommand](params, rng)
    except (ConfigError, FieldValidationError, ProfileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except HbarlabError as e:
        write_text(outdir / f"{cfg.subcommand}.json", json_text({"error": type(e).__name__, "message": str(e),
                                                                 "parameters": params}), final=False)
        print(f"FAIL {cfg.subcommand}: {type(e).__name__}: {e}", file=stdout)
        return EXIT_FAIL
    ok = outcome.passed
    if cfg.format == "csv":
        for stem, (header, rows) in outcome.tables.items():
            write_text(outdir / f"{stem}.csv", csv_text(header, rows), final=ok)
    else:
        doc = {"subcommand": cfg.subcommand, "parameters": params, "seed": cfg.seed,
               "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in outcome.checks],
               "result": outcome.document}
        write_text(outdir / f"{cfg.subcommand}.json", json_text(doc), final=ok)
    for c in outcome.checks:
        print(c.line(), file=stdout)
    for line in outcome.info:
        print(f"INFO {line}", file=stdout)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "list-models":
            for name, kind, desc in registry():
                print(f"{name:<22} {kind:<15} {desc}")
            return EXIT_OK
        if args.command == "validate":
            load_config(args.path)
            print("OK")
            return EXIT_OK
        cfg = _resolve(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
