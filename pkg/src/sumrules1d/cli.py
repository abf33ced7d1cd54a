"""Config-driven command line: solve, verify, sweep, export.

Configs are flat INI-style text (sections, key=value, one rule per line) or
an equivalent JSON document.  Reports are byte-deterministic: the same config
produces the same bytes, floats in shortest round-trip form, and divergent-
by-theory rules are marked rather than failed (detection is their pass
condition, so they do not break the exit status).
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import susy
from .eigensolver import (
    Grid,
    PotentialKind,
    PotentialSpec,
    Spectrum,
    analytic_box_spectrum,
    analytic_sho_spectrum,
    build_grid,
    default_grid,
    export_spectrum,
    solve_numeric,
)
from .errors import ConfigError, ToolkitError
from .greenfn import export_kernel_csv
from .sumrules import (
    AbelSchedule,
    SumRuleReport,
    combined_rule,
    extremum_rule_linear,
    extremum_rule_quadratic,
    groundstate_rule,
    node_rule_linear,
    node_rule_quadratic,
    pair_integral_rule,
    write_report_json,
    write_trace_csv,
)
from .waveanalysis import export_critical_points, find_extrema, find_nodes

OUTPUT_DIR_ENV = "SUMRULES1D_OUT"

RULE_IDS = ("Node1", "Node2", "Ext1", "Ext2", "PairIntegral", "Combined",
            "GroundTrace", "TwoParticle")


@dataclass(frozen=True)
class RuleRequest:
    rule_id: str
    n: int = 1
    location: float | None = None
    J: int | None = None
    epsilons: tuple[float, ...] | None = None
    r: float | None = None
    r2: float | None = None
    tolerance: float | None = None


@dataclass
class RunConfig:
    potential: PotentialSpec
    grid: Grid
    solver_mode: str            # "analytic" | "numeric"
    num_states: int
    rules: list[RuleRequest] = field(default_factory=list)
    report_path: str | None = None
    trace_path: str | None = None
    label: str = "problem"


def _build_potential(kind: str, coefficients, halfwidth) -> PotentialSpec:
    kind = kind.lower()
    if kind == "box":
        return PotentialSpec.box()
    if kind == "oscillator":
        return PotentialSpec.oscillator(halfwidth=halfwidth or 8.0)
    if kind == "polynomial":
        if not coefficients:
            raise ConfigError("polynomial potential needs coefficients")
        return PotentialSpec.polynomial(coefficients, halfwidth=halfwidth or 8.0)
    raise ConfigError(f"unknown potential kind {kind!r}")


def _parse_rule_tokens(rule_id: str, kv: dict) -> RuleRequest:
    if rule_id not in RULE_IDS:
        raise ConfigError(f"unknown rule_id {rule_id!r}")
    known = {"n", "location", "J", "epsilons", "r", "r2", "tolerance"}
    extra = set(kv) - known
    if extra:
        raise ConfigError(f"unknown rule parameters {sorted(extra)} for {rule_id}")
    eps = kv.get("epsilons")
    if isinstance(eps, str):
        eps = tuple(float(tok) for tok in eps.split(",") if tok)
    elif eps is not None:
        eps = tuple(float(e) for e in eps)
    return RuleRequest(
        rule_id=rule_id,
        n=int(kv.get("n", 1)),
        location=None if kv.get("location") is None else float(kv["location"]),
        J=None if kv.get("J") is None else int(kv["J"]),
        epsilons=eps,
        r=None if kv.get("r") is None else float(kv["r"]),
        r2=None if kv.get("r2") is None else float(kv["r2"]),
        tolerance=None if kv.get("tolerance") is None else float(kv["tolerance"]),
    )


def _config_from_mapping(doc: dict, label: str = "problem") -> RunConfig:
    try:
        problem = doc["problem"]
        solver = doc.get("solver", {})
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"config missing required section: {exc}") from exc
    potential = _build_potential(
        problem.get("potential", "box"),
        problem.get("coefficients"),
        problem.get("halfwidth"),
    )
    n_points = int(problem.get("n_points", 2001))
    if "x0" in problem and "x1" in problem:
        grid = build_grid(float(problem["x0"]), float(problem["x1"]), n_points)
    else:
        grid = default_grid(potential, n_points)
    mode = solver.get("mode", "analytic").lower()
    if mode not in ("analytic", "numeric"):
        raise ConfigError(f"unknown solver mode {mode!r}")
    num_states = int(solver.get("num_states", 24))
    rules = []
    for entry in doc.get("verify", []):
        entry = dict(entry)
        rule_id = entry.pop("rule", None) or entry.pop("rule_id", None)
        if rule_id is None:
            raise ConfigError("each verify entry needs a 'rule' key")
        rules.append(_parse_rule_tokens(rule_id, entry))
    output = doc.get("output", {})
    return RunConfig(potential, grid, mode, num_states, rules,
                     output.get("report"), output.get("trace"),
                     doc.get("label", label))


def _config_from_ini(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    doc: dict = {"problem": {}, "solver": {}, "verify": [], "output": {}}
    if parser.has_section("problem"):
        p = parser["problem"]
        doc["problem"] = {k: p[k] for k in p}
        if "coefficients" in p:
            doc["problem"]["coefficients"] = [
                float(tok) for tok in p["coefficients"].split()
            ]
        for key in ("n_points",):
            if key in p:
                doc["problem"][key] = int(p[key])
        for key in ("halfwidth", "x0", "x1"):
            if key in p:
                doc["problem"][key] = float(p[key])
    if parser.has_section("solver"):
        s = parser["solver"]
        doc["solver"] = {k: s[k] for k in s}
        if "num_states" in s:
            doc["solver"]["num_states"] = int(s["num_states"])
    if parser.has_section("verify"):
        lines = parser.get("verify", "rules", fallback="").strip().splitlines()
        for line in lines:
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            kv = {}
            for tok in tokens[1:]:
                if "=" not in tok:
                    raise ConfigError(f"bad rule token {tok!r} in line {line!r}")
                key, val = tok.split("=", 1)
                kv[key] = val
            doc["verify"].append({"rule": tokens[0], **kv})
    if parser.has_section("output"):
        doc["output"] = dict(parser["output"])
    if parser.has_option("problem", "label"):
        doc["label"] = parser.get("problem", "label")
    return _config_from_mapping(doc)


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    stripped = text.lstrip()
    try:
        if stripped.startswith("{"):
            return _config_from_mapping(json.loads(text))
        return _config_from_ini(text)
    except (json.JSONDecodeError, configparser.Error, ValueError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def build_spectrum(config: RunConfig) -> Spectrum:
    if config.solver_mode == "numeric":
        return solve_numeric(config.potential, config.grid, config.num_states)
    if config.potential.kind is PotentialKind.BOX:
        return analytic_box_spectrum(config.grid, config.num_states)
    if config.potential.kind is PotentialKind.OSCILLATOR:
        return analytic_sho_spectrum(config.grid, config.num_states)
    raise ConfigError("analytic solver supports only box and oscillator")


def _default_J(config: RunConfig) -> int:
    return 2000 if config.solver_mode == "analytic" else 400


def evaluate_rule(spectrum: Spectrum, req: RuleRequest, default_J: int,
                  tolerance_override: float | None = None) -> SumRuleReport:
    tol = req.tolerance if req.tolerance is not None else tolerance_override
    J = req.J if req.J is not None else default_J
    rid = req.rule_id
    if rid == "Node1":
        return node_rule_linear(spectrum, req.n, req.location, J, tol)
    if rid == "Node2":
        return node_rule_quadratic(spectrum, req.n, req.location, J, tol)
    if rid == "Ext1":
        schedule = AbelSchedule(req.epsilons) if req.epsilons else None
        return extremum_rule_linear(spectrum, req.n, req.location, schedule, tol)
    if rid == "Ext2":
        return extremum_rule_quadratic(spectrum, req.n, req.location, J, tol)
    if rid == "PairIntegral":
        if req.r is None or req.r2 is None:
            raise ConfigError("PairIntegral needs r and r2")
        return pair_integral_rule(spectrum, req.n, req.r, req.r2, J, tol)
    if rid == "Combined":
        return combined_rule(spectrum, req.n, min(J, 400), tol)
    if rid == "GroundTrace":
        return groundstate_rule(spectrum, J, tol)
    if rid == "TwoParticle":
        return susy.trace_identity(spectrum, req.n, min(J, 400), tol)
    raise ConfigError(f"unknown rule_id {rid!r}")


def run(config: RunConfig, out_dir: Path, workers: int = 1,
        tolerance_override: float | None = None):
    """Solve, run the battery in declared order, write report and trace.

    Returns (exit_code, reports).  Exit 0 iff every non-divergent rule
    passes its tolerance; divergent detections are expected results.
    """
    for req in config.rules:
        if req.n > config.num_states:
            raise ConfigError(
                f"rule {req.rule_id} asks for state {req.n} but only "
                f"{config.num_states} states are solved"
            )
    spectrum = build_spectrum(config)
    default_J = _default_J(config)

    def job(req: RuleRequest) -> SumRuleReport:
        try:
            return evaluate_rule(spectrum, req, default_J, tolerance_override)
        except ToolkitError as exc:
            raise ConfigError(f"rule {req.rule_id} n={req.n}: {exc}") from exc

    if workers > 1 and len(config.rules) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(job, config.rules))
    else:
        reports = [job(req) for req in config.rules]

    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = Path(config.report_path) if config.report_path \
        else out_dir / f"report_{config.label}.json"
    trace_path = Path(config.trace_path) if config.trace_path \
        else out_dir / f"trace_{config.label}.csv"
    write_report_json(reports, report_path)
    write_trace_csv(reports, trace_path)

    failed = [r for r in reports if r.passed is False]
    for rep in reports:
        status = ("divergent" if rep.convergence_class == "divergent"
                  else "PASS" if rep.passed else
                  "n/a" if rep.passed is None else "FAIL")
        lhs = "None" if rep.lhs_value is None else f"{rep.lhs_value:.8g}"
        rhs = "None" if rep.rhs_value is None else f"{rep.rhs_value:.8g}"
        print(f"{config.label:>12s} {rep.rule_id:>12s} n={rep.n} "
              f"lhs={lhs} rhs={rhs} [{status}]")
    return (1 if failed else 0), reports


def paper_preset() -> list[RunConfig]:
    """The verified battery on both exactly solvable problems.

    Box (unit well) states 1-2 through every rule family including the
    walled trace; quadratic well states 1-2 with the trace rules flagged
    divergent by detection.
    """
    half_pi = math.pi / 2.0
    box_rules = [
        RuleRequest("Node1", n=2),
        RuleRequest("Node2", n=2),
        RuleRequest("Ext1", n=1),
        RuleRequest("Ext1", n=2),
        RuleRequest("Ext2", n=1),
        RuleRequest("Ext2", n=2),
        RuleRequest("PairIntegral", n=1, r=half_pi, r2=2.0 * math.pi / 3.0,
                    J=400),
        RuleRequest("Combined", n=1, J=400),
        RuleRequest("Combined", n=2, J=400),
        RuleRequest("GroundTrace"),
        RuleRequest("TwoParticle", n=2, J=400),
    ]
    osc_rules = [
        RuleRequest("Node1", n=2),
        RuleRequest("Node2", n=2),
        RuleRequest("Ext1", n=1),
        RuleRequest("Ext2", n=1),
        RuleRequest("GroundTrace"),
        RuleRequest("TwoParticle", n=2, J=400),
    ]
    box = RunConfig(PotentialSpec.box(), default_grid(PotentialSpec.box(), 2001),
                    "analytic", 8, box_rules, label="box")
    osc_pot = PotentialSpec.oscillator()
    osc = RunConfig(osc_pot, default_grid(osc_pot, 2001), "analytic", 8,
                    osc_rules, label="oscillator")
    return [box, osc]


def sweep(config: RunConfig, parameter: str, values: list[int],
          out_dir: Path) -> dict:
    """Convergence table over grid size or truncation depth.

    GridPoints sweeps track each rule's final discrepancy against grid
    spacing (expected order two for the numeric solver); Truncation sweeps
    track the raw truncated partial sum against the rule's right side, which
    exposes the tail decay directly (extrapolation would hide it).  The
    fitted log-log slope is included per rule.
    """
    if len(values) < 2 or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep needs at least two increasing values")
    if parameter not in ("GridPoints", "Truncation"):
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    rows = []
    for value in values:
        if parameter == "GridPoints":
            cfg = replace(
                config,
                grid=build_grid(config.grid.x0, config.grid.x1, int(value)),
            )
            spectrum = build_spectrum(cfg)
            default_J = _default_J(cfg)
            for req in cfg.rules:
                rep = evaluate_rule(spectrum, req, default_J)
                if rep.abs_err is not None:
                    rows.append({"value": int(value), "rule_id": rep.rule_id,
                                 "n": rep.n, "discrepancy": float(rep.abs_err)})
        else:
            spectrum = build_spectrum(config)
            for req in config.rules:
                rep = evaluate_rule(spectrum, req, int(value))
                if rep.rhs_value is None or not rep.lhs_partials:
                    continue
                raw = rep.lhs_partials[-1][1]
                rows.append({"value": int(value), "rule_id": rep.rule_id,
                             "n": rep.n,
                             "discrepancy": float(abs(raw - rep.rhs_value))})

    slopes = {}
    for rule_key in sorted({(r["rule_id"], r["n"]) for r in rows}):
        pts = [(r["value"], r["discrepancy"]) for r in rows
               if (r["rule_id"], r["n"]) == rule_key]
        if len(pts) >= 2 and all(d > 0 for _, d in pts):
            logs = np.log([v for v, _ in pts])
            errs = np.log([d for _, d in pts])
            slope = float(np.polyfit(logs, errs, 1)[0])
            slopes["%s_n%d" % rule_key] = slope
    table = {"parameter": parameter, "values": [int(v) for v in values],
             "rows": rows, "slopes_vs_value": slopes}
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "sweep.json", "w") as fh:
        json.dump(table, fh, indent=2)
        fh.write("\n")
    with open(out_dir / "sweep.csv", "w") as fh:
        fh.write("value,rule_id,n,discrepancy\n")
        for r in rows:
            fh.write(f"{r['value']},{r['rule_id']},{r['n']},{r['discrepancy']!r}\n")
    return table


def _cmd_solve(args) -> int:
    config = load_config(args.config)
    out = _out_dir(args)
    spectrum = build_spectrum(config)
    out.mkdir(parents=True, exist_ok=True)
    export_spectrum(spectrum, out / f"spectrum_{config.label}.txt",
                    out / f"energies_{config.label}.json")
    print(f"wrote spectrum table and energies for {config.label} "
          f"({spectrum.count} states)")
    return 0


def _cmd_verify(args) -> int:
    configs = paper_preset() if args.preset == "paper" else [load_config(args.config)]
    out = _out_dir(args)
    worst = 0
    for config in configs:
        code, _ = run(config, out, workers=args.workers,
                      tolerance_override=args.tolerance)
        worst = max(worst, code)
    return worst


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    values = [int(tok) for tok in args.values.split(",")]
    table = sweep(config, args.parameter, values, _out_dir(args))
    for key, slope in table["slopes_vs_value"].items():
        print(f"{key}: log-log slope vs {args.parameter} = {slope:+.3f}")
    return 0


def _cmd_export(args) -> int:
    config = load_config(args.config)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    spectrum = build_spectrum(config)
    what = args.what
    if what == "spectrum":
        export_spectrum(spectrum, out / f"spectrum_{config.label}.txt",
                        out / f"energies_{config.label}.json")
    elif what == "critical-points":
        state = spectrum.state(args.n)
        points = find_nodes(state, spectrum.grid) + find_extrema(
            state, spectrum.grid)
        export_critical_points(points, out / f"critical_points_n{args.n}.json")
    elif what == "kernel":
        pts = np.linspace(spectrum.grid.x0, spectrum.grid.x1,
                          args.kernel_points + 2)[1:-1]
        export_kernel_csv(spectrum, args.n, pts, pts, args.J,
                          out / f"kernel_n{args.n}.csv")
    elif what == "partner":
        problem = susy.build_partner_problem(spectrum, args.n)
        susy.export_partner(problem, spectrum, out / f"partner_n{args.n}.txt")
    else:
        raise ConfigError(f"unknown export target {what!r}")
    print(f"exported {what} to {out}")
    return 0


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_DIR_ENV, "out"))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sumrules1d",
        description="Bound-state spectral sums: solve, verify, sweep, export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve and dump the spectrum")
    p_solve.add_argument("--config", required=True)

    p_verify = sub.add_parser("verify", help="run a rule battery")
    group = p_verify.add_mutually_exclusive_group(required=True)
    group.add_argument("--config")
    group.add_argument("--preset", choices=["paper"])
    p_verify.add_argument("--workers", type=int, default=1)
    p_verify.add_argument("--tolerance", type=float, default=None,
                          help="global tolerance override")

    p_sweep = sub.add_parser("sweep", help="convergence sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--parameter", required=True,
                         choices=["GridPoints", "Truncation"])
    p_sweep.add_argument("--values", required=True,
                         help="comma separated increasing values")

    p_export = sub.add_parser("export", help="dump artifacts")
    p_export.add_argument("--config", required=True)
    p_export.add_argument("--what", required=True,
                          choices=["spectrum", "critical-points", "kernel",
                                   "partner"])
    p_export.add_argument("--n", type=int, default=1)
    p_export.add_argument("--J", type=int, default=200)
    p_export.add_argument("--kernel-points", type=int, default=20)

    for p in (p_solve, p_verify, p_sweep, p_export):
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUTPUT_DIR_ENV} or ./out)")

    args = parser.parse_args(argv)
    handlers = {"solve": _cmd_solve, "verify": _cmd_verify,
                "sweep": _cmd_sweep, "export": _cmd_export}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
