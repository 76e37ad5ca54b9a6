"""Command-line driver: ``dfsdd {sequence,verify,simulate,table1,dfs}``.

Exit codes: 0 success, 1 property or physics failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import avg_ham
from .dfs import dark_subspace, format_ket
from .dynamics import (
    REFERENCE_FINALS,
    BathSpec,
    SimulationConfig,
    build_model,
    build_timeline,
    compare_schedules,
    evolve,
)
from .errors import DfsddError, PropertyViolation, ValidationError
from .sequences import CYCLE_KINDS, FINITE, IDEAL, make_cycle, move_count, step_count

CONFIG_FIELDS = {f.name for f in dataclasses.fields(SimulationConfig)}
RUN_FIELDS = {"name", "output", "seed", "supercycles", "taus"}
SUITES = ("collectivity", "equivalence", "elimination", "darkness", "bch")


class Report:
    """Collects ``PASS/FAIL name value tolerance`` lines."""

    def __init__(self, out=None):
        self.out = out
        self.failed = []

    def check(self, name: str, ok: bool, value, tolerance) -> bool:
        tag = "PASS" if ok else "FAIL"
        val = f"{value:.9g}" if isinstance(value, float) else str(value)
        print(f"{tag} {name} {val} {tolerance}", file=self.out or sys.stdout)
        if not ok:
            self.failed.append(name)
        return ok


def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, pairs) -> dict:
    doc = dict(doc)
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValidationError(f"override {pair!r} is not key=value")
        doc[key.strip()] = parse_value(value)
    return doc


def split_run_config(doc: dict) -> tuple[SimulationConfig, dict]:
    unknown = set(doc) - CONFIG_FIELDS - RUN_FIELDS
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    sim = {k: v for k, v in doc.items() if k in CONFIG_FIELDS}
    run = {k: v for k, v in doc.items() if k in RUN_FIELDS}
    if isinstance(sim.get("baths"), list):
        try:
            sim["baths"] = [BathSpec(**b) if isinstance(b, dict) else b for b in sim["baths"]]
        except TypeError as exc:
            raise ValidationError(f"bad bath entry: {exc}") from None
    try:
        return SimulationConfig(**sim), run
    except TypeError as exc:
        raise ValidationError(str(exc)) from None


def preset(name: str) -> list[dict]:
    """Named reproduction bundles; each entry is one run config."""
    if name == "fig3a":
        common = {"n_qubits": 2, "initial_state": "psi1", "tau": 0.25, "t_final": 4.0}
        return [
            {**common, "name": "none", "cycle": "none"},
            {**common, "name": "finite", "pulse_mode": FINITE},
            {**common, "name": "ideal", "pulse_mode": IDEAL},
        ]
    if name == "fig4":
        common = {"n_qubits": 4, "initial_state": "psi2", "pulse_mode": IDEAL, "tau": 0.05, "t_final": 0.8}
        return [
            {**common, "name": "periodic", "schedule": "periodic"},
            {**common, "name": "concatenated", "schedule": "concatenated"},
        ]
    if name == "fig5":
        common = {"n_qubits": 4, "initial_state": "psi2", "t_final": 6.0}
        return [
            {**common, "name": f"{kind}_{mode}", "cycle": kind, "tau": tau, "pulse_mode": mode}
            for mode in (FINITE, IDEAL)
            for kind, tau in (("optimal", 0.25), ("original4", 0.75))
        ]
    if name == "table1":
        out = []
        for inv in sorted(REFERENCE_FINALS):
            tau = 1 / inv
            for schedule in ("periodic", "concatenated"):
                out.append(
                    {
                        "name": f"{schedule}_tau1_{inv}",
                        "n_qubits": 4,
                        "initial_state": "psi2",
                        "pulse_mode": IDEAL,
                        "schedule": schedule,
                        "tau": tau,
                        "t_final": 16 * tau,
                    }
                )
        return out
    raise ValidationError(f"unknown preset {name!r}; choose fig3a, fig4, fig5 or table1")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    return doc


def cmd_sequence(args) -> int:
    cycle = make_cycle(args.cycle, args.n)
    out = sys.stdout
    print(f"cycle {cycle.name} n={args.n} sites={cycle.n_qubits} intervals={cycle.intervals}", file=out)
    if cycle.ancilla:
        print(f"ancilla site {cycle.n_qubits}", file=out)
    for k, g in enumerate(cycle.controllers):
        print(f"g{k} {g}", file=out)
    for k, pulse in enumerate(cycle.all_pulses):
        layers = " | ".join(" ".join(f"E{i},{j}" for i, j in layer) for layer in pulse)
        print(f"P{k} {layers}", file=out)
    mc = move_count(cycle)
    sc = step_count(cycle)
    print(f"moves ops={mc.ops} moved={mc.moves} optimal={mc.is_optimal}", file=out)
    print(
        f"steps parallel={sc.parallel_steps} two_qubit={sc.total_exchanges} "
        f"controller={sc.controller_exchanges} closing={sc.closing_exchanges}",
        file=out,
    )
    if args.dump_timeline:
        cfg = SimulationConfig(
            n_qubits=args.n,
            cycle=args.cycle,
            schedule=args.schedule,
            tau=args.tau,
            pulse_mode=args.mode,
            coupling=args.coupling,
            t_final=args.tau * cycle.intervals * (cycle.intervals if args.schedule == "concatenated" else 1),
        )
        out.write(build_timeline(cfg, cycle).dumps())
    return 0


def _verify_model(n: int, seed: int):
    cycle = make_cycle("optimal", n)
    rng = np.random.default_rng(seed)
    model = avg_ham.SystemBathHamiltonian.random(cycle.n_qubits, rng, coupled_sites=range(1, n + 1))
    return cycle, model


def run_suite(suite: str, n: int, seed: int, report: Report, tol: float = 1e-10) -> None:
    cycle, model = _verify_model(n, seed)
    d = model.bath_dim
    if suite == "collectivity":
        h = avg_ham.average_hamiltonian(model, cycle, interaction_only=True)
        err = float(np.linalg.norm(h - avg_ham.collective_form(model)))
        report.check(f"collectivity_n{n}", err < tol, err, tol)
    elif suite == "equivalence":
        other = make_cycle("cyclic", cycle.n_qubits)
        err = float(
            np.linalg.norm(avg_ham.average_hamiltonian(model, cycle) - avg_ham.average_hamiltonian(model, other))
        )
        report.check(f"equivalence_n{n}", err < tol, err, tol)
    elif suite == "elimination":
        decomp = avg_ham.collective_decompose(model)
        for j in range(2, cycle.n_qubits + 1):
            try:
                avg_ham.eliminate_noncollective(decomp, j, cycle, tol)
                report.check(f"elimination_n{n}_j{j}", True, f"<{tol:g}", tol)
            except PropertyViolation as exc:
                report.check(f"elimination_n{n}_j{j}", False, exc.value, tol)
    elif suite == "darkness":
        h = avg_ham.average_hamiltonian(model, cycle, interaction_only=True)
        basis = dark_subspace(cycle.n_qubits)
        bath_states = list(np.eye(d, dtype=complex))
        worst = avg_ham.dark_annihilation(h, basis.vectors, bath_states) if basis.dimension else 0.0
        report.check(f"darkness_n{n}", worst < tol, worst, tol)
    elif suite == "bch":
        rng = np.random.default_rng(seed)
        full = avg_ham.SystemBathHamiltonian.random(cycle.n_qubits, rng, coupled_sites=range(1, n + 1), system=True, bath=True)
        rows = avg_ham.bch_residual(full, cycle, [0.04, 0.02, 0.01])
        ratios = [a.second / b.second for a, b in zip(rows, rows[1:])]
        for k, r in enumerate(ratios):
            report.check(f"bch_r2_ratio_n{n}_{k}", 7.2 <= r <= 8.8, float(r), "[7.2,8.8]")
    else:
        raise ValidationError(f"unknown suite {suite!r}")


def cmd_verify(args) -> int:
    report = Report()
    suites = SUITES if args.suite == "all" else (args.suite,)
    for suite in suites:
        run_suite(suite, args.n, args.seed, report)
    return 1 if report.failed else 0


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def cmd_simulate(args) -> int:
    base = apply_overrides(load_config(args.config), args.set)
    runs = [{**entry, **base} for entry in preset(args.preset)] if args.preset else [base]
    configs = [(run_doc.get("name", "run"), *split_run_config(run_doc)) for run_doc in runs]
    bundle = len(configs) > 1 or args.preset
    out = Path(args.output) if args.output else None
    for name, cfg, run in configs:
        target = out
        if bundle:
            target = (out or Path(".")) / f"{args.preset or 'run'}_{name}.csv"
        elif run.get("output") and out is None:
            target = Path(run["output"])
        trace = evolve(cfg)
        _write(trace.to_csv(), target)
        if args.dump_timeline and target is not None:
            cycle = build_model(cfg).cycle
            target.with_suffix(".timeline").write_text(build_timeline(cfg, cycle).dumps())
        print(f"{name} final_fidelity {trace.final:.12g}", file=sys.stderr if target is None else sys.stdout)
    return 0


def cmd_table1(args) -> int:
    doc = apply_overrides(load_config(args.config), args.set)
    doc = {"n_qubits": 4, "initial_state": "psi2", "pulse_mode": IDEAL, "coupling": None, **doc}
    cfg, run = split_run_config(doc)
    taus = run.get("taus") or [1 / k for k in sorted(REFERENCE_FINALS)]
    supercycles = int(run.get("supercycles", args.supercycles))
    rows = compare_schedules(cfg, taus, supercycles)
    report = Report()
    print("tau periodic concatenated higher reference_periodic reference_concatenated")
    for r in rows:
        reference = REFERENCE_FINALS.get(round(1 / r.tau))
        pp, pc = (f"{reference[1]:.6f}", f"{reference[0]:.6f}") if reference else ("-", "-")
        higher = "periodic" if r.periodic_higher else "concatenated"
        print(f"{r.tau:.6g} {r.periodic:.9f} {r.concatenated:.9f} {higher} {pp} {pc}")
    for r in rows:
        report.check(f"floor_tau{r.tau:.4g}", min(r.periodic, r.concatenated) >= 0.999, min(r.periodic, r.concatenated), 0.999)
    by_inv = {round(1 / r.tau): r for r in rows}
    if 20 in by_inv:
        r = by_inv[20]
        report.check("order_tau1_20_periodic_higher", r.periodic > r.concatenated, r.periodic - r.concatenated, "> 0")
    if 250 in by_inv:
        r = by_inv[250]
        report.check("order_tau1_250_concatenated_higher", r.concatenated >= r.periodic, r.concatenated - r.periodic, ">= 0")
    return 1 if report.failed else 0


def cmd_dfs(args) -> int:
    basis = dark_subspace(args.n)
    print(f"n={args.n} dimension={basis.dimension}")
    for k, v in enumerate(basis.vectors):
        print(f"v{k} {format_ket(v, args.n)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfsdd", description="Decoupling sequences and open-system simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sequence", help="show a decoupling cycle and its step counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cycle", choices=sorted(CYCLE_KINDS), default="optimal")
    p.add_argument("--schedule", choices=("periodic", "concatenated"), default="periodic")
    p.add_argument("--mode", choices=(IDEAL, FINITE), default=IDEAL)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--coupling", "--J", type=float, default=np.pi)
    p.add_argument("--dump-timeline", action="store_true")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("verify", help="run the averaged-Hamiltonian property suites")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", choices=("all", *SUITES), default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="integrate a run config and write a fidelity CSV")
    p.add_argument("--config")
    p.add_argument("--preset", choices=("fig3a", "fig4", "fig5", "table1"))
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--output")
    p.add_argument("--dump-timeline", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table1", help="periodic vs concatenated final fidelities")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--supercycles", type=int, default=1)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("dfs", help="print a basis of the dark subspace")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_dfs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DfsddError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
