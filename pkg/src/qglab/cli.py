"""Command-line surface: qglab <command> [options] FILE.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input,
3 internal inconsistency (equivalent criteria disagreed or a pinned
convention could not be found).  Identical configurations (including the
seed) produce byte-identical JSON reports.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import catalog, checks, duality, harmonic, hopf, lattice
from .errors import (
    ConventionFailure,
    CriteriaDisagree,
    InternalInconsistency,
    QuantumGroupError,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL = 3


@dataclasses.dataclass
class RunConfig:
    """One invocation's knobs; tolerances are validated on construction."""

    command: str
    path: str | None
    axiom_tol: float = 1e-12
    state_tol: float = 1e-9
    dedup_tol: float = lattice.DEFAULT_DEDUP_TOL
    conv_tol: float = lattice.DEFAULT_CONV_TOL
    n_max: int = lattice.DEFAULT_N_MAX
    restarts: int = lattice.DEFAULT_RESTARTS
    seed: int = lattice.DEFAULT_SEED
    fmt: str = "text"
    out: str | None = None
    strategy: str = "auto"
    name: str | None = None

    def __post_init__(self):
        for field in ("axiom_tol", "state_tol", "dedup_tol", "conv_tol"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{field.replace('_', '-')} must be positive")
        if self.n_max < 1:
            raise ValueError("n-max must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        tol = getattr(args, "tol", None)
        if tol is None:
            env = os.environ.get("QGLAB_TOL")
            tol = float(env) if env else 1e-9
        return cls(
            command=args.command,
            path=getattr(args, "file", None),
            axiom_tol=getattr(args, "axiom_tol", 1e-12),
            state_tol=tol,
            dedup_tol=getattr(args, "dedup_tol", lattice.DEFAULT_DEDUP_TOL),
            conv_tol=getattr(args, "conv_tol", lattice.DEFAULT_CONV_TOL),
            n_max=getattr(args, "n_max", lattice.DEFAULT_N_MAX),
            restarts=getattr(args, "restarts", lattice.DEFAULT_RESTARTS),
            seed=getattr(args, "seed", lattice.DEFAULT_SEED),
            fmt=getattr(args, "fmt", "text"),
            out=getattr(args, "out", None),
            strategy=getattr(args, "strategy", "auto"),
            name=getattr(args, "name", None),
        )


def _pairs(arr: np.ndarray):
    if arr.ndim == 1:
        return [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in arr]
    return [_pairs(sub) for sub in arr]


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(sub: argparse.ArgumentParser, with_file: bool = True) -> None:
    sub.add_argument("--tol", type=float, default=None,
                     help="tolerance for derived quantities "
                          "(default 1e-9, or QGLAB_TOL)")
    sub.add_argument("--axiom-tol", type=float, default=1e-12,
                     help="tolerance for structural axioms")
    sub.add_argument("--seed", type=int, default=lattice.DEFAULT_SEED,
                     help="seed for randomized searches")
    sub.add_argument("--conv-tol", type=float, default=lattice.DEFAULT_CONV_TOL,
                     help="convergence tolerance for iterative limits")
    sub.add_argument("--n-max", type=int, default=lattice.DEFAULT_N_MAX,
                     help="step cap for iterative limits")
    sub.add_argument("--format", choices=("json", "dot", "text"),
                     default="text", dest="fmt")
    sub.add_argument("--out", default=None, help="write output to this path")
    if with_file:
        sub.add_argument("file", help="quantum-group JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qglab",
        description="idempotent states, coideal lattices and duality "
                    "on finite quantum groups")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="check the structural axioms")
    _add_common(p)

    p = commands.add_parser("examples", help="write a built-in example as JSON")
    p.add_argument("name", choices=catalog.BUILTIN_NAMES)
    p.add_argument("--out", default=None)

    p = commands.add_parser("idempotents", help="enumerate idempotent states")
    _add_common(p)
    p.add_argument("--strategy", choices=("auto", "catalog", "search"),
                   default="auto")
    p.add_argument("--restarts", type=int, default=lattice.DEFAULT_RESTARTS)
    p.add_argument("--dedup-tol", type=float,
                   default=lattice.DEFAULT_DEDUP_TOL)

    p = commands.add_parser("lattice", help="order, tables and Hasse diagram")
    _add_common(p)
    p.add_argument("--strategy", choices=("auto", "catalog", "search"),
                   default="auto")
    p.add_argument("--restarts", type=int, default=lattice.DEFAULT_RESTARTS)

    p = commands.add_parser("dual", help="construct the dual quantum group")
    _add_common(p)

    p = commands.add_parser("check", help="run the full property suite")
    _add_common(p)
    p.add_argument("--restarts", type=int, default=lattice.DEFAULT_RESTARTS)

    return parser


def _load(config: RunConfig) -> hopf.FiniteQuantumGroup:
    if not config.path or not os.path.exists(config.path):
        raise hopf.ParseError(f"no such file: {config.path}")
    return hopf.load_path(config.path)


def _state_record(state) -> dict:
    return {
        "name": state.name,
        "coeffs": _pairs(state.coeffs),
        "q_perp": _pairs(state.q_perp),
        "coideal_dim": state.coideal.dim,
        "haar_type": bool(harmonic.haar_type_test(state)),
    }


def cmd_validate(config: RunConfig) -> int:
    group = _load(config)
    report = hopf.validate(hopf.with_haar(group), tol=config.axiom_tol)
    if config.fmt == "json":
        doc = {"tol": report.tol,
               "passed": report.passed,
               "checks": [{"name": c.name, "residual": c.residual,
                           "passed": c.passed} for c in report.checks]}
        _emit(_dumps(doc), config.out)
    else:
        _emit(str(report) + "\n", config.out)
    if not report.passed:
        sys.stderr.write(f"validation failed: {report.failing()[0]}\n")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_examples(config: RunConfig) -> int:
    group = catalog.builtin(config.name)
    out = config.out or f"{config.name}.json"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(hopf.save(group) + "\n")
    sys.stderr.write(f"wrote {out}\n")
    return EXIT_OK


def cmd_idempotents(config: RunConfig) -> int:
    group = _load(config)
    enum = lattice.enumerate_idempotents(
        group, strategy=config.strategy, restarts=config.restarts,
        seed=config.seed, dedup_tol=config.dedup_tol, tol=config.state_tol,
        conv_tol=config.conv_tol, n_max=config.n_max)
    doc = {
        "group_hash": hopf.group_hash(hopf.with_haar(group)),
        "report": {
            "strategy": enum.report.strategy,
            "recognized": enum.report.recognized,
            "restarts": enum.report.restarts,
            "seed": enum.report.seed,
            "coverage": enum.report.coverage,
        },
        "states": [_state_record(s) for s in enum.states],
    }
    if config.fmt == "json":
        _emit(_dumps(doc), config.out)
    else:
        lines = [f"{len(enum.states)} idempotent states "
                 f"({enum.report.strategy}, coverage: {enum.report.coverage})"]
        for s in doc["states"]:
            lines.append(f"  {s['name']:<16} coideal dim {s['coideal_dim']}  "
                         f"haar-type {'yes' if s['haar_type'] else 'no'}")
        _emit("\n".join(lines) + "\n", config.out)
    return EXIT_OK


def cmd_lattice(config: RunConfig) -> int:
    group = _load(config)
    enum = lattice.enumerate_idempotents(
        group, strategy=config.strategy, restarts=config.restarts,
        seed=config.seed, tol=config.state_tol, conv_tol=config.conv_tol,
        n_max=config.n_max)
    lat = lattice.build_lattice(enum.states, config.state_tol,
                                conv_tol=config.conv_tol, n_max=config.n_max)
    dot = lattice.to_dot(lat)
    if config.fmt == "dot":
        _emit(dot, config.out)
        return EXIT_OK
    doc = {
        "names": lat.names,
        "states": [_state_record(s) for s in lat.states],
        "order": lat.order.astype(int).tolist(),
        "meet": lat.meet_table.tolist(),
        "join": lat.join_table.tolist(),
        "hasse_edges": [list(e) for e in lat.hasse_edges],
        "dot": dot,
    }
    if config.fmt == "json":
        _emit(_dumps(doc), config.out)
    else:
        lines = [f"{len(lat.states)} states, {len(lat.hasse_edges)} cover edges"]
        for i, j in lat.hasse_edges:
            lines.append(f"  {lat.names[i]} < {lat.names[j]}")
        _emit("\n".join(lines) + "\n", config.out)
    return EXIT_OK


def cmd_dual(config: RunConfig) -> int:
    group = _load(config)
    pair = duality.dual(hopf.with_haar(group), config.state_tol)
    dual_json = hopf.save(pair.dual_group) + "\n"
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(dual_json)
    report = {
        "w_kind": pair.convention.w_kind,
        "comult_flip": pair.convention.comult_flip,
        "candidates_passing": list(pair.convention.candidates_passing),
        "residuals": {k: float(v) for k, v in
                      sorted(pair.convention.residuals.items())},
    }
    if config.fmt == "json":
        report["w"] = _pairs(pair.w)
        if not config.out:
            report["dual_group"] = json.loads(dual_json)
        sys.stdout.write(_dumps(report))
    else:
        lines = [f"convention: {report['w_kind']}, "
                 f"comult_flip={report['comult_flip']}"]
        for k, v in report["residuals"].items():
            lines.append(f"  {k:<24} {v:.2e}")
        if not config.out:
            lines.append(dual_json.strip())
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_check(config: RunConfig) -> int:
    group = _load(config)
    results = checks.run_all_checks(
        group, axiom_tol=config.axiom_tol, tol=config.state_tol,
        seed=config.seed, restarts=config.restarts)
    if config.fmt == "json":
        doc = [{"key": r.key, "passed": r.passed, "residual": r.residual,
                "detail": r.detail, "internal": r.internal} for r in results]
        _emit(_dumps(doc), config.out)
    else:
        _emit(checks.summary(results) + "\n", config.out)
    failing = [r for r in results if not r.passed]
    if any(r.internal for r in failing):
        sys.stderr.write(f"internal inconsistency: {failing[0].key}\n")
        return EXIT_INTERNAL
    if failing:
        sys.stderr.write(f"first failing check: {failing[0].key}\n")
        return EXIT_CHECK_FAILED
    return EXIT_OK


_DISPATCH = {
    "validate": cmd_validate,
    "examples": cmd_examples,
    "idempotents": cmd_idempotents,
    "lattice": cmd_lattice,
    "dual": cmd_dual,
    "check": cmd_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        return _DISPATCH[config.command](config)
    except (CriteriaDisagree, InternalInconsistency, ConventionFailure) as exc:
        sys.stderr.write(f"internal inconsistency: {exc}\n")
        return EXIT_INTERNAL
    except (QuantumGroupError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
