"""Batch front door: analyze / synthesize / verify / oracle / density.

Reports are emitted as deterministic JSON on stdout (one human-readable
summary line goes to stderr), so identical inputs produce byte-identical
reports.  Exit codes: 0 success, 1 internal error, 2 config or input
validation error, 3 membership rejection, 4 budget exhaustion.

The environment variable ``LARC_SEED`` overrides the config seed.
"""

import argparse
import os
import sys

from . import __version__
from .closure import classify, closure_report, lie_closure
from .config import load_config
from .errors import (
    BudgetExceeded,
    ChartFailure,
    ConfigError,
    LarcError,
    MembershipRejected,
    MixedSupport,
)
from .jsonutil import dumps, load_json, write_json
from .matrixcore import fro_norm, read_matrix
from .model import sample_generators, select_independent
from .oracle import pauli_closure_dimension
from .synthesis import (
    BudgetMeter,
    ControlProgram,
    build_chart,
    density_sampler,
    propagate_program,
    synthesize,
)


def _seed_override():
    env = os.environ.get("LARC_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"LARC_SEED must be an integer, got {env!r}") from exc


def _meta(cfg) -> dict:
    return {
        "artifact_version": __version__,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "tolerances": dict(cfg.tolerances),
        "budgets": dict(cfg.budgets),
    }


def _print_report(report) -> None:
    sys.stdout.write(dumps(report, indent=1) + "\n")


def _summary(line) -> None:
    print(line, file=sys.stderr)


def _load_matrix_input(path):
    try:
        return read_matrix(path)
    except OSError as exc:
        raise ConfigError(f"cannot read matrix {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _analysis(cfg):
    window = cfg.sampling_obj.get("stabilization_window")
    raw = sample_generators(cfg.model, cfg.control_set, cfg.strategy,
                            rank_tol=cfg.tolerances["rank_tol"],
                            stabilization_window=window)
    gens = select_independent(raw, rank_tol=cfg.tolerances["rank_tol"])
    if gens.span_dimension == 0:
        return gens, None, None
    basis = lie_closure(gens, closure_tol=cfg.tolerances["closure_tol"])
    return gens, basis, classify(basis)


def _analysis_report(cfg, gens, basis, verdict) -> dict:
    sampling = {
        **cfg.sampling_obj,
        "span_dimension": gens.span_dimension,
        "all_zero": gens.all_zero,
        "control_points": [list(map(float, u)) for u in gens.control_points],
    }
    if gens.stabilization_window is not None:
        sampling["stabilization_window"] = gens.stabilization_window
    return {
        "meta": _meta(cfg),
        "sampling": sampling,
        "closure": closure_report(basis, verdict) if basis is not None else None,
    }


def cmd_analyze(args) -> int:
    cfg = load_config(args.config, seed_override=_seed_override())
    gens, basis, verdict = _analysis(cfg)
    _print_report(_analysis_report(cfg, gens, basis, verdict))
    if verdict is None:
        _summary("reachable set = {I}: every sampled generator vanished (warning)")
    else:
        _summary(f"reachable set = e^𝓛, dim 𝓛 = {verdict.d}, verdict = {verdict.kind}")
    return 0


def cmd_synthesize(args) -> int:
    cfg = load_config(args.config, seed_override=_seed_override())
    target = _load_matrix_input(args.target)
    eps = args.eps if args.eps is not None else cfg.tolerances["eps"]
    if eps <= 0:
        raise ConfigError(f"--eps must be positive, got {eps}")
    gens, basis, verdict = _analysis(cfg)
    if basis is None:
        raise ConfigError("analysis produced an empty generator set; nothing is reachable")
    meter = BudgetMeter()
    try:
        chart = build_chart(
            gens, basis,
            eps_V=cfg.tolerances["eps_V"],
            seed=cfg.seed,
            jac_tol=cfg.tolerances["jac_tol"],
            conjugator_tries=cfg.budgets["conjugator_tries"],
            recurrence_budget=cfg.budgets["recurrence"],
            newton_iters=cfg.budgets["newton_iters"],
            meter=meter,
        )
        result = synthesize(
            cfg.model, gens, basis, chart, target, eps=eps,
            power_budget=cfg.budgets["powers"],
            newton_iters=cfg.budgets["newton_iters"],
            meter=meter,
        )
    except (BudgetExceeded, ChartFailure) as exc:
        report = {
            "meta": _meta(cfg),
            "error": None,
            "failure": str(exc),
            "budget": meter.snapshot(),
        }
        if isinstance(exc, BudgetExceeded) and exc.best_error is not None:
            report["best_error"] = exc.best_error
        _print_report(report)
        _summary(f"synthesis failed on budget: {exc}")
        return 4

    report = {
        "meta": _meta(cfg),
        "error": result.error,
        "total_duration": result.program.total_duration,
        "steps": result.steps,
        "budget": result.budget_spent,
        "program": result.program.to_obj(),
    }
    _print_report(report)
    if args.out:
        write_json(args.out, result.program.to_obj())
    verified = fro_norm(propagate_program(cfg.model, result.program) - result.achieved) == 0.0
    ok = result.error < eps and verified
    _summary(
        f"synthesized to error {result.error:.3e} in {result.steps} steps, "
        f"{len(result.program.segments)} segments, total duration {result.program.total_duration:.6g}"
    )
    return 0 if ok else 1


def cmd_verify(args) -> int:
    cfg = load_config(args.config, seed_override=_seed_override())
    target = _load_matrix_input(args.target)
    try:
        program = ControlProgram.from_obj(load_json(args.program))
    except OSError as exc:
        raise ConfigError(f"cannot read program {args.program}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{args.program}: {exc}") from exc
    eps = args.eps if args.eps is not None else cfg.tolerances["eps"]
    achieved = propagate_program(cfg.model, program)
    error = fro_norm(achieved - target)
    report = {
        "meta": _meta(cfg),
        "error": error,
        "eps": eps,
        "passed": error < eps,
        "segments": len(program.segments),
        "total_duration": program.total_duration,
    }
    _print_report(report)
    _summary(f"re-propagated program: error {error:.3e} ({'pass' if error < eps else 'FAIL'} at eps {eps:g})")
    return 0 if error < eps else 1


def cmd_oracle(args) -> int:
    try:
        obj = load_json(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{args.input}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "qubits" not in obj or "generators" not in obj:
        raise ConfigError(f'{args.input}: expected {{"qubits": q, "generators": [...]}}')
    try:
        dim, strings = pauli_closure_dimension(obj["generators"], q=obj["qubits"])
    except ValueError as exc:
        raise ConfigError(f"{args.input}: {exc}") from exc
    _print_report({"dimension": dim, "strings": strings})
    _summary(f"exact closure: {dim} Pauli strings")
    return 0


def cmd_density(args) -> int:
    cfg = load_config(args.config, seed_override=_seed_override())
    if args.samples < 1:
        raise ConfigError("--samples must be at least 1")
    if args.horizon < 0:
        raise ConfigError("--horizon must be nonnegative")
    gens, basis, verdict = _analysis(cfg)
    if basis is None:
        raise ConfigError("analysis produced an empty generator set; nothing is reachable")
    stats = density_sampler(cfg.model, cfg.control_set, basis,
                            num_samples=args.samples, horizon=args.horizon,
                            seed=cfg.seed, num_probes=args.probes)
    _print_report({"meta": _meta(cfg), "density": stats})
    _summary(
        f"covering distances over {args.probes} probes: "
        f"min {stats['min_distance']:.3e}, mean {stats['mean_distance']:.3e}, max {stats['max_distance']:.3e}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="larc",
        description="Controllability analysis and unitary synthesis for quantum control systems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="sample generators, close the algebra, classify reachability")
    p.add_argument("config")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("synthesize", help="synthesize a control program reaching a target unitary")
    p.add_argument("config")
    p.add_argument("--target", required=True, help="target unitary (matrix JSON file)")
    p.add_argument("--eps", type=float, default=None, help="synthesis accuracy (default: config eps)")
    p.add_argument("--out", default="program.json", help="program output file (default program.json)")
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("verify", help="re-propagate a program and compare against a target")
    p.add_argument("config")
    p.add_argument("program")
    p.add_argument("--target", required=True)
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("oracle", help="exact Pauli-string closure dimension")
    p.add_argument("input", help='JSON file {"qubits": q, "generators": [["XZ"], ...]}')
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("density", help="covering statistics of random programs")
    p.add_argument("config")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--probes", type=int, default=100)
    p.set_defaults(handler=cmd_density)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MixedSupport as exc:
        print(f"oracle declined: {exc}", file=sys.stderr)
        return 2
    except MembershipRejected as exc:
        msg = f"membership rejected: {exc}"
        if exc.residual is not None:
            msg += f" (residual {exc.residual:.3e})"
        print(msg, file=sys.stderr)
        return 3
    except (BudgetExceeded, ChartFailure) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 4
    except LarcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
