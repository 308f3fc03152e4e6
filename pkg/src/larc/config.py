"""Run configuration: JSON ingestion, validation, defaults, echoing.

Every report echoes the effective configuration (defaults applied, seed
overrides resolved) plus its hash, so identical inputs produce
byte-identical reports and any report can be traced back to its inputs.
"""

import json
from dataclasses import dataclass

from .errors import ConfigError
from .jsonutil import structure_hash
from .matrixcore import matrix_from_obj, matrix_to_obj
from .model import ControlSet, Exhaustive, Grid, HamiltonianModel, Random

DEFAULT_TOLERANCES = {
    "rank_tol": 1e-9,
    "closure_tol": 1e-9,
    "eps_V": 1e-6,
    "jac_tol": 1e-6,
    "eps": 1e-6,
}

DEFAULT_BUDGETS = {
    "recurrence": 10_000_000,
    "powers": 1_000_000,
    "newton_iters": 100,
    "conjugator_tries": 1000,
}


@dataclass
class RunConfig:
    model: HamiltonianModel
    control_set: ControlSet
    strategy: object
    tolerances: dict
    budgets: dict
    seed: int
    sampling_obj: dict

    def echo_obj(self) -> dict:
        """Effective configuration as echoed into reports."""
        return {
            "n": self.model.n,
            "m": self.model.m,
            "model": model_to_obj(self.model),
            "control_set": control_set_to_obj(self.control_set),
            "sampling": dict(self.sampling_obj),
            "tolerances": dict(self.tolerances),
            "budgets": dict(self.budgets),
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        return structure_hash(self.echo_obj())


def _fail(path, message):
    raise ConfigError(f"{path}: {message}")


def _expect(obj, path, typ, what):
    if not isinstance(obj, typ):
        _fail(path, f"expected {what}, got {type(obj).__name__}")
    return obj


def model_from_obj(obj, n, m, path="model") -> HamiltonianModel:
    _expect(obj, path, dict, "an object")
    kind = obj.get("type")
    try:
        if kind == "polynomial":
            terms = _expect(obj.get("terms"), f"{path}.terms", list, "a list of terms")
            parsed = []
            for i, term in enumerate(terms):
                tp = f"{path}.terms[{i}]"
                _expect(term, tp, dict, "an object")
                exps = _expect(term.get("exponents"), f"{tp}.exponents", list, "a list of integers")
                M = matrix_from_obj(_expect(term.get("matrix"), f"{tp}.matrix", dict, "a matrix object"))
                parsed.append((tuple(int(e) for e in exps), M))
            return HamiltonianModel(n, m, "polynomial", parsed)
        if kind == "tabulated":
            pts = _expect(obj.get("points"), f"{path}.points", list, "a list of points")
            parsed = []
            for i, entry in enumerate(pts):
                tp = f"{path}.points[{i}]"
                _expect(entry, tp, dict, "an object")
                u = _expect(entry.get("u"), f"{tp}.u", list, "a control vector")
                M = matrix_from_obj(_expect(entry.get("matrix"), f"{tp}.matrix", dict, "a matrix object"))
                parsed.append((tuple(float(x) for x in u), M))
            return HamiltonianModel(n, m, "tabulated", parsed)
    except (ValueError, TypeError) as exc:
        _fail(path, str(exc))
    _fail(f"{path}.type", f'must be "polynomial" or "tabulated", got {kind!r}')


def model_to_obj(model) -> dict:
    if model.kind == "polynomial":
        return {"type": "polynomial",
                "terms": [{"exponents": list(e), "matrix": matrix_to_obj(M)}
                          for e, M in model.terms]}
    return {"type": "tabulated",
            "points": [{"u": list(u), "matrix": matrix_to_obj(M)} for u, M in model.terms]}


def control_set_from_obj(obj, seed, path="control_set") -> ControlSet:
    _expect(obj, path, dict, "an object")
    kind = obj.get("type")
    try:
        if kind == "box":
            lower = _expect(obj.get("lower"), f"{path}.lower", list, "a list of numbers")
            upper = _expect(obj.get("upper"), f"{path}.upper", list, "a list of numbers")
            return ControlSet.box(lower, upper, sampler_seed=seed)
        if kind == "finite":
            points = _expect(obj.get("points"), f"{path}.points", list, "a list of control vectors")
            return ControlSet.finite(points, sampler_seed=seed)
    except (ValueError, TypeError) as exc:
        _fail(path, str(exc))
    _fail(f"{path}.type", f'must be "box" or "finite", got {kind!r}')


def control_set_to_obj(cs) -> dict:
    if cs.kind == "box":
        return {"type": "box", "lower": list(cs.lower), "upper": list(cs.upper)}
    return {"type": "finite", "points": [list(p) for p in cs.points]}


def _strategy_from_obj(obj, control_set, path="sampling"):
    if obj is None:
        if control_set.kind == "finite":
            obj = {"strategy": "exhaustive"}
        else:
            obj = {"strategy": "grid", "points_per_axis": 5}
    _expect(obj, path, dict, "an object")
    name = obj.get("strategy")
    if name == "exhaustive":
        return Exhaustive(), {"strategy": "exhaustive"}
    if name == "grid":
        k = obj.get("points_per_axis", 5)
        if not isinstance(k, int) or k < 1:
            _fail(f"{path}.points_per_axis", f"must be a positive integer, got {k!r}")
        return Grid(points_per_axis=k), {"strategy": "grid", "points_per_axis": k}
    if name == "random":
        count = obj.get("count", 512)
        if not isinstance(count, int) or count < 1:
            _fail(f"{path}.count", f"must be a positive integer, got {count!r}")
        echo = {"strategy": "random", "count": count}
        window = obj.get("stabilization_window")
        if window is not None:
            if not isinstance(window, int) or window < 1:
                _fail(f"{path}.stabilization_window", f"must be a positive integer, got {window!r}")
            echo["stabilization_window"] = window
        return Random(count=count), echo
    _fail(f"{path}.strategy", f'must be "grid", "random" or "exhaustive", got {name!r}')


def parse_config(obj, seed_override=None) -> RunConfig:
    _expect(obj, "config", dict, "an object")
    n = obj.get("n")
    m = obj.get("m")
    if not isinstance(n, int) or n < 1:
        _fail("config.n", f"must be a positive integer, got {n!r}")
    if not isinstance(m, int) or m < 1:
        _fail("config.m", f"must be a positive integer, got {m!r}")

    seed = obj.get("seed", 0)
    if not isinstance(seed, int):
        _fail("config.seed", f"must be an integer, got {seed!r}")
    if seed_override is not None:
        seed = int(seed_override)

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in _expect(obj.get("tolerances", {}), "config.tolerances", dict, "an object").items():
        if key not in DEFAULT_TOLERANCES:
            _fail(f"config.tolerances.{key}", "unknown tolerance")
        if not isinstance(value, (int, float)) or value <= 0:
            _fail(f"config.tolerances.{key}", f"must be a positive number, got {value!r}")
        tolerances[key] = float(value)

    budgets = dict(DEFAULT_BUDGETS)
    for key, value in _expect(obj.get("budgets", {}), "config.budgets", dict, "an object").items():
        if key not in DEFAULT_BUDGETS:
            _fail(f"config.budgets.{key}", "unknown budget")
        if not isinstance(value, int) or value < 1:
            _fail(f"config.budgets.{key}", f"must be a positive integer, got {value!r}")
        budgets[key] = value

    if "model" not in obj:
        _fail("config.model", "missing")
    if "control_set" not in obj:
        _fail("config.control_set", "missing")
    model = model_from_obj(obj["model"], n, m, path="config.model")
    control_set = control_set_from_obj(obj["control_set"], seed, path="config.control_set")
    if control_set.m != m:
        _fail("config.control_set", f"control arity {control_set.m} does not match m = {m}")
    strategy, sampling_obj = _strategy_from_obj(obj.get("sampling"), control_set, path="config.sampling")

    return RunConfig(model=model, control_set=control_set, strategy=strategy,
                     tolerances=tolerances, budgets=budgets, seed=seed,
                     sampling_obj=sampling_obj)


def load_config(path, seed_override=None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(obj, seed_override=seed_override)


def config_to_obj(model, control_set, seed=0, sampling=None, tolerances=None, budgets=None) -> dict:
    """Assemble a config object (used to generate the bundled corpus)."""
    obj = {
        "n": model.n,
        "m": model.m,
        "model": model_to_obj(model),
        "control_set": control_set_to_obj(control_set),
        "seed": seed,
    }
    if sampling is not None:
        obj["sampling"] = sampling
    if tolerances:
        obj["tolerances"] = tolerances
    if budgets:
        obj["budgets"] = budgets
    return obj
