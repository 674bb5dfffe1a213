"""Batch experiment runner: config records in, deterministic results out.

Every CLI subcommand builds one :class:`ExperimentConfig` and hands it to
:func:`run`, which dispatches to exactly one library operation. The seed
fully determines all randomness, so identical configs produce identical
outputs (the runtime field is excluded from the determinism contract).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import compactness, extrapolation, spaces, weights
from .exponents import INF, as_exponent, rational_json
from .grids import Grid, GridFunction
from .maximal import cz_sparse_family, iterate_maximal, sparse_operator, verify_sparse
from .maximal import maximal as maximal_operator
from .random_functions import random_function, random_nonnegative, random_weight
from .weights import Weight

CONFIG_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    dimension: int = 1
    depth: int = 8
    lattice: str = "dyadic"
    params: dict = field(default_factory=dict)
    version: int = CONFIG_VERSION

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "dimension": self.dimension,
            "depth": self.depth,
            "lattice": self.lattice,
            "params": self.params,
            "version": self.version,
        }

    @staticmethod
    def from_json(obj: dict) -> "ExperimentConfig":
        return ExperimentConfig(
            kind=obj["kind"],
            seed=obj.get("seed", 0),
            dimension=obj.get("dimension", 1),
            depth=obj.get("depth", 8),
            lattice=obj.get("lattice", "dyadic"),
            params=obj.get("params", {}),
            version=obj.get("version", CONFIG_VERSION),
        )

    def hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class ResultRecord:
    config_hash: str
    outputs: dict
    checks: dict[str, bool]
    runtime: float

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def outputs_hash(self) -> str:
        payload = json.dumps(self.outputs, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_json(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "outputs": self.outputs,
            "checks": self.checks,
            "passed": self.passed,
            "runtime_seconds": self.runtime,
        }


# ---------------------------------------------------------------------------
# sources: weights, functions, and space specs from config strings
# ---------------------------------------------------------------------------


def weight_from_spec(spec: str, grid: Grid, rng: np.random.Generator) -> Weight:
    """unit | lognormal[(sigma)] | power(alpha[,center]) | @path(.json/.csv)"""
    if spec == "unit":
        return Weight.unit(grid)
    if spec.startswith("lognormal"):
        sigma = _parens_args(spec, [1.0])[0]
        return random_weight(grid, rng, sigma)
    if spec.startswith("power"):
        args = _parens_args(spec, [0.5, 0.0])
        return weights.power_weight(grid, args[0], args[1])
    if spec.startswith("@"):
        return Weight.from_function(_load_grid_function(spec[1:]))
    raise ValueError(f"unknown weight source {spec!r}")


def function_from_spec(spec: str, grid: Grid, rng: np.random.Generator) -> GridFunction:
    """random | nonneg | indicator(level,flat_index) | constant(c) | @path"""
    if spec == "random":
        return random_function(grid, rng)
    if spec == "nonneg":
        return random_nonnegative(grid, rng)
    if spec.startswith("constant"):
        return GridFunction.constant(grid, _parens_args(spec, [1.0])[0])
    if spec.startswith("indicator"):
        level, flat = (int(v) for v in _parens_args(spec, [0, 0]))
        from .grids import DyadicCube

        shape = (1 << level,) * grid.dimension
        idx = np.unravel_index(flat, shape)
        cube = DyadicCube(level, tuple(int(i) for i in idx))
        return GridFunction(grid, cube.cell_mask(grid).astype(float), nonnegative=True)
    if spec.startswith("@"):
        return _load_grid_function(spec[1:])
    raise ValueError(f"unknown function source {spec!r}")


def _split_fields(text: str) -> list[str]:
    """Split on commas that are not nested inside parentheses."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p for p in parts if p]


def space_from_spec(spec: str, grid: Grid, rng: np.random.Generator) -> spaces.SpaceSpec:
    """weighted:p=<rational>,w=<weight spec> | variable:p=<function spec>,w=<weight spec>"""
    kind, _, rest = spec.partition(":")
    fields = dict(item.split("=", 1) for item in _split_fields(rest))
    w = weight_from_spec(fields.get("w", "unit"), grid, rng)
    if kind == "weighted":
        return spaces.WeightedLebesgue(as_exponent(fields["p"]), w)
    if kind == "variable":
        p = function_from_spec(fields["p"], grid, rng)
        return spaces.VariableLebesgue(p, w)
    raise ValueError(f"unknown space kind {kind!r}")


def _parens_args(spec: str, defaults: list) -> list:
    if "(" not in spec:
        return defaults
    inner = spec[spec.index("(") + 1 : spec.rindex(")")]
    parts = [p for p in inner.split(",") if p]
    out = list(defaults)
    for i, part in enumerate(parts):
        out[i] = float(part)
    return out


def _load_grid_function(path: str) -> GridFunction:
    text = open(path).read()
    if path.endswith(".csv"):
        return GridFunction.from_csv(text)
    return GridFunction.from_json(text)


# ---------------------------------------------------------------------------
# experiment handlers
# ---------------------------------------------------------------------------


def _run_weights(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    grid = Grid(config.dimension, config.depth)
    w = weight_from_spec(config.params.get("weight", "lognormal"), grid, rng)
    p = as_exponent(config.params.get("p", 2))
    r = config.params.get("r")
    s = config.params.get("s")
    r = as_exponent(r) if r is not None else None
    s = (INF if s in ("inf", "oo") else as_exponent(s)) if s is not None else None
    constants = weights.weight_constants(w, p, r, s, config.lattice)
    checks = {
        "ap_at_least_1": constants.ap >= 1.0 - 1e-12,
        "ainf_at_least_1": constants.ainf >= 1.0 - 1e-12,
    }
    return constants.to_json(), checks


def _run_maximal(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    grid = Grid(config.dimension, config.depth)
    f = function_from_spec(config.params.get("f", "random"), grid, rng)
    k = int(config.params.get("iterations", 1))
    out = iterate_maximal(f, k, config.lattice)
    checks = {}
    if k >= 1:
        checks["dominates_abs"] = bool(np.all(out.values >= np.abs(f.values) - 1e-14))
    return {"d": grid.dimension, "L": grid.depth, "values": out.flat().tolist()}, checks


def _run_sparse(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    grid = Grid(config.dimension, config.depth)
    f = function_from_spec(config.params.get("f", "nonneg"), grid, rng)
    f = abs(f)
    a = float(config.params.get("a", 2.0))
    family = cz_sparse_family(f, a)
    verdict = verify_sparse(family)
    mf = maximal_operator(f)
    tf = sparse_operator(family, f)
    dominated = bool(np.all(mf.values <= a * tf.values + 1e-12))
    outputs = {
        "family": family.to_json(),
        "cube_count": len(family),
        "sparse_valid": verdict.ok,
        "domination_factor": a,
    }
    return outputs, {"sparse_valid": verdict.ok, "pointwise_domination": dominated}


def _run_norm(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    grid = Grid(config.dimension, config.depth)
    spec = space_from_spec(config.params["space"], grid, rng)
    f = function_from_spec(config.params.get("f", "random"), grid, rng)
    value = spaces.space_norm(spec, f)
    trace = [{"op": "parse_space", "source": config.params["space"], **spec.describe()}]
    outputs = {"norm": value, "kind": spec.kind, "trace": trace}
    checks = {"nonnegative": value >= 0.0}
    if spec.kind == "variable" and value > 0:
        mod = spaces.modular(spec, f, scale=value)
        outputs["modular_at_norm"] = mod
        checks["luxembourg_consistent"] = abs(mod - 1.0) <= 1e-8
    return outputs, checks


def _run_rescale(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    grid = Grid(config.dimension, config.depth)
    spec = space_from_spec(config.params["space"], grid, rng)
    r = as_exponent(config.params["r"])
    s_raw = config.params["s"]
    s = INF if s_raw in ("inf", "oo") else as_exponent(s_raw)
    result = spaces.rescale_spec(spec, r, s)
    outputs = {
        "space": result.spec.describe(),
        "trace": [{"op": step.op, "params": [str(p) for p in step.params]} for step in result.trace],
        "chain_verified": result.chain_verified,
        "note": result.note,
    }
    return outputs, {"chain_consistent": result.chain_verified or bool(result.note)}


def _run_rdf(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    grid = Grid(config.dimension, config.depth)
    f = function_from_spec(config.params.get("f", "nonneg"), grid, rng)
    r = float(config.params.get("r", 2.0))
    depth = int(config.params.get("iterations", 40))
    bound_param = config.params.get("bound", "auto")
    if bound_param == "auto":
        cd = extrapolation.default_cd(grid.dimension)
        bound = extrapolation.buckley_bound(2, 1.0, dimensional_constant=2 * cd)
    else:
        bound = float(bound_param)
    built = extrapolation.rdf_weight(f, r, bound, depth)
    mw = maximal_operator(built.values)
    a1 = bool(
        np.all(mw.values <= 2.0 * bound * built.values.values + built.tail_bound + 1e-12)
    )
    dominates = bool(np.all(built.values.values >= built.seed.values))
    outputs = {
        "bound": bound,
        "iterations": depth,
        "tail_bound": built.tail_bound,
        "values": built.values.flat().tolist(),
    }
    return outputs, {"dominates_seed": dominates, "pointwise_a1": a1}


def _run_selfimprove(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    bound = as_exponent(config.params.get("bound", 2))
    r_star = as_exponent(config.params.get("r_star", 2))
    cd = as_exponent(config.params.get("c_d", 4))
    r0 = extrapolation.self_improvement_r0(bound, r_star, cd)
    outputs = {"r0": rational_json(r0)}
    return outputs, {"in_range": bool(1 < r0 <= r_star)}


def _run_lrplan(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    p = config.params
    def exp_of(key, default=None):
        raw = p.get(key, default)
        if raw is None:
            return None
        return INF if raw in ("inf", "oo") else as_exponent(raw)

    plan = extrapolation.limited_range_plan(
        exp_of("r1"), exp_of("s1"), exp_of("r2"), exp_of("s2"), exp_of("p1"),
        epsilon=exp_of("epsilon"),
    )
    return plan.to_json(), {"identity_checked": plan.epsilon is None or plan.identity_checked}


def _run_probe(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    p = config.params
    kind = p.get("kernel", "hilbert")
    kernel = _kernel_from_spec(kind, config.dimension)
    depths = [int(d) for d in p.get("depths", [6, 7, 8])]
    tails = [int(t) for t in p.get("tails", [8, 16, 32])]
    symbol = p.get("symbol", "bump")
    weight_spec = p.get("weight", "unit")
    symbol_params = p.get("symbol_params")
    if symbol.startswith("@"):
        custom = _load_grid_function(symbol[1:])
        if depths != [custom.grid.depth]:
            raise ValueError(
                f"file symbol lives at depth {custom.grid.depth}; "
                f"--depths must name exactly that depth, got {depths}"
            )
        symbol, symbol_params = "custom", {"values": custom}

    def weight_builder(grid: Grid) -> Weight:
        return weight_from_spec(weight_spec, grid, np.random.default_rng(config.seed))

    profiles = compactness.refinement_profiles(
        kernel, symbol, depths, tails,
        weight_builder=weight_builder,
        symbol_params=symbol_params,
    )
    rows = [row for prof in profiles for row in prof.to_rows()]
    curve_cap = 4 * max(tails)
    outputs = {
        "rows": [{"depth": d, "k": k, "ratio": v} for d, k, v in rows],
        "curves": {str(prof.depth): prof.sigma[:curve_cap].tolist() for prof in profiles},
        "symbol": symbol,
        "kernel": kind,
    }
    monotone = all(r >= 0 for _, _, r in rows)
    return outputs, {"ratios_nonnegative": monotone}


def _kernel_from_spec(kind: str, dimension: int) -> compactness.KernelSpec:
    if kind == "hilbert":
        return compactness.KernelSpec("hilbert", 1)
    if kind == "rough":
        if dimension == 1:
            return compactness.KernelSpec("rough", 1, omega_pair=(1.0, -1.0))
        return compactness.KernelSpec("rough", 2, cos_coeffs=(1.0,))
    if kind == "dini":
        return compactness.KernelSpec("dini", dimension)
    raise ValueError(f"unknown kernel {kind!r}")


def _run_acceptance(config: ExperimentConfig, rng) -> tuple[dict, dict]:
    from .acceptance import run_all

    results = run_all()
    outputs = {
        "criteria": [
            {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
        ]
    }
    checks = {r.name: r.passed for r in results}
    return outputs, checks


_HANDLERS: dict[str, Callable] = {
    "weights": _run_weights,
    "maximal": _run_maximal,
    "sparse": _run_sparse,
    "norm": _run_norm,
    "rescale": _run_rescale,
    "rdf": _run_rdf,
    "selfimprove": _run_selfimprove,
    "lrplan": _run_lrplan,
    "probe-compactness": _run_probe,
    "acceptance": _run_acceptance,
}


def run(config: ExperimentConfig) -> ResultRecord:
    """Dispatch a config to its experiment; unknown kinds are named in the error."""
    handler = _HANDLERS.get(config.kind)
    if handler is None:
        raise ValueError(
            f"unknown experiment kind {config.kind!r}; known: {sorted(_HANDLERS)}"
        )
    rng = np.random.default_rng(config.seed)
    start = time.perf_counter()
    outputs, checks = handler(config, rng)
    runtime = time.perf_counter() - start
    return ResultRecord(
        config_hash=config.hash(), outputs=outputs, checks=checks, runtime=runtime
    )
