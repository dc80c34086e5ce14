"""Batch front-end: JSON config in, canonical JSON report (and DOT diagram)
out, with a strict exit-code contract.

Exit codes: 0 = task ran and every asserted invariant held; 1 = task failed
or errored; 2 = the configuration did not validate.  Reports are byte-stable
functions of the config bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cones import SelfDualCone, orthant, tensor_cone
from .errors import ConecalcError, IoError, SchemaError
from .inheritance import (
    ArrowChain,
    ChainNode,
    Embedding,
    append_factor_embedding,
    identity_embedding,
    verify_chain,
)
from .jsonio import canonical_dumps, matrix_from_json, vector_from_json
from .lattice import LatticeSpec, build_lattice, hasse_export, verify_spec
from .numerics import DEFAULT_TOL, LinearOperator, kron, identity
from .positivity import classify, is_ergodic
from .semigroup import trotter_verify
from .spin import SpinSystem, verify_mlm
from .stability import (
    StabilityClassRecord,
    extension_tower,
    good_quantum_number,
    ground_state_factorizes,
    is_decoupled_extension,
    quantum_number_along_chain,
)

TASKS = ("classify", "mu", "chain", "lattice", "trotter", "spin-demo",
         "richness", "weak-equiv", "stability")

# these exception types mean "the verification ran and said no", not "crash"
_FAIL_STATUS = ConecalcError


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


@dataclass
class RunContext:
    """Resolved registries of one run configuration."""

    spaces: dict[str, int] = field(default_factory=dict)
    operators: dict[str, LinearOperator] = field(default_factory=dict)
    cones: dict[str, SelfDualCone] = field(default_factory=dict)
    embeddings: dict[str, Embedding] = field(default_factory=dict)
    tol: float = DEFAULT_TOL

    def space_dim(self, name) -> int:
        _require(isinstance(name, str) and name in self.spaces,
                 f"unknown space id {name!r}")
        return self.spaces[name]

    def operator(self, name) -> LinearOperator:
        _require(isinstance(name, str) and name in self.operators,
                 f"unknown operator id {name!r}")
        return self.operators[name]

    def cone(self, name) -> SelfDualCone:
        _require(isinstance(name, str) and name in self.cones,
                 f"unknown cone id {name!r}")
        return self.cones[name]

    def embedding(self, name) -> Embedding:
        _require(isinstance(name, str) and name in self.embeddings,
                 f"unknown embedding id {name!r}")
        return self.embeddings[name]


def _build_context(config: dict, tol_override: float | None) -> RunContext:
    ctx = RunContext()
    spaces = config.get("spaces", {})
    _require(isinstance(spaces, dict), "spaces must map names to dimensions")
    for name, dim in spaces.items():
        _require(isinstance(dim, int) and dim >= 1, f"space {name!r} has bad dimension")
        ctx.spaces[name] = dim

    for spec in config.get("operators", []):
        _require(isinstance(spec, dict) and "name" in spec and "space" in spec,
                 "operator entries need 'name' and 'space'")
        dim = ctx.space_dim(spec["space"])
        if spec.get("kind") == "identity":
            mat = np.eye(dim)
        else:
            _require("entries" in spec, f"operator {spec['name']!r} has no entries")
            mat = matrix_from_json(spec["entries"], f"operator {spec['name']!r}")
        _require(mat.shape == (dim, dim),
                 f"operator {spec['name']!r} does not match space dim {dim}")
        ctx.operators[spec["name"]] = LinearOperator(spec["space"], mat)

    for spec in config.get("cones", []):
        _require(isinstance(spec, dict) and "name" in spec, "cone entries need 'name'")
        kind = spec.get("kind", "orthant")
        if kind == "orthant":
            dim = ctx.space_dim(spec.get("space"))
            cone = orthant(spec["space"], dim, spec.get("label", ""))
        elif kind == "tensor":
            parts = spec.get("parts", [])
            _require(isinstance(parts, list) and len(parts) >= 2,
                     f"tensor cone {spec['name']!r} needs >= 2 parts")
            cone = ctx.cone(parts[0])
            for part in parts[1:]:
                cone = tensor_cone(cone, ctx.cone(part))
        elif kind == "explicit":
            _require("space" in spec and "generators" in spec,
                     f"explicit cone {spec['name']!r} needs space and generators")
            gens = np.column_stack([
                vector_from_json(g, f"cone {spec['name']!r}") for g in spec["generators"]
            ])
            cone = SelfDualCone(spec["space"], gens, spec.get("label", ""))
        else:
            raise SchemaError(f"unknown cone kind {kind!r}")
        ctx.cones[spec["name"]] = cone

    for spec in config.get("embeddings", []):
        _require(isinstance(spec, dict) and "name" in spec, "embedding entries need 'name'")
        kind = spec.get("kind", "isometry")
        if kind == "identity":
            dim = ctx.space_dim(spec.get("space"))
            emb = identity_embedding(spec["space"], dim)
        elif kind == "append_vector":
            _require(all(k in spec for k in ("from_space", "to_space", "vector")),
                     f"embedding {spec['name']!r} needs from_space, to_space, vector")
            vec = vector_from_json(spec["vector"], f"embedding {spec['name']!r}")
            dim = ctx.space_dim(spec["from_space"])
            _require(ctx.space_dim(spec["to_space"]) == dim * vec.size,
                     f"embedding {spec['name']!r}: to_space dim must be {dim * vec.size}")
            emb = append_factor_embedding(spec["from_space"], spec["to_space"], dim, vec)
        elif kind == "isometry":
            _require(all(k in spec for k in ("from_space", "to_space", "matrix")),
                     f"embedding {spec['name']!r} needs from_space, to_space, matrix")
            mat = matrix_from_json(spec["matrix"], f"embedding {spec['name']!r}")
            _require(mat.shape == (ctx.space_dim(spec["to_space"]),
                                   ctx.space_dim(spec["from_space"])),
                     f"embedding {spec['name']!r} has mismatched shape")
            emb = Embedding(spec["from_space"], spec["to_space"], mat)
        else:
            raise SchemaError(f"unknown embedding kind {kind!r}")
        ctx.embeddings[spec["name"]] = emb

    tolerances = config.get("tolerances", {})
    _require(isinstance(tolerances, dict), "tolerances must be a mapping")
    ctx.tol = float(tolerances.get("default", DEFAULT_TOL))
    if tol_override is not None:
        ctx.tol = tol_override
    return ctx


def _task_classify(ctx: RunContext, params: dict):
    op = ctx.operator(params.get("operator"))
    cone = ctx.cone(params.get("cone"))
    report = classify(op, cone, ctx.tol)
    payload = report.to_payload()
    if report.preserving:
        payload["ergodicity"] = is_ergodic(op, cone, ctx.tol).to_payload()
    return True, payload


def _task_mu(ctx: RunContext, params: dict):
    h = ctx.operator(params.get("hamiltonian"))
    o = ctx.operator(params.get("observable"))
    cone = ctx.cone(params.get("cone"))
    gqn = good_quantum_number(h, o, cone, ctx.tol)
    return True, gqn.to_payload()


def _build_chain(ctx: RunContext, params: dict) -> ArrowChain:
    raw_nodes = params.get("nodes")
    _require(isinstance(raw_nodes, list) and raw_nodes, "chain needs a list of nodes")
    nodes = []
    for spec in raw_nodes:
        _require(isinstance(spec, dict) and "hamiltonian" in spec and "cone" in spec,
                 "chain nodes need 'hamiltonian' and 'cone'")
        cone = ctx.cone(spec["cone"])
        cone_in = ctx.cone(spec["cone_in"]) if "cone_in" in spec else cone
        nodes.append(ChainNode(ctx.operator(spec["hamiltonian"]), cone, cone_in))
    raw_embs = params.get("embeddings", [])
    _require(len(raw_embs) == len(nodes) - 1,
             "need exactly one embedding per consecutive node pair")
    embeddings = tuple(ctx.embedding(name) for name in raw_embs)
    return ArrowChain(tuple(nodes), embeddings)


def _task_chain(ctx: RunContext, params: dict):
    chain = _build_chain(ctx, params)
    payload: dict = {"nodes": len(chain.nodes)}
    report = verify_chain(chain, ctx.tol)
    payload.update(report.to_payload())
    if "observable" in params:
        mu_report = quantum_number_along_chain(chain, ctx.operator(params["observable"]), ctx.tol)
        payload["quantum_numbers"] = mu_report.to_payload()
    return True, payload


def _task_trotter(ctx: RunContext, params: dict):
    h = ctx.operator(params.get("h"))
    h_prime = ctx.operator(params.get("h_prime"))
    cone = ctx.cone(params.get("cone"))
    n_values = params.get("n_values", [1, 2, 4, 8, 16, 32, 64, 128, 256])
    _require(isinstance(n_values, list) and all(isinstance(n, int) and n >= 1 for n in n_values),
             "n_values must be positive integers")
    report = trotter_verify(h, h_prime, float(params.get("s", 1.0)),
                            float(params.get("t", 1.0)), float(params.get("beta", 1.0)),
                            tuple(n_values), cone, ctx.tol)
    scale = max(report.errors) if report.errors else 0.0
    converged = scale <= 1e-12 or all(2.0 / 3.0 <= r <= 6.0 for r in report.ratios())
    ok = converged and all(report.positivity_ok)
    payload = report.to_payload()
    payload["error_ratios"] = list(report.ratios())
    payload["converges"] = converged
    return ok, payload


def _task_lattice(ctx: RunContext, params: dict):
    factors = params.get("factors")
    _require(isinstance(factors, list) and factors, "lattice needs a factors list")
    pairs = []
    for f in factors:
        _require(isinstance(f, dict) and "operator" in f, "factors need 'operator'")
        y = ctx.operator(f["operator"])
        pairs.append((y.dim, y))
    spec = LatticeSpec(
        h0=ctx.operator(params.get("h0")),
        cone=ctx.cone(params.get("cone")),
        observable=ctx.operator(params.get("observable")),
        x=ctx.operator(params.get("x")),
        factors=tuple(pairs),
        dim_cap=int(params.get("dim_cap", 4096)),
    )
    assumptions = verify_spec(spec, ctx.tol)
    workers = max(1, int(os.environ.get("CONECALC_THREADS", "1")))
    diagram = build_lattice(spec, ctx.tol, max_workers=workers)
    payload = {
        "assumptions": assumptions.to_payload(),
        "diagram": diagram.to_payload(),
    }
    return True, payload, {"hasse.dot": hasse_export(diagram)}


def _task_richness(ctx: RunContext, params: dict):
    h = ctx.operator(params.get("hamiltonian"))
    cone = ctx.cone(params.get("cone"))
    o = ctx.operator(params.get("observable"))
    depth = params.get("depth", 5)
    _require(isinstance(depth, int) and depth >= 0, "depth must be a nonnegative integer")
    chain = extension_tower(h, cone, o, depth, ctx.tol)
    report = quantum_number_along_chain(chain, o, ctx.tol)
    payload = {
        "depth": depth,
        "dims": [node.hamiltonian.dim for node in chain.nodes],
        "quantum_numbers": report.to_payload(),
    }
    return True, payload


def _task_weak_equiv(ctx: RunContext, params: dict):
    h2 = ctx.operator(params.get("h2"))
    h_star = ctx.operator(params.get("h_star"))
    env_cone = ctx.cone(params.get("env_cone"))
    d1, d2 = h_star.dim, env_cone.dim
    _require(h2.dim == d1 * d2, "h2 dim must equal dim(h_star) * dim(env_cone)")
    uniform = np.full(d2, 1.0 / np.sqrt(d2))
    emb = append_factor_embedding(h_star.space, h2.space, d1, uniform)
    equiv = is_decoupled_extension(h2, h_star, emb, env_cone)
    factor = ground_state_factorizes(h2, h_star, env_cone, tol=ctx.tol)
    payload = {"equivalence": equiv.to_payload(), "weak": factor.to_payload()}
    return True, payload


def _task_spin_demo(ctx: RunContext, params: dict):
    sites = params.get("sites")
    _require(isinstance(sites, int) and sites >= 2, "spin-demo needs sites >= 2")
    a = params.get("sublattice_a")
    _require(isinstance(a, list) and a, "spin-demo needs sublattice_a")
    b = params.get("sublattice_b",
                   [s for s in range(1, sites + 1) if s not in set(a)])
    system = SpinSystem(sites, tuple(a), tuple(b))
    report = verify_mlm(system, float(params.get("sector_m", 0.0)), ctx.tol)
    return report.ok, report.to_payload()


def _stability_member_chain(ctx: RunContext, h_star: LinearOperator,
                            cone: SelfDualCone, o: LinearOperator, recipe: dict):
    kind = recipe.get("type")
    if kind == "tower":
        depth = recipe.get("depth", 1)
        _require(isinstance(depth, int) and depth >= 1, "tower depth must be >= 1")
        return extension_tower(h_star, cone, o, depth, ctx.tol)
    if kind == "coupling":
        x = ctx.operator(recipe.get("x"))
        y = ctx.operator(recipe.get("y"))
        h2 = kron(h_star, identity(y.space, y.dim)) - kron(x, y)
        cone2 = tensor_cone(cone, orthant(y.space, y.dim))
        uniform = np.full(y.dim, 1.0 / np.sqrt(y.dim))
        emb = append_factor_embedding(h_star.space, h2.space, h_star.dim, uniform)
        return ArrowChain((ChainNode(h_star, cone), ChainNode(h2, cone2)), (emb,))
    raise SchemaError(f"unknown stability recipe type {kind!r}")


def _task_stability(ctx: RunContext, params: dict):
    h_star = ctx.operator(params.get("h_star"))
    cone = ctx.cone(params.get("cone"))
    o = ctx.operator(params.get("observable"))
    members = params.get("members", [])
    _require(isinstance(members, list), "members must be a list")
    record = StabilityClassRecord.for_base(params.get("h_star"), h_star, cone, o, ctx.tol)
    for member in members:
        _require(isinstance(member, dict) and "id" in member and "recipe" in member,
                 "stability members need 'id' and 'recipe'")
        chain = _stability_member_chain(ctx, h_star, cone, o, member["recipe"])
        record.add_member(member["id"], chain, ctx.tol)
    return True, record.to_payload()


_RUNNERS = {
    "classify": _task_classify,
    "mu": _task_mu,
    "chain": _task_chain,
    "trotter": _task_trotter,
    "lattice": _task_lattice,
    "richness": _task_richness,
    "weak-equiv": _task_weak_equiv,
    "spin-demo": _task_spin_demo,
    "stability": _task_stability,
}


def run_config(config: dict, digest: str, tol_override: float | None = None) -> tuple[dict, dict]:
    """Validate, dispatch, and wrap the outcome as a report object.

    Returns (report, extra_files).  Schema problems raise SchemaError; every
    other failure is folded into the report's status.
    """
    _require(isinstance(config, dict), "config must be a JSON object")
    _require(config.get("version") == 1, "config version must be 1")
    task = config.get("task")
    _require(task in TASKS, f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    params = config.get("params", {})
    _require(isinstance(params, dict), "params must be a JSON object")
    ctx = _build_context(config, tol_override)

    extra_files: dict[str, str] = {}
    try:
        result = _RUNNERS[task](ctx, params)
        if len(result) == 3:
            ok, payload, extra_files = result
        else:
            ok, payload = result
        status = "pass" if ok else "fail"
    except SchemaError:
        raise
    except _FAIL_STATUS as exc:
        status = "fail"
        payload = {"reason": str(exc), "error_type": type(exc).__name__}
        index = getattr(exc, "index", None)
        if index is not None:
            payload["index"] = index
    except Exception as exc:  # noqa: BLE001 - surfaced in the report
        status = "error"
        payload = {"reason": str(exc), "error_type": type(exc).__name__}

    report = {
        "task": task,
        "status": status,
        "payload": payload,
        "tool_version": __version__,
        "config_digest": digest,
    }
    return report, extra_files


def emit(report: dict, out_dir: str | Path, extra_files: dict[str, str] | None = None) -> list[Path]:
    """Write report.json (and any diagram files) with canonical bytes."""
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "report.json"
        report_path.write_text(canonical_dumps(report) + "\n", encoding="utf-8")
        written.append(report_path)
        for name, text in (extra_files or {}).items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise IoError(f"cannot write outputs to {out}: {exc}") from exc
    return written


def _spin_demo_config(args) -> dict:
    config: dict = {"version": 1, "task": "spin-demo", "params": {}}
    if args.sites is not None:
        config["params"]["sites"] = args.sites
    if args.partition:
        halves = args.partition.split("/")
        _require(len(halves) == 2, "--partition must look like 1,2/3,4")
        try:
            a = [int(s) for s in halves[0].split(",") if s]
            b = [int(s) for s in halves[1].split(",") if s]
        except ValueError as exc:
            raise SchemaError(f"bad --partition: {exc}") from exc
        config["params"]["sublattice_a"] = a
        config["params"]["sublattice_b"] = b
        config["params"].setdefault("sites", len(a) + len(b))
    if args.sector is not None:
        config["params"]["sector_m"] = args.sector
    return config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="conecalc",
        description="Verify positivity, inheritance chains, and quantum-number "
                    "stability from a JSON run configuration.",
    )
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", help="path to the run configuration JSON")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--tol", type=float, default=None, help="override default tolerance")
    parser.add_argument("--sites", type=int, default=None, help="spin-demo: number of sites")
    parser.add_argument("--partition", default=None, help="spin-demo: sublattices, e.g. 1,2/3,4")
    parser.add_argument("--sector", type=float, default=None, help="spin-demo: magnetization M")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            raw = Path(args.config).read_bytes()
            try:
                config = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"config is not valid JSON: {exc}") from exc
        elif args.task == "spin-demo":
            config = _spin_demo_config(args)
            raw = canonical_dumps(config).encode("utf-8")
        else:
            raise SchemaError("--config is required for this task")
        if isinstance(config, dict) and args.task != config.get("task", args.task):
            raise SchemaError(
                f"config task {config.get('task')!r} does not match CLI task {args.task!r}"
            )
        digest = hashlib.sha256(raw).hexdigest()
        report, extra = run_config(config, digest, args.tol)
    except SchemaError as exc:
        print(f"conecalc: schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"conecalc: cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        paths = emit(report, args.out, extra)
    except IoError as exc:
        print(f"conecalc: {exc}", file=sys.stderr)
        return 1
    print(f"{report['status']}: {report['task']} -> {paths[0]}")
    return 0 if report["status"] == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
