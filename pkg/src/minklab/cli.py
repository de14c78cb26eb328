"""minklab command-line interface.

Every command is described by a parameter schema; argparse options and
``--config`` files are both validated against it.  Reports embed the
config and a SHA-256 over the config and the input file contents.  Exit
codes: 0 success, 2 validation error, 3 budget or feasibility error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooLarge, EnumerationBudgetExceeded, InsufficientMass

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3

DEFAULT_DELTAS = "0.05,0.065,0.085,0.11,0.14,0.18,0.23,0.3"


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _matrix(text):
    if isinstance(text, list):
        return [[float(v) for v in row] for row in text]
    return [_floats(row) for row in str(text).split(";")]


# name -> (converter, default, help); a default of None means optional
_BASIS = {"basis": (str, None, "basis JSON file")}
SCHEMA = {
    "minima": {**_BASIS, "oracle": (bool, False, "use the brute-force oracle"), "bound": (int, 6, "oracle coefficient bound")},
    "reduce": {**_BASIS, "method": (str, "minkowski", "minkowski or quasi")},
    "dual": {**_BASIS},
    "sample": {
        "dim": (int, 2, "dimension"),
        "count": (int, 1000, "number of samples"),
        "sampler": (str, "siegel", "siegel or exact (d = 2)"),
        "tilt": (float, 1.0, "proposal tilt in (0, 1]"),
    },
    "siegel-check": {
        "dim": (int, 2, "dimension"),
        "k": (int, 1, "tuple order"),
        "radius": (float, 0.5, "ball radius"),
        "count": (int, 100000, "number of samples"),
        "sampler": (str, "siegel", "siegel or exact (d = 2)"),
        "tilt": (float, 0.5, "proposal tilt in (0, 1]"),
    },
    "estimate-phi": {
        "dim": (int, 2, "dimension"),
        "i": (int, 1, "minimum index"),
        "deltas": (_floats, DEFAULT_DELTAS, "comma separated delta grid"),
        "count": (int, 200000, "number of samples"),
        "sampler": (str, "siegel", "siegel or exact (d = 2)"),
        "tilt": (float, None, "proposal tilt (default per d, i)"),
        "window": (_floats, "0.05,0.3", "fit window lo,hi"),
        "csv": (str, None, "also write grid rows to this CSV file"),
        "figure": (str, None, "also render a log-log figure to this file"),
    },
    "estimate-tail": {
        "dim": (int, 2, "dimension"),
        "i": (int, 2, "minimum index"),
        "deltas": (_floats, DEFAULT_DELTAS, "comma separated delta grid"),
        "count": (int, 200000, "number of samples"),
        "sampler": (str, "siegel", "siegel or exact (d = 2)"),
        "tilt": (float, None, "proposal tilt (default per d, i)"),
        "window": (_floats, "0.05,0.3", "fit window lo,hi"),
        "csv": (str, None, "also write grid rows to this CSV file"),
        "figure": (str, None, "also render a log-log figure to this file"),
    },
    "flow-law": {
        "dim": (int, 2, "dimension"),
        "i": (int, 1, "minimum index"),
        "kind": (str, "diagonal", "diagonal or unipotent"),
        "z": (_floats, None, "diagonal generator, comma separated"),
        "n": (_matrix, None, "nilpotent generator, rows separated by ';'"),
        "tmax": (float, 1e4, "final time"),
        "tmin": (float, 100.0, "first grid time"),
        "grid": (int, None, "number of grid points (default: ratio 1.05)"),
        "seeds": (int, 50, "number of Haar-random lattices"),
        "figure": (str, None, "also render the traces to this file"),
    },
    "hit-time": {
        "dim": (int, 2, "dimension"),
        "i": (int, 1, "minimum index"),
        "kind": (str, "diagonal", "diagonal or unipotent"),
        "z": (_floats, None, "diagonal generator, comma separated"),
        "n": (_matrix, None, "nilpotent generator, rows separated by ';'"),
        "ts": (_floats, "1,1.5,2,2.5", "target depths t (level e^-t)"),
        "seeds": (int, 100, "number of Haar-random lattices"),
        "m_max": (int, 10**6, "largest discrete time"),
    },
    "constants": {"dim": (int, 2, "dimension"), "k": (int, 1, "tuple order")},
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out_path: str | None = None

    def to_json(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed, "out_path": self.out_path}

    @classmethod
    def from_json(cls, obj) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        extra = set(obj) - {"command", "params", "seed", "out_path"}
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "command" not in obj:
            raise ValueError('config needs a "command"')
        return cls(obj["command"], dict(obj.get("params", {})), int(obj.get("seed", 0)), obj.get("out_path"))


def validate(config: RunConfig) -> dict:
    """Schema check; returns params with defaults filled and values converted."""
    if config.command not in SCHEMA:
        raise ValueError(f"unknown command {config.command!r}")
    schema = SCHEMA[config.command]
    unknown = set(config.params) - set(schema)
    if unknown:
        raise ValueError(f"unknown parameters for {config.command}: {sorted(unknown)}")
    if not isinstance(config.seed, int) or config.seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    out = {}
    for name, (conv, default, _) in schema.items():
        raw = config.params.get(name, default)
        if raw is None:
            out[name] = None
            continue
        try:
            out[name] = conv(raw) if conv is not bool else bool(raw)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad value for {name}: {raw!r} ({exc})") from None
    if "basis" in schema and not out["basis"]:
        raise ValueError("--basis is required")
    return out


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def input_hash(config: RunConfig, params: dict) -> str:
    h = hashlib.sha256(_canonical(config.to_json()).encode())
    if params.get("basis"):
        with open(params["basis"], "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _document(config, params, result):
    return json.dumps(
        {"config": config.to_json(), "input_hash": input_hash(config, params), "result": _json_safe(result)},
        sort_keys=True,
        indent=2,
    ) + "\n"


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _cmd_minima(p, cfg, jobs):
    from .lattice import load_basis
    from .minima import brute_force_minima, successive_minima

    b = load_basis(p["basis"])
    prof = brute_force_minima(b, p["bound"]) if p["oracle"] else successive_minima(b)
    return {
        "method": "oracle" if p["oracle"] else "enumeration",
        "values": prof.values.tolist(),
        "attaining": [list(v.coeffs) for v in prof.attaining],
    }


def _cmd_reduce(p, cfg, jobs):
    from .lattice import load_basis
    from .minima import successive_minima
    from .reduction import minkowski_reduce, quasi_minimal_basis

    b = load_basis(p["basis"])
    if p["method"] == "minkowski":
        nb = minkowski_reduce(b)
        lam = successive_minima(b).values
        ratios = np.linalg.norm(nb.columns, axis=0) / lam
    elif p["method"] == "quasi":
        q = quasi_minimal_basis(b)
        nb = type(b)(np.array([v.embedding for v in q.vectors]).T)
        ratios = q.ratios
    else:
        raise ValueError("--method must be minkowski or quasi")
    return {"basis": nb.to_json(), "norms": np.linalg.norm(nb.columns, axis=0).tolist(), "ratios": ratios.tolist()}


def _cmd_dual(p, cfg, jobs):
    from .lattice import dual, load_basis

    b = load_basis(p["basis"])
    db = dual(b)
    return {"basis": db.to_json(), "covolume": db.covolume}


def _cmd_constants(p, cfg, jobs):
    from .haar import volume_constants, zeta

    vk, vx, c = volume_constants(p["dim"], p["k"])
    return {
        "dim": p["dim"],
        "k": p["k"],
        "vol_K": vk,
        "vol_X": vx,
        "c_dk": c,
        "zeta": {str(j): zeta(j) for j in range(2, p["dim"] + 1)},
    }


def _cmd_siegel(p, cfg, jobs):
    from .siegel import siegel_mc_check

    rep = siegel_mc_check(p["dim"], p["k"], p["radius"], p["count"], cfg.seed, p["sampler"], p["tilt"], jobs)
    return rep.to_json()


def _write_grid_csv(report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in report.csv_rows():
            w.writerow(row)


def _cmd_dist(p, cfg, jobs, tail):
    from .distribution import estimate_phi, estimate_tail

    if len(p["window"]) != 2:
        raise ValueError("--window needs two values lo,hi")
    fn = estimate_tail if tail else estimate_phi
    rep = fn(p["dim"], p["i"], p["deltas"], p["count"], cfg.seed, p["sampler"], p["tilt"], tuple(p["window"]), jobs)
    if p["csv"]:
        _write_grid_csv(rep, p["csv"])
    if p["figure"]:
        from .plotting import plot_loglog_report

        plot_loglog_report(rep, p["figure"], rep.extras["expected_exponent"])
    return rep.to_json()


def _flow_spec(p):
    from .flows import FlowSpec

    d = p["dim"]
    if p["kind"] == "diagonal":
        z = p["z"] if p["z"] is not None else [1.0] + [0.0] * (d - 2) + [-1.0]
        if len(z) != d:
            raise ValueError(f"--z needs {d} entries")
        return FlowSpec("diagonal", np.array(z))
    if p["kind"] == "unipotent":
        if p["n"] is None:
            n = np.zeros((d, d))
            n[0, d - 1] = 1.0
        else:
            n = np.array(p["n"])
        return FlowSpec("unipotent", n)
    raise ValueError("--kind must be diagonal or unipotent")


def _cmd_flow(p, cfg, jobs):
    from .flows import log_law_experiment

    spec = _flow_spec(p)
    traces, frac = log_law_experiment(spec, p["dim"], p["i"], p["tmax"], p["seeds"], cfg.seed, p["tmin"], p["grid"])
    if p["figure"]:
        from .plotting import plot_traces

        plot_traces(traces, p["figure"], 1.0 / (p["dim"] * p["i"]))
    buf = io.StringIO()
    buf.write("# config=" + _canonical(cfg.to_json()) + "\n")
    buf.write("# input_hash=" + input_hash(cfg, p) + "\n")
    buf.write(f"# in_band_fraction={frac!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "t", "delta_i", "running_ratio"])
    for s, tr in enumerate(traces):
        for t, dv, rr in zip(tr.times, tr.delta_values, tr.running_ratio):
            w.writerow([s, repr(float(t)), repr(float(dv)), repr(float(rr))])
    return buf.getvalue()


def _cmd_hit(p, cfg, jobs):
    from .flows import hitting_time_experiment

    spec = _flow_spec(p)
    rep = hitting_time_experiment(spec, p["dim"], p["i"], tuple(p["ts"]), p["seeds"], p["m_max"], cfg.seed)
    return rep.to_json()


def _cmd_sample(p, cfg, jobs):
    from .haar import SiegelSet, sample_exact_d2, sample_siegel

    if p["sampler"] == "exact":
        if p["dim"] != 2:
            raise ValueError("the exact sampler exists only for d = 2")
        ens = sample_exact_d2(p["count"], cfg.seed, jobs=jobs)
    elif p["sampler"] == "siegel":
        ens = sample_siegel(p["dim"], p["count"], cfg.seed, SiegelSet(), tilt=p["tilt"], jobs=jobs)
    else:
        raise ValueError("--sampler must be siegel or exact")
    head = ens.header()
    head["config"] = cfg.to_json()
    head["input_hash"] = input_hash(cfg, p)
    buf = io.StringIO()
    buf.write(json.dumps(_json_safe(head), sort_keys=True) + "\n")
    for b, w in zip(ens.bases, ens.weights):
        buf.write(json.dumps({"basis": {"dim": ens.dim, "columns": b.T.tolist()}, "weight": float(w)}) + "\n")
    return buf.getvalue()


COMMANDS = {
    "minima": _cmd_minima,
    "reduce": _cmd_reduce,
    "dual": _cmd_dual,
    "sample": _cmd_sample,
    "siegel-check": _cmd_siegel,
    "estimate-phi": lambda p, c, j: _cmd_dist(p, c, j, False),
    "estimate-tail": lambda p, c, j: _cmd_dist(p, c, j, True),
    "flow-law": _cmd_flow,
    "hit-time": _cmd_hit,
    "constants": _cmd_constants,
}


def run(config: RunConfig, jobs: int = 1) -> int:
    """Execute a validated config and write its artifact; returns the exit code."""
    try:
        params = validate(config)
        # embed the complete, converted parameter set so the report is self-describing
        config = RunConfig(config.command, _json_safe(params), config.seed, config.out_path)
        result = COMMANDS[config.command](params, config, max(1, int(jobs)))
        text = result if isinstance(result, str) else _document(config, params, result)
        _emit(text, config.out_path)
        return EXIT_OK
    except (EnumerationBudgetExceeded, DimensionTooLarge, InsufficientMass) as exc:
        print(f"minklab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, KeyError, OSError) as exc:
        print(f"minklab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _global_options(parser, suppress):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--seed", type=int, help="master seed (default 0)", **({"default": 0} if not suppress else kw))
    parser.add_argument("--jobs", type=int, help="worker processes (default 1)", **({"default": 1} if not suppress else kw))
    parser.add_argument("--out", help="output path (default stdout)", **({"default": None} if not suppress else kw))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minklab", description="Geometry-of-numbers experiments.")
    _global_options(parser, suppress=False)
    parser.add_argument("--config", help="run the config object embedded in (or stored as) this JSON file")
    sub = parser.add_subparsers(dest="command")
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name)
        _global_options(sp, suppress=True)
        for key, (conv, default, helptext) in schema.items():
            flag = "--" + key.replace("_", "-")
            if conv is bool:
                sp.add_argument(flag, dest=key, action="store_true", help=helptext)
            else:
                sp.add_argument(flag, dest=key, default=None, help=helptext)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
            cfg = RunConfig.from_json(obj.get("config", obj) if isinstance(obj, dict) else obj)
        except (OSError, ValueError) as exc:
            print(f"minklab: invalid config: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if args.out is not None:
            cfg.out_path = args.out
        return run(cfg, args.jobs)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    params = {}
    for key, (conv, default, _) in SCHEMA[args.command].items():
        val = getattr(args, key)
        if conv is bool:
            if val:
                params[key] = True
        elif val is not None:
            params[key] = val
    cfg = RunConfig(args.command, params, args.seed, args.out)
    return run(cfg, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
