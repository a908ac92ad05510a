"""Command-line interface: check, image, dict, classify."""
from __future__ import annotations

import argparse
import json
import sys
import time

import jsonschema

from . import __version__
from .dictionary import (
    ConsistencyError,
    Partition,
    classify,
    describe,
    kappa_translate,
    partition_from_coweight,
    q_and_P,
    shift_matrix,
    split_model_for,
)
from .images import eta_model, gl_data, image_gl, image_quasisplit, instance, shift_composed_model
from .relations import REPORT_VERSION, check_model, suite_drinfeld, suite_gl, suite_quasisplit, suite_split
from .satake import ConfigError, parse_tau
from .truncation import truncation_report

CONFIG_VERSION = "1.0"

_INT_LIST = {"type": "array", "items": {"type": "integer"}}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "version": {"type": "string"},
        "model": {"enum": ["quasisplit", "gl", "eta", "kappa"]},
        "diagram": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type", "rank"],
            "properties": {
                "type": {"enum": ["A", "D", "E"]},
                "rank": {"type": "integer", "minimum": 1},
                "tau": {"type": "array"},
            },
        },
        "lambda": _INT_LIST,
        "mu": _INT_LIST,
        "nu": _INT_LIST,
        "orientation": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
        "zeta": {"type": "object", "additionalProperties": {"type": "integer"}},
        "z_split": {"type": "object", "additionalProperties": _INT_LIST},
        "z_placement": {"enum": ["split", "second"]},
        "sqrt_sum": {"enum": ["literal", "all"]},
        "gl": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "lambda", "mu"],
            "properties": {"n": {"type": "integer", "minimum": 2}, "lambda": _INT_LIST, "mu": _INT_LIST},
        },
        "partition": _INT_LIST,
        "trunc": {"type": "integer", "minimum": 1},
        "suites": {"type": "array", "items": {"enum": ["quasisplit", "split", "gl", "drinfeld", "drinfeld-literal"]}},
        "jobs": {"type": "integer", "minimum": 1},
        "deep_serre": {"type": "boolean"},
        "truncation": {"type": "boolean"},
        "sabotage": {"type": "boolean"},
    },
}

_DEFAULT_SUITES = {"gl": ["gl"], "eta": ["split", "quasisplit"], "kappa": ["drinfeld"]}


def _fail(code, msg):
    print(f"error: {msg}", file=sys.stderr)
    return code


def load_config(path_or_obj, overrides=None) -> dict:
    """Validate and normalize a config; raises ConfigError."""
    if isinstance(path_or_obj, dict):
        raw = dict(path_or_obj)
    else:
        try:
            with open(path_or_obj, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"schema: {path or '<root>'}: {exc.message}") from exc
    cfg = dict(raw)
    cfg.setdefault("version", CONFIG_VERSION)
    if cfg["version"] != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {cfg['version']}")
    cfg.setdefault("model", "quasisplit")
    for k, v in (overrides or {}).items():
        if v is not None:
            cfg[k] = v
    cfg.setdefault("trunc", 6 if cfg["model"] in ("gl", "kappa") else 8)
    cfg.setdefault("jobs", 1)
    cfg.setdefault("deep_serre", False)
    cfg.setdefault("sabotage", False)
    m = cfg["model"]
    if m == "quasisplit":
        for key in ("diagram", "lambda", "mu"):
            if key not in cfg:
                raise ConfigError(f"quasisplit config needs '{key}'")
        d = dict(cfg["diagram"])
        d["tau"] = list(parse_tau(d.get("tau"), d["rank"]))
        cfg["diagram"] = d
        cfg.setdefault("sqrt_sum", "literal")
        cfg.setdefault("z_placement", "split")
        cfg.setdefault("truncation", "nu" not in cfg)
        split = d["tau"] == list(range(1, d["rank"] + 1))
        cfg.setdefault("suites", ["quasisplit", "split"] if split else ["quasisplit"])
    elif m in ("gl", "eta"):
        if "gl" not in cfg:
            raise ConfigError(f"{m} config needs 'gl'")
        cfg.setdefault("truncation", False)
        cfg.setdefault("suites", _DEFAULT_SUITES[m])
    else:
        if "partition" not in cfg:
            raise ConfigError("kappa config needs 'partition'")
        Partition(tuple(cfg["partition"]))
        cfg.setdefault("truncation", False)
        cfg.setdefault("suites", _DEFAULT_SUITES[m])
    return cfg


def build_model(cfg: dict):
    """(model, derived parameters, dictionary section)."""
    m, N = cfg["model"], cfg["trunc"]
    sab = cfg["sabotage"]
    if m == "quasisplit":
        d = cfg["diagram"]
        zeta = {int(k): v for k, v in cfg.get("zeta", {}).items()}
        g = instance(d["type"], d["rank"], cfg["lambda"], cfg["mu"], d["tau"], cfg.get("orientation"), zeta or None)
        zs = {int(k): v for k, v in cfg["z_split"].items()} if "z_split" in cfg else None
        model = image_quasisplit(g, N=N, z_split=zs, z_placement=cfg["z_placement"], sqrt_sum=cfg["sqrt_sum"], sabotage=sab)
        derived = g.to_json()
        if "nu" in cfg:
            model = shift_composed_model(model, cfg["nu"])
            derived["shifted_mu"] = list(model.mu)
        return model, derived, _dictionary_for(d, cfg["lambda"], cfg["mu"])
    if m in ("gl", "eta"):
        c = cfg["gl"]
        gd = gl_data(c["n"], c["lambda"], c["mu"])
        model = image_gl(gd, N=N, sabotage=sab)
        derived = {"v": list(gd.v), "sl": gd.sl.to_json(), "z0": {str(k): v for k, v in gd.z0.items()}}
        if m == "eta":
            model = eta_model(model)
        return model, derived, None
    p = Partition(tuple(cfg["partition"]))
    base = split_model_for(p, N, sabotage=sab)
    model = kappa_translate(shift_matrix(p), base)
    return model, base.data.to_json(), _dictionary_record(p)


def _dictionary_record(p: Partition) -> dict:
    rec = describe(p)
    rec.update(q_and_P(p))
    return rec


def _dictionary_for(d, lam, mu):
    """Type-AI dictionary record when the instance is split A with lambda = N w_1."""
    n = d["rank"] + 1
    if d["type"] != "A" or d["tau"] != list(range(1, n)) or any(lam[1:]):
        return None
    try:
        return _dictionary_record(partition_from_coweight(n, lam[0], mu))
    except ConfigError:
        return None


_SUITES = {
    "quasisplit": lambda m, N, deep: suite_quasisplit(m, N, deep),
    "split": lambda m, N, deep: suite_split(m, N, deep),
    "gl": lambda m, N, deep: suite_gl(m, N),
    "drinfeld": lambda m, N, deep: suite_drinfeld(m, N, deep, form="transported"),
    "drinfeld-literal": lambda m, N, deep: suite_drinfeld(m, N, deep, form="literal"),
}


def run_check(cfg: dict) -> dict:
    t0 = time.perf_counter()
    model, derived, dictionary = build_model(cfg)
    suites = {}
    for name in cfg["suites"]:
        if name == "split" and any(model.t(i) != i for i in model.nodes):
            raise ConfigError("the split suite needs tau = id")
        insts = _SUITES[name](model, cfg["trunc"], cfg["deep_serre"])
        suites[name] = check_model(model, insts, jobs=cfg["jobs"], name=name).to_json()
    trunc = None
    if cfg["truncation"] and getattr(model, "kit", None) is not None and model.kind == "quasisplit":
        trunc = truncation_report(model)
    failed = sum(s["failed"] for s in suites.values()) + (0 if trunc is None or trunc["ok"] else 1)
    return {
        "version": REPORT_VERSION,
        "engine_version": __version__,
        "config": cfg,
        "derived": derived,
        "model_info": _jsonable(model.info),
        "suites": suites,
        "truncation": trunc,
        "dictionary": dictionary,
        "ok": failed == 0,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }


def _jsonable(x):
    return json.loads(json.dumps(x, default=str))


def canonical(report: dict) -> str:
    """Canonical JSON without the wall time, for byte comparison."""
    r = {k: v for k, v in report.items() if k != "wall_time_s"}
    r["config"] = {k: v for k, v in r["config"].items() if k != "jobs"}
    return dumps(r)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(obj, out):
    text = dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _overrides(args):
    o = {"trunc": args.trunc, "jobs": args.jobs}
    if args.deep_serre:
        o["deep_serre"] = True
    if args.suite:
        o["suites"] = args.suite
    return o


def cmd_check(args) -> int:
    try:
        cfg = load_config(args.config, _overrides(args))
        report = run_check(cfg)
    except ConsistencyError as exc:
        return _fail(3, str(exc))
    except ConfigError as exc:
        return _fail(2, str(exc))
    _emit(report, args.out)
    return 0 if report["ok"] else 1


def _range(text):
    a, _, b = text.partition("..")
    return int(a), int(b or a)


def cmd_image(args) -> int:
    try:
        cfg = load_config(args.config, {"trunc": args.trunc})
        model, _, _ = build_model(cfg)
        if (args.family, args.node) not in model.tables:
            raise ConfigError(f"no generator family {args.family} at node {args.node}")
        lo, hi = _range(args.modes)
    except ConsistencyError as exc:
        return _fail(3, str(exc))
    except (ConfigError, ValueError) as exc:
        return _fail(2, str(exc))
    _emit(
        {
            "version": REPORT_VERSION,
            "family": args.family,
            "node": args.node,
            "window": list(model.window(args.family, args.node)),
            "modes": model.mode_json(args.family, args.node, lo, hi),
        },
        args.out,
    )
    return 0


def _partition_arg(args) -> Partition:
    if args.partition:
        return Partition(tuple(int(x) for x in args.partition.split(",")))
    if args.n is None or args.N is None:
        raise ConfigError("give --partition or --n, --N and --mu")
    mu = tuple(int(x) for x in args.mu.split(",")) if args.mu else ()
    return partition_from_coweight(args.n, args.N, mu)


def cmd_dict(args) -> int:
    try:
        rec = _dictionary_record(_partition_arg(args))
    except ConsistencyError as exc:
        return _fail(3, str(exc))
    except (ConfigError, ValueError) as exc:
        return _fail(2, str(exc))
    _emit({"version": REPORT_VERSION, **rec}, args.out)
    return 0


def cmd_classify(args) -> int:
    try:
        p = _partition_arg(args)
        t = classify(p)
    except (ConfigError, ValueError) as exc:
        return _fail(2, str(exc))
    _emit({"version": REPORT_VERSION, "partition": list(p.parts), "type": t.family, "k": t.k, "label": str(t)}, args.out)
    return 0


def _parser():
    ap = argparse.ArgumentParser(prog="igklo", description="Exact iGKLO images and relation checks.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="run relation suites and truncation checks on one instance")
    c.add_argument("--config", required=True)
    c.add_argument("--out")
    c.add_argument("--trunc", type=int)
    c.add_argument("--deep-serre", action="store_true")
    c.add_argument("--jobs", type=int)
    c.add_argument("--suite", action="append", choices=sorted(_SUITES))
    c.set_defaults(func=cmd_check)

    im = sub.add_parser("image", help="dump generator modes as canonical JSON")
    im.add_argument("--config", required=True)
    im.add_argument("--family", required=True)
    im.add_argument("--node", type=int, required=True)
    im.add_argument("--modes", default="0..3", help="range lo..hi")
    im.add_argument("--trunc", type=int)
    im.add_argument("--out")
    im.set_defaults(func=cmd_image)

    for name, fn, helptext in (
        ("dict", cmd_dict, "partition, shift matrix, type and dimension record"),
        ("classify", cmd_classify, "W-algebra type of a partition"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--partition", help="comma-separated parts")
        p.add_argument("--n", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--mu", help="comma-separated pairings <mu, alpha_i>")
        p.add_argument("--out")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConsistencyError as exc:
        return _fail(3, str(exc))


if __name__ == "__main__":
    sys.exit(main())
