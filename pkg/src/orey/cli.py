"""Batch front end: ``orey <subcommand> [flags]``.

Values come from built-in defaults, then ``--config`` (JSON), then explicit
flags.  Every artifact starts with the tool version and the full config so
that it can be reproduced from (config, seed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .conditions import LogPower, Power, lambda_sweep, log_ratio_profile, remark_check
from .errors import OreyError, ParameterError
from .estimator import mc_study, orey_estimate
from .models import FAMILIES, FracOU, orey_profile
from .partition import (make_alternating, make_perturbed, make_regular, ratio_profile,
                        subsample)
from .quadvar import d_matrix, diagnostics, expected_qv, limit_value, normalized_qv, raw_qv
from .sampler import SeedPolicy, default_workers, sample, sample_frac_ou

SUBCOMMANDS = ("simulate", "qv", "expect", "estimate", "mc", "diagnose")
CHECKS = ("lambda", "remark", "logratio", "rowsum")
PARTITIONS = ("regular", "alternating", "perturbed")


class ConfigError(ParameterError):
    """Invalid configuration value; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    family: str = "fbm"
    H: float = 0.5
    K: float = 1.0
    mu: float = 1.0
    theta: float = 1.0
    x0: float = 0.0
    N: int = 1024
    T: float = 1.0
    stride: int = 2
    replicas: int = 1
    seed: int = 0
    partition: str = "regular"
    alpha: float = 2.0
    cmax: float = 2.0
    out: str = "."
    gamma: float | None = None
    ladder: list = field(default_factory=list)
    check: str = "lambda"
    deltas: list = field(default_factory=list)
    phi: str = "power:0.2"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown config key")
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def spec(self):
        family = self.family.lower()
        if family not in FAMILIES:
            raise ConfigError("family", f"must be one of {sorted(FAMILIES)}, got {self.family!r}")
        cls = FAMILIES[family]
        args = {"fbm": {}, "subfbm": {}, "bifbm": {"K": self.K},
                "fou": {"mu": self.mu, "theta": self.theta, "x0": self.x0},
                "bridge": {"horizon": self.T}}[family]
        try:
            return cls(self.H, **args)
        except ParameterError as exc:
            raise ConfigError("H" if "H" in str(exc) else family, str(exc)) from None

    def partition_for(self, N=None):
        N = self.N if N is None else N
        if self.partition == "regular":
            return make_regular(N, self.T)
        if self.partition == "alternating":
            if N % 2:
                raise ConfigError("N", "alternating partitions need an even N")
            return make_alternating(self.alpha, N // 2, self.T)
        if self.partition == "perturbed":
            return make_perturbed(N, self.T, self.cmax, self.seed)
        raise ConfigError("partition", f"must be one of {PARTITIONS}, got {self.partition!r}")

    def phi_function(self):
        kind, _, value = self.phi.partition(":")
        try:
            arg = float(value)
        except ValueError:
            raise ConfigError("phi", f"expected 'power:<beta>' or 'logpower:<alpha>', got {self.phi!r}") from None
        if kind == "power":
            return Power(arg)
        if kind == "logpower":
            return LogPower(arg)
        raise ConfigError("phi", f"expected 'power:<beta>' or 'logpower:<alpha>', got {self.phi!r}")

    def validate(self, command):
        for name in ("N", "stride", "replicas", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(name, f"must be an integer, got {value!r}")
        if self.N < 3:
            raise ConfigError("N", "must be >= 3")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ConfigError("T", "must be positive")
        if self.stride < 2:
            raise ConfigError("stride", "must be >= 2")
        if self.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        if self.replicas < (2 if command == "mc" else 1):
            raise ConfigError("replicas", "mc needs at least 2 replicas" if command == "mc" else "must be >= 1")
        if self.partition not in PARTITIONS:
            raise ConfigError("partition", f"must be one of {PARTITIONS}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigError("alpha", "must be positive")
        if not (math.isfinite(self.cmax) and self.cmax >= 1):
            raise ConfigError("cmax", "must be >= 1")
        if self.check not in CHECKS:
            raise ConfigError("check", f"must be one of {CHECKS}")
        if any(int(n) != n or n < 3 for n in self.ladder):
            raise ConfigError("ladder", "entries must be integers >= 3")
        if command == "mc" and self.partition != "regular":
            raise ConfigError("partition", "mc runs on regular partitions only")
        if command in ("estimate", "mc") and self.N % self.stride:
            raise ConfigError("stride", f"stride {self.stride} does not divide N = {self.N}")
        self.spec()
        self.phi_function()


# --- output helpers -------------------------------------------------------------

def _header(cfg, command):
    return f"orey {__version__} {command}\nconfig: {cfg.to_json()}"


def _write(cfg, name, text):
    os.makedirs(cfg.out, exist_ok=True)
    target = os.path.join(cfg.out, name)
    with open(target, "w", newline="\n") as fh:
        fh.write(text)
    return target


def _csv(cfg, command, name, columns, rows):
    lines = [f"# {ln}" for ln in _header(cfg, command).splitlines()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return _write(cfg, name, "\n".join(lines) + "\n")


def _json(cfg, command, name, payload):
    doc = {"tool": "orey", "version": __version__, "command": command,
           "config": cfg.to_dict(), "result": payload}
    return _write(cfg, name, json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _draw(spec, p, seed, replica):
    """One path with its deterministic mean included."""
    policy = SeedPolicy(seed, replica)
    if isinstance(spec, FracOU):
        return sample_frac_ou(spec, p, policy)
    return sample(spec, p, policy)


# --- subcommands ---------------------------------------------------------------

def cmd_simulate(cfg):
    spec, p = cfg.spec(), cfg.partition_for()
    rows = []
    for r in range(cfg.replicas):
        path = _draw(spec, p, cfg.seed, r)
        rows += [(r, t, x) for t, x in zip(path.times, path.values)]
    files = [_csv(cfg, "simulate", "paths.csv", ("replica", "t", "x"), rows)]
    return {"files": files, "replicas": cfg.replicas, "points": len(p)}


def cmd_qv(cfg):
    spec, p = cfg.spec(), cfg.partition_for()
    profile = orey_profile(spec)
    gamma = profile.gamma if cfg.gamma is None else cfg.gamma
    limit = limit_value(profile, ratio_profile(p)) if cfg.gamma is None else float("nan")
    rows = []
    for r in range(cfg.replicas):
        path = _draw(spec, p, cfg.seed, r).centered()
        rows.append((r, float(normalized_qv(path, gamma)), float(raw_qv(path)), limit))
    files = [_csv(cfg, "qv", "qv.csv", ("replica", "normalized_qv", "raw_qv", "limit"), rows)]
    return {"files": files, "gamma": gamma, "limit": limit}


def _expect_row(cfg, spec, profile, N):
    p = cfg.partition_for(N)
    e = expected_qv(spec, p, profile)
    lim = limit_value(profile, ratio_profile(p))
    return (N, e, lim, abs(e - lim) / abs(lim))


def cmd_expect(cfg):
    spec = cfg.spec()
    profile = orey_profile(spec)
    ladder = [int(n) for n in cfg.ladder] or [cfg.N]
    workers = min(default_workers(), len(ladder))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda n: _expect_row(cfg, spec, profile, n), ladder))
    else:
        rows = [_expect_row(cfg, spec, profile, n) for n in ladder]
    files = [_csv(cfg, "expect", "expect.csv", ("N", "expected_qv", "limit", "rel_error"), rows)]
    return {"files": files, "rows": [list(r) for r in rows]}


def cmd_estimate(cfg):
    spec, fine = cfg.spec(), cfg.partition_for()
    coarse = subsample(fine, cfg.stride)
    path = _draw(spec, fine, cfg.seed, 0)
    est = orey_estimate(path, coarse, fine)
    payload = asdict(est)
    payload["gamma_true"] = orey_profile(spec).gamma
    payload["files"] = [_json(cfg, "estimate", "estimate.json", payload)]
    return payload


def cmd_mc(cfg):
    spec = cfg.spec()
    summary = mc_study(spec, cfg.N, cfg.stride, cfg.replicas, cfg.seed, cfg.T)
    header = _header(cfg, "mc")
    files = [_json(cfg, "mc", "mc_summary.json", summary.to_dict()),
             _write(cfg, "mc_replicas.csv", summary.to_csv(comment=header))]
    out = summary.to_dict()
    out["files"] = files
    return out


def cmd_diagnose(cfg):
    spec = cfg.spec()
    check = cfg.check
    if check == "lambda":
        kwargs = {"deltas": tuple(cfg.deltas)} if cfg.deltas else {}
        rep = lambda_sweep(spec, phi=cfg.phi_function(), T=cfg.T, **kwargs)
        _write(cfg, "lambda.csv", rep.to_csv(comment=_header(cfg, "diagnose")))
        return {"files": [os.path.join(cfg.out, "lambda.csv")], "passed": rep.passed,
                "lambdas": rep.lambdas, "bounds": rep.bounds}
    if check == "remark":
        kwargs = {"deltas": tuple(cfg.deltas)} if cfg.deltas else {}
        rep = remark_check(cfg.H, T=cfg.T, **kwargs)
        rows = [(d, s, rep.constant, ok) for d, s, ok in zip(rep.deltas, rep.sups, rep.passes)]
        files = [_csv(cfg, "diagnose", "remark.csv", ("delta", "sup", "constant", "pass"), rows)]
        return {"files": files, "passed": rep.passed, "constant": rep.constant, "sups": rep.sups}
    if check == "logratio":
        kwargs = {"h_grid": tuple(cfg.deltas)} if cfg.deltas else {}
        rep = log_ratio_profile(spec, phi=cfg.phi_function(), T=cfg.T, **kwargs)
        _write(cfg, "logratio.csv", rep.to_csv(comment=_header(cfg, "diagnose")))
        return {"files": [os.path.join(cfg.out, "logratio.csv")], "gamma": orey_profile(spec).gamma}
    p = cfg.partition_for()
    gamma = orey_profile(spec).gamma if cfg.gamma is None else cfg.gamma
    diag = diagnostics(d_matrix(spec, p, gamma=gamma), p, gamma)
    diag["files"] = [_json(cfg, "diagnose", "rowsum.json", diag)]
    return diag


COMMANDS = {"simulate": cmd_simulate, "qv": cmd_qv, "expect": cmd_expect,
            "estimate": cmd_estimate, "mc": cmd_mc, "diagnose": cmd_diagnose}


# --- argument parsing ------------------------------------------------------------

def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; explicit flags override it")
    common.add_argument("--family", choices=sorted(FAMILIES))
    for name in ("H", "K", "mu", "theta", "x0", "T", "alpha", "cmax", "gamma"):
        common.add_argument(f"--{name}", type=float)
    for name in ("N", "stride", "replicas", "seed"):
        common.add_argument(f"--{name}", type=int)
    common.add_argument("--partition", choices=PARTITIONS)
    common.add_argument("--out", help="output directory")
    common.add_argument("--ladder", type=_int_list, help="comma-separated N values for expect")
    common.add_argument("--deltas", type=_float_list,
                        help="comma-separated delta (or h) grid for diagnose")
    common.add_argument("--phi", help="boundary layer: power:<beta> or logpower:<alpha>")
    common.add_argument("--strict", action="store_true",
                        help="diagnose: exit 3 when a check fails")

    parser = argparse.ArgumentParser(prog="orey", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"orey {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "diagnose":
            sp.add_argument("check", choices=CHECKS)
    return parser


def config_from_args(args):
    data = ExperimentConfig().to_dict()
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("config", "config file must hold a JSON object")
        data.update(ExperimentConfig.from_dict({**data, **loaded}).to_dict())
    for key in data:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def _fail(exc, code):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "field", None):
        doc["field"] = exc.field
    print(json.dumps(doc), file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.validate(args.command)
    except (OreyError, OSError, json.JSONDecodeError, TypeError) as exc:
        return _fail(exc, 2)
    try:
        result = COMMANDS[args.command](cfg)
    except (OreyError, np.linalg.LinAlgError, OSError) as exc:
        return _fail(exc, 1)
    print(json.dumps(result, sort_keys=True, default=_jsonable))
    if args.strict and result.get("passed") is False:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
