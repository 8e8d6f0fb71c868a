"""Command-line experiments: ``ldpc-wiretap <command> [--config FILE] [--set KEY=VALUE ...]``.

Every command resolves its parameters from built-in defaults, then the JSON
config file, then the ``LDPC_WIRETAP_SEED`` environment variable (seed only),
then ``--set`` overrides and finally ``--seed``.  Output is CSV with two
header lines: the schema version and the fully resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bounds import (
    lemma2_bound,
    markov_confidence,
    prop1_lhs_samples,
    prop1_rhs,
    select_params,
    sweep_rows,
    theorem1_sweep,
)
from .channel import BmsChannel, bsc_equivalent
from .distribution import DistF2n, SizeCapError, exact_leakage, smoothing_divergence
from .ensemble import GallagerSpec, NestedSpec, as_fraction, exact_kernel_prob, sample_nested, snap
from .rng import child_seed
from .wiretap import run_experiment

SCHEMA_VERSION = 1
SEED_ENV = "LDPC_WIRETAP_SEED"
EXACT_SMOOTHING_MAX_N = 16


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, dict] = {
    "kernel-prob": {"n": 12, "rate": "1/2", "row_weight": 4, "snap": False},
    "smoothing": {
        "mode": "bound", "p": 0.11, "eps": 0.1, "log2_n_min": 10, "log2_n_max": 20,
        "n": 8, "rate": "1/2", "row_weight": 4, "alphas": [1.2, 1.5, 1.9], "ts": [0, 1, 2],
        "samples": 1000, "seed": 0,
    },
    "leakage": {
        "n": 8, "rate_b": "3/4", "rate_e": "1/2", "row_weight": 4,
        "channel_e": {"type": "bsc", "p": 0.11}, "codes": 10, "seed": 0,
    },
    "wiretap": {
        "n": 12, "rate_b": "3/4", "rate_e": "1/2", "row_weight": 4,
        "channel_b": {"type": "bsc", "p": 0.05}, "channel_e": {"type": "bsc", "p": 0.11},
        "trials": 1000, "codes": 10, "seed": 0, "mode": "exact", "delta": 0.5,
        "error_threshold": 0.1, "alpha": 1.5, "t": 1,
    },
    "params": {"p": 0.11, "eps": 0.1, "n": None},
    "snap": {"n": 12, "rate": "1/2", "row_weight": 3},
}


# ---------------------------------------------------------------------------
# configuration


class Resolved:
    """Resolved parameters plus where each one came from (for error messages)."""

    def __init__(self, command: str):
        self.command = command
        self.values = dict(DEFAULTS[command])
        self.origin = {k: "default" for k in self.values}

    def update(self, key: str, value, origin: str) -> None:
        if key not in DEFAULTS[self.command]:
            raise ConfigError(f"{origin}: unknown key {key!r} for command {self.command!r}")
        self.values[key] = value
        self.origin[key] = origin

    def fail(self, key: str, msg: str):
        raise ConfigError(f"{self.origin.get(key, 'default')}: {key}: {msg}")

    def get(self, key: str, kind):
        value = self.values[key]
        try:
            return kind(value)
        except (TypeError, ValueError, ZeroDivisionError, KeyError) as exc:
            self.fail(key, f"invalid value {value!r} ({exc})")

    def echo(self) -> str:
        return json.dumps(self.values, sort_keys=True, separators=(",", ":"))


def _key_lines(text: str) -> dict[str, int]:
    lines = {}
    for i, line in enumerate(text.splitlines(), 1):
        for key in re.findall(r'"([^"\\]+)"\s*:', line):
            lines.setdefault(key, i)
    return lines


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def resolve(command: str, args: argparse.Namespace) -> Resolved:
    res = Resolved(command)
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}:1: config must be a JSON object")
        lines = _key_lines(text)
        for key, value in data.items():
            res.update(key, value, f"{path}:{lines.get(key, 1)}")
    env = os.environ.get(SEED_ENV)
    if env is not None and "seed" in res.values:
        try:
            res.update("seed", int(env), f"${SEED_ENV}")
        except ValueError as exc:
            raise ConfigError(f"${SEED_ENV}: seed must be an integer, got {env!r}") from exc
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected KEY=VALUE")
        key, raw = item.split("=", 1)
        res.update(key.strip(), _parse_value(raw), f"--set {key.strip()}")
    if args.seed is not None:
        if "seed" not in res.values:
            raise ConfigError(f"--seed: command {command!r} takes no seed")
        res.update("seed", args.seed, "--seed")
    return res


def _fraction(x) -> Fraction:
    if isinstance(x, bool):
        raise ValueError("boolean is not a rate")
    return as_fraction(x)


def _int(x) -> int:
    if isinstance(x, bool) or (isinstance(x, float) and not x.is_integer()):
        raise ValueError("expected an integer")
    return int(x)


def _channel(cfg) -> BmsChannel:
    if not isinstance(cfg, dict):
        raise ValueError("channel must be an object such as {\"type\": \"bsc\", \"p\": 0.1}")
    return BmsChannel.from_config(cfg)


def _float_list(xs) -> list[float]:
    if not isinstance(xs, list) or not xs:
        raise ValueError("expected a non-empty list")
    return [float(x) for x in xs]


def _int_list(xs) -> list[int]:
    if not isinstance(xs, list) or not xs:
        raise ValueError("expected a non-empty list")
    return [_int(x) for x in xs]


def _gallager(res: Resolved, rate_key: str = "rate") -> GallagerSpec:
    n, rate, s = res.get("n", _int), res.get(rate_key, _fraction), res.get("row_weight", _int)
    try:
        return GallagerSpec(n, rate, s)
    except ValueError as exc:
        res.fail(rate_key, f"{exc}; try the snap command")


def _nested(res: Resolved) -> NestedSpec:
    n, rb, re_, s = (res.get("n", _int), res.get("rate_b", _fraction),
                     res.get("rate_e", _fraction), res.get("row_weight", _int))
    try:
        return NestedSpec(n, rb, re_, s)
    except ValueError as exc:
        res.fail("rate_b", f"{exc}; try the snap command")


# ---------------------------------------------------------------------------
# commands; each returns (header extras, column names, rows)


def cmd_kernel_prob(res: Resolved):
    if res.get("snap", bool):
        try:
            spec, report = snap(res.get("n", _int), res.get("rate", _fraction), res.get("row_weight", _int))
        except ValueError as exc:
            res.fail("n", str(exc))
        extra = {"snapped": report["snapped"], "changed": report["changed"]}
    else:
        spec = _gallager(res)
        extra = {"snapped": spec.to_dict(), "changed": False}
    rows = []
    for w in range(1, spec.n):
        q = exact_kernel_prob(spec, w)
        b = lemma2_bound(spec.n, spec.rate, spec.s, w)
        rows.append([w, q, b, q / b])
    return extra, ["w", "exact_q", "lemma2_bound", "ratio"], rows


def cmd_smoothing(res: Resolved):
    mode = res.get("mode", str)
    p = res.get("p", float)
    if mode == "bound":
        eps = res.get("eps", float)
        lo, hi = res.get("log2_n_min", _int), res.get("log2_n_max", _int)
        if not 1 <= lo <= hi:
            res.fail("log2_n_max", f"need 1 <= log2_n_min <= log2_n_max, got {lo}, {hi}")
        try:
            results, crossover = theorem1_sweep([2 ** k for k in range(lo, hi + 1)], p, eps)
        except ValueError as exc:
            res.fail("eps", str(exc))
        rows = sweep_rows(results, crossover)
        cols = list(rows[0])
        return {"crossover": crossover}, cols, [[r[c] for c in cols] for r in rows]
    if mode != "exact":
        res.fail("mode", f"expected 'bound' or 'exact', got {mode!r}")
    spec = _gallager(res)
    if spec.n > EXACT_SMOOTHING_MAX_N:
        raise SizeCapError(f"exact smoothing needs n <= {EXACT_SMOOTHING_MAX_N}, got n={spec.n}")
    alphas, ts = res.get("alphas", _float_list), res.get("ts", _int_list)
    samples = res.get("samples", _int)
    if samples < 2:
        res.fail("samples", "need at least 2 samples")
    for a in alphas:
        if not 1 < a < 2:
            res.fail("alphas", f"every alpha must lie in (1, 2), got {a}")
    est = prop1_lhs_samples(spec, p, alphas, samples, res.get("seed", _int))
    mean, se, bits = est.mean, est.stderr, est.bits()
    rows = []
    for i, a in enumerate(alphas):
        for t in ts:
            rhs = prop1_rhs(spec.n, spec.rate, spec.s, p, a, t)
            upper = math.log2(mean[i] + 4 * se[i]) / (a - 1)
            rows.append([spec.n, p, a, t, float(bits[i]), float(mean[i]), float(se[i]), rhs, upper <= rhs])
    cols = ["n", "p", "alpha", "t", "lhs_bits", "lhs_mean", "lhs_stderr", "rhs_bits", "dominated"]
    return {"spec": spec.to_dict()}, cols, rows


def cmd_leakage(res: Resolved):
    spec = _nested(res)
    ch = res.get("channel_e", _channel)
    codes, seed = res.get("codes", _int), res.get("seed", _int)
    p_star = bsc_equivalent(ch)
    rows = []
    for i in range(codes):
        cs = child_seed(seed, i)
        H_B, H_E = sample_nested(spec, cs)
        leak = exact_leakage(H_B, H_E, ch)
        d = smoothing_divergence(H_E, DistF2n.bernoulli(spec.n, p_star), 1.0)
        bound = d if ch.kind == "bsc" else 2 * d
        rows.append([i, cs, leak, d, bound, leak <= bound + 1e-9])
    cols = ["code", "code_seed", "leakage_bits", "smoothing_bits", "bound_bits", "within_bound"]
    return {"spec": spec.to_dict(), "p_star": p_star}, cols, rows


def cmd_wiretap(res: Resolved):
    spec = _nested(res)
    ch_b, ch_e = res.get("channel_b", _channel), res.get("channel_e", _channel)
    trials, codes, seed = res.get("trials", _int), res.get("codes", _int), res.get("seed", _int)
    mode, delta = res.get("mode", str), res.get("delta", float)
    if mode not in ("exact", "bound"):
        res.fail("mode", f"expected 'exact' or 'bound', got {mode!r}")
    if not 0 < delta <= 1:
        res.fail("delta", f"must lie in (0, 1], got {delta}")
    thr = res.get("error_threshold", float)
    reports = []
    for i in range(codes):
        reports.append(run_experiment(spec, ch_b, ch_e, trials, child_seed(seed, i), mode=mode, delta=delta,
                                      alpha=res.get("alpha", float), t=res.get("t", _int)))
    mean_bound = float(np.mean([r["leakage_bound_bits"] for r in reports]))
    leak_thr = markov_confidence(mean_bound, delta)
    rows = []
    viol = {"rate": 0, "reliability": 0, "leakage": 0}
    for i, r in enumerate(reports):
        leak = r.get("leakage_bits", r["leakage_bound_bits"])
        v_rate = r["message_rate"] < r["design_message_rate"]
        v_rel = r["error_rate"] > thr
        v_leak = leak > leak_thr
        viol["rate"] += v_rate
        viol["reliability"] += v_rel
        viol["leakage"] += v_leak
        rows.append([i, r["seed"], r["k_b"], r["k_e"], r["message_rate"], r["errors"], r["error_rate"],
                     r["error_ci_low"], r["error_ci_high"], r.get("leakage_bits", float("nan")),
                     r["leakage_bound_bits"], v_rate, v_rel, v_leak])
    sigma = math.sqrt(delta * (1 - delta) / codes) if codes else 0.0
    summary = {
        "codes": codes,
        "delta": delta,
        "mean_leakage_bound_bits": mean_bound,
        "leakage_threshold_bits": leak_thr,
        "violation_fraction": {k: v / codes if codes else 0.0 for k, v in viol.items()},
        "binomial_sigma_at_delta": sigma,
    }
    cols = ["code", "code_seed", "k_b", "k_e", "message_rate", "errors", "error_rate", "error_ci_low",
            "error_ci_high", "leakage_bits", "leakage_bound_bits", "violates_rate", "violates_reliability",
            "violates_leakage"]
    return {"spec": spec.to_dict(), "summary": summary, "reports": reports}, cols, rows


def cmd_params(res: Resolved):
    p, eps = res.get("p", float), res.get("eps", float)
    n = res.values["n"]
    n = None if n is None else res.get("n", _int)
    try:
        sp = select_params(p, eps, n)
    except ValueError as exc:
        res.fail("eps", str(exc))
    checks = sp.check()
    rows = [["alpha", sp.alpha], ["tau", sp.tau], ["a", sp.a], ["t", sp.t]]
    rows += [[f"check_{k}", v] for k, v in checks.items()]
    return {}, ["name", "value"], rows


def cmd_snap(res: Resolved):
    try:
        spec, report = snap(res.get("n", _int), res.get("rate", _fraction), res.get("row_weight", _int))
    except ValueError as exc:
        res.fail("n", str(exc))
    s = report["snapped"]
    return {}, ["n", "rate", "row_weight", "layers", "changed"], [[s["n"], s["rate"], s["row_weight"],
                                                                   spec.layers, report["changed"]]]


COMMANDS = {
    "kernel-prob": cmd_kernel_prob,
    "smoothing": cmd_smoothing,
    "leakage": cmd_leakage,
    "wiretap": cmd_wiretap,
    "params": cmd_params,
    "snap": cmd_snap,
}


# ---------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def render_csv(command: str, res: Resolved, extra: dict, cols: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: ldpc_wiretap.{command}.v{SCHEMA_VERSION}\n")
    buf.write(f"# config: {res.echo()}\n")
    header_extra = {k: v for k, v in extra.items() if k != "reports"}
    if header_extra:
        buf.write(f"# resolved: {json.dumps(header_extra, sort_keys=True, separators=(',', ':'))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render_report(command: str, res: Resolved, extra: dict) -> str:
    doc = {"schema": f"ldpc_wiretap.{command}.v{SCHEMA_VERSION}", "config": res.values, **extra}
    return json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldpc-wiretap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with parameters")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter (JSON value)")
        p.add_argument("--seed", type=int, help="override the seed")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--report", help="JSON report path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        res = resolve(args.command, args)
        extra, cols, rows = COMMANDS[args.command](res)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SizeCapError as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = render_csv(args.command, res, extra, cols, rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(render_report(args.command, res, extra))
    return 0


if __name__ == "__main__":
    sys.exit(main())
