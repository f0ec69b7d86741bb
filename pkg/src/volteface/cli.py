"""Command-line front end: norm curves, comparison tables, limit diagnostics and simulations.

Every run echoes its resolved configuration. CSV output starts with ``#``
comment lines (``# config: {...}`` holds the configuration as compact JSON)
followed by a fixed header row; JSON output is ``{"config": ..., <payload>}``.
Either file can be fed back with ``--config`` to rerun the same command.

Exit codes: 0 ok, 2 usage, 3 domain error, 4 search budget exhausted. Errors
print one line ``error: <module>.<code>: <message>`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from . import diophantine, discrete_chain, global_norm, mode_core, pdmp_sim
from . import potential_geometry
from .diophantine import SearchBudgetExhausted
from .mode_core import DomainError

OUTPUT_DIR_ENV = "VOLTEFACE_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_BUDGET = 0, 2, 3, 4
COMMANDS = ("norm-curve", "mode-norm", "discrete-norm", "limit-check", "simulate", "dioph", "rates")

# Header rows of every tabular output; changing one breaks downstream readers.
CSV_COLUMNS = {
    "norm-curve": ("t", "norm"),
    "mode-norm": ("t", "regime", "r_closed", "r_oracle", "norm_closed", "norm_oracle", "rel_diff"),
    "discrete-norm": ("step", "norm"),
    "limit-check/continuum": ("N", "alpha", "steps", "mode", "r_discrete", "r_continuous", "abs_error"),
    "limit-check/brownian": ("a", "n", "t", "finite_rate_norm", "limit", "mc_re", "mc_im", "std_error", "mc_gap"),
    "simulate": pdmp_sim.BATCH_COLUMNS,
    "dioph": ("period", "multiplier", "residual", "t"),
    "rates": ("key", "value"),
}


class UsageError(Exception):
    code = "usage"


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    format: str = "csv"
    output: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "config" in d:  # an emitted JSON document
            d = d["config"]
        try:
            return cls(command=d["command"], params=dict(d.get("params", {})),
                       format=d.get("format", "csv"), output=d.get("output"))
        except (KeyError, TypeError) as exc:
            raise UsageError(f"malformed config: {exc}") from None


def _num(x: Any) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if hasattr(x, "item"):
        return x.item()
    return x


@dataclass
class Result:
    table: str | None = None  # key into CSV_COLUMNS
    rows: list[tuple] = field(default_factory=list)
    record: dict | None = None  # non-tabular payload (rates)
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="volteface", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="rerun from an emitted JSON document or RunConfig file")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, fmt="csv"):
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)
        sp.add_argument("--output", help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV}); default stdout")

    s = sub.add_parser("norm-curve", help="sample the global norm on [0, t_max]")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--t-max", type=float, required=True)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--source", choices=("closed", "oracle"), default="closed")
    common(s)

    s = sub.add_parser("mode-norm", help="closed form and matrix oracle for one mode")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--n", type=float, required=True)
    s.add_argument("--t", type=float, nargs="+", required=True)
    common(s)

    s = sub.add_parser("discrete-norm", help="global norm of the persistent walk per step")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--exclude-top", action="store_true")
    common(s)

    s = sub.add_parser("limit-check", help="continuum or diffusive limit diagnostics")
    s.add_argument("--kind", choices=("continuum", "brownian"), required=True)
    s.add_argument("--a", type=float, help="flip rate (default 1 continuum, 100 brownian)")
    s.add_argument("--t", type=float, help="time (default 2 continuum, 1 brownian)")
    s.add_argument("--k", type=int, default=1, help="continuum mode offset")
    s.add_argument("--N", type=int, nargs="+", default=[101, 1001, 10001])
    s.add_argument("--top", action="store_true", help="follow the top mode N//2 - k")
    s.add_argument("--n", type=int, default=1, help="brownian Fourier mode")
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    common(s)

    s = sub.add_parser("simulate", help="Monte Carlo terminal states")
    s.add_argument("--model", choices=("flat", "potential", "chain"), required=True)
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--y0", type=int, choices=(-1, 1), default=1)
    s.add_argument("--paths", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--potential", choices=("zero", "cosine", "trig", "file"), default="cosine")
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--cos-coeffs", type=float, nargs="*", default=[])
    s.add_argument("--sin-coeffs", type=float, nargs="*", default=[])
    s.add_argument("--potential-file")
    s.add_argument("--N", type=int, default=101)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--events", help="also write the jump-time log (flat and potential models)")
    common(s)

    s = sub.add_parser("dioph", help="simultaneous return time")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--periods", type=float, nargs="+")
    g.add_argument("--a", type=float, help="align the oscillatory envelopes of flip rate a < 1")
    s.add_argument("--delta", type=float, help="window for --periods")
    s.add_argument("--eps", type=float, default=0.1, help="envelope excess for --a")
    s.add_argument("--t-min", type=float, default=1.0)
    s.add_argument("--budget", type=int, default=1 << 26)
    common(s)

    s = sub.add_parser("rates", help="asymptotic rate and prefactor")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--a", type=float)
    g.add_argument("--N", type=int)
    common(s, fmt="json")
    return p


_NON_PARAMS = {"command", "format", "output", "config"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _NON_PARAMS}
    return RunConfig(command=ns.command, params=params, format=ns.format, output=ns.output)


def _argv_from_config(cfg: RunConfig) -> list[str]:
    argv = [cfg.command]
    for key, value in cfg.params.items():
        flag = "--" + key.replace("_", "-")
        if value is None or value is False:
            continue
        if value is True:
            argv.append(flag)
        elif isinstance(value, (list, tuple)):
            argv += [flag, *map(repr, value)] if value else []
        else:
            argv += [flag, repr(value) if isinstance(value, float) else str(value)]
    argv += ["--format", cfg.format]
    if cfg.output is not None:
        argv += ["--output", cfg.output]
    return argv


def parse_config(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config:
        try:
            raw = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        cfg = RunConfig.from_dict(raw)
        if cfg.command not in COMMANDS:
            raise UsageError(f"unknown command {cfg.command!r}")
        ns = parser.parse_args(_argv_from_config(cfg))
    elif ns.command is None:
        raise UsageError("a command is required")
    return config_from_args(ns)


# ---------------------------------------------------------------- commands


def _norm_curve(p: dict) -> Result:
    curve = global_norm.sample_norm_curve(p["a"], p["t_max"], p["steps"], p["source"])
    return Result("norm-curve", [(t, v) for t, v, _ in curve.samples])


def _mode_norm(p: dict) -> Result:
    a, n = p["a"], p["n"]
    mode_core.build_mode_operator(a, n)
    rows = []
    for t in p["t"]:
        closed = mode_core.mode_norm_squared_closed(a, n, t)
        oracle = mode_core.mode_norm_squared_oracle(a, n, t)
        rel = abs(closed.r_value - oracle) / oracle if oracle > 0 else abs(closed.r_value - oracle)
        rows.append((t, closed.regime.tag.value, closed.r_value, oracle,
                     math.sqrt(closed.r_value), math.sqrt(oracle), rel))
    return Result("mode-norm", rows)


def _discrete_norm(p: dict) -> Result:
    spec = discrete_chain.ChainSpec(p["N"], p["alpha"])
    if p["steps"] < 0:
        raise DomainError(f"steps must be nonnegative, got {p['steps']}")
    rows = [(n, discrete_chain.discrete_global_norm(spec, n, p["exclude_top"])) for n in range(p["steps"] + 1)]
    return Result("discrete-norm", rows)


def _limit_check(p: dict) -> Result:
    if p["kind"] == "continuum":
        p["a"] = 1.0 if p["a"] is None else p["a"]
        p["t"] = 2.0 if p["t"] is None else p["t"]
        rows = [(r.N, r.alpha, r.n_steps, r.mode, r.discrete, r.continuous, r.error)
                for r in discrete_chain.continuum_limit_check(p["a"], p["k"], p["t"], p["N"], p["top"])]
        return Result("limit-check/continuum", rows)
    p["a"] = 100.0 if p["a"] is None else p["a"]
    p["t"] = 1.0 if p["t"] is None else p["t"]
    chk = pdmp_sim.brownian_scaling_check(p["a"], p["n"], p["t"], p["paths"], p["seed"], workers=p["workers"])
    finite = mode_core.mode_norm_brownian_limit(p["n"], p["t"]).evaluator(p["a"]) if p["t"] > 0 else 1.0
    est = chk.estimate
    row = (p["a"], p["n"], p["t"], finite, chk.limit, est.value.real, est.value.imag, est.std_error, chk.gap)
    return Result("limit-check/brownian", [row])


def _load_potential(p: dict) -> potential_geometry.Potential:
    kind = p["potential"]
    if kind == "zero":
        return potential_geometry.Potential.zero()
    if kind == "cosine":
        return potential_geometry.Potential.cosine(p["amplitude"])
    if kind == "trig":
        return potential_geometry.Potential.trig(p["cos_coeffs"], p["sin_coeffs"])
    if not p.get("potential_file"):
        raise UsageError("--potential file needs --potential-file")
    return potential_geometry.Potential.from_file(_resolve(p["potential_file"]))


def _simulate(p: dict) -> Result:
    model, meta = p["model"], {}
    if p["paths"] < 1:
        raise DomainError(f"paths must be positive, got {p['paths']}")
    record = bool(p.get("events"))
    if record and model == "chain":
        raise UsageError("--events is only available for the flat and potential models")
    if model == "flat":
        batch = pdmp_sim.simulate_flat(p["a"], p["x0"], p["y0"], p["T"], p["paths"], p["seed"],
                                       workers=p["workers"], record_events=record)
        rows = [(i, float(x), int(y)) for i, (x, y) in enumerate(zip(batch.x, batch.y))]
    elif model == "potential":
        pot, z = potential_geometry.normalize_potential(_load_potential(p))
        meta["Z"] = z
        batch = pdmp_sim.simulate_with_potential(pot, p["a"], p["x0"], p["y0"], p["T"], p["paths"], p["seed"],
                                                 workers=p["workers"], record_events=record)
        rows = [(i, float(x), int(y)) for i, (x, y) in enumerate(zip(batch.x, batch.y))]
    else:
        spec = discrete_chain.ChainSpec(p["N"], p["alpha"])
        batch = pdmp_sim.simulate_chain(spec, int(p["x0"]), p["y0"], p["steps"], p["paths"], p["seed"],
                                        workers=p["workers"])
        rows = [(i, int(x), int(y)) for i, (x, y) in enumerate(zip(batch.x, batch.y))]
    if record:
        path = _resolve(p["events"])
        pdmp_sim.write_events_csv(batch, path)
        meta["events_file"] = str(path)
    return Result("simulate", rows, meta=meta)


def _dioph(p: dict) -> Result:
    if p["periods"] is not None:
        if p["delta"] is None:
            raise UsageError("--periods needs --delta")
        hit = diophantine.find_simultaneous_time(p["periods"], p["delta"], p["t_min"], p["budget"])
        meta = {"candidates_scanned": hit.candidates_scanned}
    else:
        w = diophantine.liminf_witness(p["a"], p["eps"], p["t_min"], p["budget"])
        hit = w.hit
        env = global_norm.envelope_g(p["a"], hit.t)
        meta = {"delta": w.delta, "modes": list(w.modes), "g": env.g_value,
                "candidates_scanned": hit.candidates_scanned}
    rows = [(T, m, r, hit.t) for T, m, r in zip(hit.periods, hit.multipliers, hit.residuals)]
    return Result("dioph", rows, meta=meta)


def _rates(p: dict) -> Result:
    if p["a"] is not None:
        s = global_norm.asymptotic_rate(p["a"])
        pref = s.prefactor
        rec = {
            "lambda": s.rate,
            "prefactor": pref,
            "prefactor_kind": s.prefactor_description.value,
            "norm_prefactor": None if pref is None else math.sqrt(pref),
            "eigen_rate": s.eigen_rate,
        }
    else:
        o = discrete_chain.optimal_persistence(p["N"])
        rec = {
            "alpha_opt": o.alpha_opt,
            "lambda_opt": o.lambda_opt,
            "lambda_iso": o.lambda_iso,
            "subdominant_radius": discrete_chain.subdominant_radius(p["N"]),
            "crossover_steps": discrete_chain.crossover_steps(p["N"]),
        }
    return Result("rates", [(k, v) for k, v in rec.items()], record=rec)


HANDLERS: dict[str, Callable[[dict], Result]] = {
    "norm-curve": _norm_curve,
    "mode-norm": _mode_norm,
    "discrete-norm": _discrete_norm,
    "limit-check": _limit_check,
    "simulate": _simulate,
    "dioph": _dioph,
    "rates": _rates,
}


# ---------------------------------------------------------------- output


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def render(cfg: RunConfig, res: Result) -> str:
    echo = cfg.to_dict()
    if cfg.format == "json":
        doc: dict[str, Any] = {"config": echo}
        if res.record is not None:
            doc.update(res.record)
        else:
            doc["columns"] = list(CSV_COLUMNS[res.table])
            doc["rows"] = [list(r) for r in res.rows]
        if res.meta:
            doc["meta"] = res.meta
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# volteface {cfg.command}\n")
    buf.write(f"# config: {json.dumps(_jsonable(echo), sort_keys=True, separators=(',', ':'))}\n")
    for key, value in res.meta.items():
        buf.write(f"# {key}: {json.dumps(_jsonable(value))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS[res.table])
    for row in res.rows:
        w.writerow(["" if v is None else _num(v) for v in row])
    return buf.getvalue()


def run(cfg: RunConfig) -> str:
    """Execute ``cfg`` and return the rendered artifact; ``cfg.params`` is completed in place."""
    if cfg.command not in HANDLERS:
        raise UsageError(f"unknown command {cfg.command!r}")
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"unknown format {cfg.format!r}")
    return render(cfg, HANDLERS[cfg.command](cfg.params))


def _origin(exc: BaseException) -> str:
    """Deepest package module on the traceback, for module-qualified error codes."""
    name = "volteface.cli"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("volteface."):
            name = mod
    return name


def _fail(code: str, message: str, status: int, stderr) -> int:
    stderr.write(f"error: {code}: {' '.join(str(message).split())}\n")
    return status


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
        text = run(cfg)
        if cfg.output:
            path = _resolve(cfg.output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        else:
            stdout.write(text)
    except UsageError as exc:
        return _fail("volteface.cli.usage", exc, EXIT_USAGE, stderr)
    except SearchBudgetExhausted as exc:
        return _fail(f"{_origin(exc)}.{exc.code}", exc, EXIT_BUDGET, stderr)
    except DomainError as exc:
        return _fail(f"{_origin(exc)}.{exc.code}", exc, EXIT_DOMAIN, stderr)
    except OSError as exc:
        return _fail("volteface.cli.io", exc, EXIT_USAGE, stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
