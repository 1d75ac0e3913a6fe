"""Command-line front end.

Usage: ``fracsde GROUP COMMAND [--flag value ...]`` or ``fracsde --config run.json``.
Exit codes: 0 success, 2 usage error, 3 domain or constraint error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import chaos_expansion as ce
from . import fou_analysis as fa
from . import frac_calculus as fc
from . import spde_analysis as sa
from . import volterra_sim as vs
from .errors import DomainError, NumericalError
from .io import UsageError, csv_text, ensemble_bytes, ensemble_csv, json_text, read_path_csv, write_output
from .rng import resolve_jobs
from .special_functions import EvalConfig, ml_eval

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3, 4
FORMATS = ("csv", "json", "bin")


def finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"NaN and infinity are not accepted: {text!r}")
    return value


def seed_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


@dataclass(frozen=True)
class Param:
    name: str
    kind: str = "float"  # float, int, str, floats
    default: Any = None
    required: bool = False
    choices: tuple[str, ...] | None = None
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")

    def coerce(self, value: Any) -> Any:
        if value is None:
            return None
        if self.kind == "float":
            v = float(value)
            if not math.isfinite(v):
                raise UsageError(f"--{self.name} must be finite")
            return v
        if self.kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise UsageError(f"--{self.name} must be an integer")
            return int(value)
        if self.kind == "floats":
            vals = [float(v) for v in value]
            if not all(math.isfinite(v) for v in vals):
                raise UsageError(f"--{self.name} must be finite")
            return vals
        v = str(value)
        if self.choices and v not in self.choices:
            raise UsageError(f"--{self.name} must be one of {', '.join(self.choices)}")
        return v


@dataclass
class RunConfig:
    """A fully resolved invocation: command, parameters, seed, output target and format."""

    command: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        obj = json.loads(text)
        unknown = set(obj) - {"command", "params", "seed", "output_path", "format"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in obj:
            raise UsageError("config needs a 'command'")
        return cls(
            command=obj["command"],
            params=dict(obj.get("params", {})),
            seed=int(obj.get("seed", 0)),
            output_path=obj.get("output_path"),
            format=obj.get("format", "csv"),
        )


@dataclass(frozen=True)
class Command:
    params: tuple[Param, ...]
    handler: Callable[[dict, RunConfig, int | None], "Result"]
    formats: tuple[str, ...] = ("csv", "json")
    help: str = ""


@dataclass
class Result:
    header: Sequence[str] = ()
    rows: list[list[Any]] = field(default_factory=list)
    t: np.ndarray | None = None
    ensemble: np.ndarray | None = None
    json_payload: str | None = None


# ---------------------------------------------------------------------------
# Shared parameter groups

ORDERS = (Param("beta", required=True), Param("gamma", required=True))
GRID = (Param("T", default=1.0, help="time horizon"), Param("n-steps", "int", default=256))
FUNCTION_SOURCE = (
    Param("input", "str", help="CSV file with header t,value"),
    Param("function", "str", choices=("one", "t", "t2", "t3", "sin", "cos", "exp"), help="built-in test function"),
)
SPDE = (
    Param("beta", required=True),
    Param("gamma", required=True),
    Param("alpha", required=True),
    Param("nu", required=True),
    Param("b", required=True),
    Param("sigma", required=True),
)
_FUNCTIONS = {
    "one": lambda t: np.ones_like(t),
    "t": lambda t: t,
    "t2": lambda t: t**2,
    "t3": lambda t: t**3,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
}


def _source_path(params: dict) -> fc.SampledPath:
    if (params.get("input") is None) == (params.get("function") is None):
        raise UsageError("give exactly one of --input or --function")
    if params.get("input") is not None:
        try:
            with open(params["input"]) as fh:
                return read_path_csv(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {params['input']}: {exc}") from None
    return fc.SampledPath.from_function(_FUNCTIONS[params["function"]], params["T"], params["n_steps"])


def _path_result(path: fc.SampledPath) -> Result:
    return Result(("t", "value"), [[t, v] for t, v in zip(path.t, path.values)])


# ---------------------------------------------------------------------------
# Handlers


def _ml_eval(p, cfg, jobs):
    ecfg = EvalConfig(p["series_tol"], p["max_terms"], p["switch_radius"], p["asymptotic_terms"])
    z = np.array(p["z"], dtype=float)
    vals = np.atleast_1d(ml_eval(p["beta"], p["rho"], z, ecfg))
    return Result(("z", "value"), [[a, b] for a, b in zip(z, vals)])


def _frac_apply(p, cfg, jobs):
    f = _source_path(p)
    op = p["op"]
    if op == "integral-rl":
        out = fc.frac_integral("RL", p["order"], f)
    elif op == "integral-kochubei":
        out = fc.frac_integral("Kochubei", p["order"], f)
    elif op == "rl-derivative":
        out = fc.rl_derivative(p["order"], f)
    else:
        out = fc.caputo_derivative(p["order"], f)
    return _path_result(out)


def _laplace_probe(p, cfg, jobs):
    f = _source_path(p)
    res = fc.laplace_numeric(f, fc.LaplaceGrid(tuple(p["lambdas"])))
    return Result(
        ("lambda", "value", "truncation_bound"),
        [[a, b, c] for a, b, c in zip(res.lambdas, res.values, res.truncation_bound)],
    )


def _ensemble_result(ens: vs.PathEnsemble) -> Result:
    return Result(t=ens.t, ensemble=ens.data)


def _sim_volterra(p, cfg, jobs):
    grid = vs.GridSpec(p["T"], p["n_steps"])
    if p["kernel"] == "power":
        kernel = vs.PowerKernel(p["scale"], p["exponent"])
    else:
        for name in ("a", "beta", "gamma"):
            if p.get(name) is None:
                raise UsageError(f"--{name} is required for the fou kernel")
        kernel = vs.FouKernel(p["a"], p["beta"], p["gamma"])
    ens = vs.simulate_volterra(kernel, grid, p["n_paths"], cfg.seed, p["method"], jobs)
    return _ensemble_result(ens)


def _sim_fou(p, cfg, jobs):
    grid = vs.GridSpec(p["T"], p["n_steps"])
    params = vs.FouParams(p["X0"], p["a"], p["beta"], p["gamma"])
    return _ensemble_result(vs.simulate_fou(params, grid, p["n_paths"], cfg.seed, p["method"], jobs))


def _ou_variance(p, cfg, jobs):
    params = vs.FouParams(p["X0"], p["a"], p["beta"], p["gamma"])
    t = np.array(p["t"], dtype=float)
    mean = np.atleast_1d(fa.fou_mean(params, t))
    var = np.atleast_1d(fa.fou_variance(params, t))
    return Result(("t", "mean", "variance"), [[a, b, c] for a, b, c in zip(t, mean, var)])


def _ou_limit(p, cfg, jobs):
    return Result(("value",), [[fa.fou_limit_variance(p["a"], p["beta"], p["gamma"])]])


def _ou_regime(p, cfg, jobs):
    regime = fa.regime_classify(p["beta"], p["gamma"])
    exponent = "" if regime.exponent is None else regime.exponent
    return Result(("regime", "exponent"), [[regime.tag.value, exponent]])


def _gbm(p) -> ce.GbmParams:
    return ce.GbmParams(p["X0"], p["a"], p["sigma"], p["beta"], p["gamma"])


def _chaos_moment(p, cfg, jobs):
    res = ce.gbm_second_moment_path(_gbm(p), p["t"], p["tol"], p["n_steps"])
    return Result(("t", "second_moment", "layers"), [[p["t"], res.path.values[-1], res.layers]])


def _chaos_propagator(p, cfg, jobs):
    grid = vs.GridSpec(p["T"], p["n_steps"])
    table = ce.gbm_propagator(_gbm(p), p["K"], p["N"], grid, p["max_entries"])
    rows = [
        [" ".join(f"{k}:{m}" for k, m in alpha.entries), alpha.order, row[-1]]
        for alpha, row in zip(table.indices, table.values)
    ]
    return Result(("alpha", "order", "value_at_T"), rows, json_payload=table.to_json() + "\n")


def _chaos_qnorm(p, cfg, jobs):
    q = ce.WeightSequence(c=p["c"], p=p["p"])
    levels = p["levels"]
    coeffs = ce.generalized_noise_table(p["T"], 2 ** (levels + 1) - 1, p["beta"], p["gamma"])
    blocks = ce.dyadic_block_sums(coeffs, q, levels)
    partial = np.sqrt(np.cumsum(blocks))
    rows = [[2 ** (j + 1) - 1, blocks[j], partial[j]] for j in range(levels + 1)]
    return Result(("k_max", "block_sum", "partial_norm"), rows)


def _spde_params(p) -> sa.SpdeParams:
    return sa.SpdeParams(p["beta"], p["gamma"], p["alpha"], p["nu"], p["b"], p["sigma"])


def _spde_classify(p, cfg, jobs):
    verdict = sa.classify(_spde_params(p), p["tol"])
    return Result(("verdict", "reason"), [[verdict.tag.value, verdict.reason]])


def _spde_probe(p, cfg, jobs):
    params = _spde_params(p)
    grid = vs.GridSpec(p["T"], p["n_steps"])
    ys = p["y"]
    workers = min(resolve_jobs(jobs), len(ys))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        ratios = list(pool.map(lambda y: sa.growth_probe(params, [y], grid)[0], ys))
    return Result(("y", "ratio"), [list(r) for r in ratios])


def _spde_sweep(p, cfg, jobs):
    rows = sa.sweep(p["betas"], p["gammas"], p["alphas"], p["nus"], p["bs"], p["sigmas"], p["tol"])
    out = []
    for row in rows:
        rec = row.as_record()
        out.append([rec[k] for k in sa.SWEEP_HEADER])
    return Result(sa.SWEEP_HEADER, out)


GBM = (
    Param("X0", default=1.0),
    Param("a", required=True),
    Param("sigma", required=True),
    Param("beta", required=True),
    Param("gamma", required=True),
)
METHOD = Param("method", "str", default="IncrementQuadrature", choices=("IncrementQuadrature", "CovarianceFactor"))

COMMANDS: dict[str, Command] = {
    "ml eval": Command(
        (
            Param("beta", required=True),
            Param("rho", required=True),
            Param("z", "floats", required=True),
            Param("series-tol", default=1e-16),
            Param("max-terms", "int", default=10_000),
            Param("switch-radius", default=10.0),
            Param("asymptotic-terms", "int", default=8),
        ),
        _ml_eval,
        help="two-parameter Mittag-Leffler function",
    ),
    "frac apply": Command(
        (
            Param(
                "op",
                "str",
                required=True,
                choices=("integral-rl", "integral-kochubei", "rl-derivative", "caputo-derivative"),
            ),
            Param("order", required=True),
            *FUNCTION_SOURCE,
            *GRID,
        ),
        _frac_apply,
        help="fractional integral or derivative of a sampled path",
    ),
    "laplace probe": Command(
        (Param("lambdas", "floats", required=True), *FUNCTION_SOURCE, *GRID),
        _laplace_probe,
        help="numerical Laplace transform of a sampled path",
    ),
    "sim volterra": Command(
        (
            Param("kernel", "str", default="power", choices=("power", "fou")),
            Param("scale", default=1.0),
            Param("exponent", default=0.0),
            Param("a"),
            Param("beta"),
            Param("gamma"),
            Param("n-paths", "int", default=1000),
            METHOD,
            *GRID,
        ),
        _sim_volterra,
        FORMATS,
        help="Gaussian Volterra process ensemble",
    ),
    "sim fou": Command(
        (Param("X0", default=0.0), Param("a", required=True), *ORDERS, Param("n-paths", "int", default=1000), METHOD, *GRID),
        _sim_fou,
        FORMATS,
        help="fractional Ornstein-Uhlenbeck ensemble",
    ),
    "ou variance": Command(
        (Param("X0", default=0.0), Param("a", required=True), *ORDERS, Param("t", "floats", required=True)),
        _ou_variance,
        help="mean and variance of the fractional OU process",
    ),
    "ou limit": Command((Param("a", required=True), *ORDERS), _ou_limit, help="limiting variance"),
    "ou regime": Command(ORDERS, _ou_regime, help="long-time regime"),
    "chaos gbm-moment": Command(
        (*GBM, Param("t", default=1.0), Param("tol", default=1e-12), Param("n-steps", "int", default=1024)),
        _chaos_moment,
        help="second moment of the fractional GBM",
    ),
    "chaos propagator": Command(
        (
            *GBM,
            Param("K", "int", default=8),
            Param("N", "int", default=2),
            Param("max-entries", "int", default=ce.DEFAULT_MAX_ENTRIES),
            *GRID,
        ),
        _chaos_propagator,
        help="chaos coefficient table of the fractional GBM",
    ),
    "chaos qnorm": Command(
        (
            *ORDERS,
            Param("p", required=True),
            Param("c", default=0.5),
            Param("levels", "int", default=8),
            Param("T", default=1.0),
        ),
        _chaos_qnorm,
        help="dyadic partial weighted norms of first-order coefficients",
    ),
    "spde classify": Command((*SPDE, Param("tol", default=0.0)), _spde_classify, help="well-posedness verdict"),
    "spde probe": Command(
        (*SPDE, Param("y", "floats", default=[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]), *GRID),
        _spde_probe,
        help="second-moment growth per wavenumber",
    ),
    "spde sweep": Command(
        (
            Param("betas", "floats", required=True),
            Param("gammas", "floats", required=True),
            Param("alphas", "floats", required=True),
            Param("nus", "floats", required=True),
            Param("bs", "floats", required=True),
            Param("sigmas", "floats", required=True),
            Param("tol", default=0.0),
        ),
        _spde_sweep,
        help="phase-diagram sweep of the classifier",
    ),
}


def resolve_params(command: str, given: dict[str, Any]) -> dict[str, Any]:
    """Fill defaults, coerce types and check required parameters for ``command``."""
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    spec = COMMANDS[command]
    known = {prm.dest for prm in spec.params}
    unknown = set(given) - known
    if unknown:
        raise UsageError(f"unknown parameters for {command!r}: {sorted(unknown)}")
    out = {}
    for prm in spec.params:
        value = given.get(prm.dest, prm.default)
        if value is None and prm.required:
            raise UsageError(f"--{prm.name} is required for {command!r}")
        out[prm.dest] = prm.coerce(value)
    return out


def _add_param(parser: argparse.ArgumentParser, prm: Param) -> None:
    kwargs: dict[str, Any] = {"dest": prm.dest, "default": None, "help": prm.help or None}
    if prm.kind == "float":
        kwargs["type"] = finite_float
    elif prm.kind == "int":
        kwargs["type"] = int
    elif prm.kind == "floats":
        kwargs["type"] = finite_float
        kwargs["nargs"] = "+"
    if prm.choices:
        kwargs["choices"] = prm.choices
    parser.add_argument(f"--{prm.name}", **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsde", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--config", help="run the JSON RunConfig in this file")
    groups = parser.add_subparsers(dest="group", metavar="GROUP")
    by_group: dict[str, argparse._SubParsersAction] = {}
    for name, spec in COMMANDS.items():
        group, cmd = name.split(" ")
        if group not in by_group:
            gp = groups.add_parser(group, allow_abbrev=False)
            by_group[group] = gp.add_subparsers(dest="cmd", metavar="COMMAND", required=True)
        sub = by_group[group].add_parser(cmd, help=spec.help, allow_abbrev=False)
        for prm in spec.params:
            _add_param(sub, prm)
        sub.add_argument("--seed", type=seed_int, default=0)
        sub.add_argument("--output", default=None, help="output file (default: standard output)")
        sub.add_argument("--format", choices=spec.formats, default="csv")
        sub.add_argument("--force", action="store_true", help="overwrite an existing output file")
        sub.add_argument("--jobs", type=int, default=None, help="worker threads (default: FRACSDE_JOBS or CPU count)")
        sub.add_argument("--save-config", default=None, help="also write the resolved RunConfig as JSON")
        sub.set_defaults(command=name)
    return parser


def render(cfg: RunConfig, result: Result) -> str | bytes:
    fmt = cfg.format
    if result.ensemble is not None:
        if fmt == "bin":
            return ensemble_bytes(result.t, result.ensemble)
        if fmt == "json":
            return json_text({"t": result.t.tolist(), "paths": result.ensemble.tolist()})
        return ensemble_csv(result.t, result.ensemble)
    if fmt == "bin":
        raise UsageError(f"format 'bin' is only available for ensembles")
    if fmt == "json":
        if result.json_payload is not None:
            return result.json_payload
        rows = [dict(zip(result.header, row)) for row in result.rows]
        return json_text({"command": cfg.command, "rows": rows})
    return csv_text(result.header, result.rows)


def execute(cfg: RunConfig, jobs: int | None = None, force: bool = False) -> None:
    if cfg.format not in FORMATS:
        raise UsageError(f"unknown format {cfg.format!r}")
    params = resolve_params(cfg.command, cfg.params)
    spec = COMMANDS[cfg.command]
    if cfg.format not in spec.formats:
        raise UsageError(f"format {cfg.format!r} is not available for {cfg.command!r}")
    result = spec.handler(params, cfg, jobs)
    write_output(render(cfg, result), cfg.output_path, force)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    spec = COMMANDS[args.command]
    given = {prm.dest: getattr(args, prm.dest) for prm in spec.params if getattr(args, prm.dest) is not None}
    return RunConfig(args.command, resolve_params(args.command, given), args.seed, args.output, args.format)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.config is not None:
            if args.group is not None:
                raise UsageError("--config cannot be combined with a subcommand")
            with open(args.config) as fh:
                cfg = RunConfig.from_json(fh.read())
            execute(cfg)
            return EXIT_OK
        if args.group is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        cfg = config_from_args(args)
        if args.save_config:
            write_output(cfg.to_json() + "\n", args.save_config, args.force)
        execute(cfg, args.jobs, args.force)
        return EXIT_OK
    except UsageError as exc:
        print(f"fracsde: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fracsde: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"fracsde: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"fracsde: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())
