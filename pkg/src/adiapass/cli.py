"""Command-line surface: flat key=value configs in, CSV (+ optional PNG) out.

Every subcommand writes a `#`-commented header carrying the tool version and
the fully resolved configuration between `# config:` and `# end config`
markers; stripping the leading `# ` from that block yields a config file that
reproduces the same CSV byte for byte. Exit codes: 0 success, 1 validation
or usage error, 2 integration-accuracy error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional, TextIO, Union

from . import __version__
from .dynamics import IntegratorOptions, resolve_step
from .errors import IntegrationAccuracyError, ValidationError
from .experiments import (
    compare_analytic,
    compare_grid_from_mu0,
    default_compare_mu0_values,
    default_ratio_values,
    default_tau_values,
    gap_profile,
    population_trace,
    sweep_mu0,
    sweep_ratio,
    sweep_tau,
)
from .model import SystemConfig

SUBCOMMANDS = ("evolve", "gap", "analytic", "sweep-tau", "sweep-mu0", "sweep-ratio", "compare")

DEFAULT_ALPHA_OVER_TAU = 5.0
DEFAULT_GAP_ALPHAS_OVER_TAU = (3.0, 4.0, 5.0, 6.0)

_FLOAT_KEYS = ("j1", "j2", "mu0", "tau", "alpha", "alpha_over_tau")
_LIST_KEYS = ("gap_alphas", "gap_alphas_over_tau", "tau_values", "mu0_values", "ratio_values")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed key=value document with defaults (the alpha=5/tau baseline)."""

    j1: float = 0.8
    j2: float = 1.0
    mu0: float = 20.0
    tau: float = 400.0
    alpha: Optional[float] = None
    alpha_over_tau: Optional[float] = None
    step: Union[float, str] = "auto"
    sample_stride: Union[int, str] = "auto"
    n_grid: int = 2001
    gap_alphas: Optional[tuple[float, ...]] = None
    gap_alphas_over_tau: Optional[tuple[float, ...]] = None
    tau_values: Optional[tuple[float, ...]] = None
    mu0_values: Optional[tuple[float, ...]] = None
    ratio_values: Optional[tuple[float, ...]] = None


_KNOWN_KEYS = tuple(f.name for f in fields(ExperimentConfig))


def _parse_float(key: str, raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(
            f"{where}: expected a numeric literal for {key!r}, got {raw!r} "
            "(expressions such as 4/tau are not supported)"
        ) from None


def _parse_value(key: str, raw: str, where: str):
    if key in _FLOAT_KEYS:
        return _parse_float(key, raw, where)
    if key in _LIST_KEYS:
        parts = [p.strip() for p in raw.split(",")]
        if not any(parts):
            raise ValidationError(f"{where}: empty list for {key!r}")
        return tuple(_parse_float(key, p, where) for p in parts if p)
    if key in ("step", "sample_stride"):
        if raw == "auto":
            return "auto"
        if key == "sample_stride":
            try:
                return int(raw)
            except ValueError:
                raise ValidationError(
                    f"{where}: expected an integer or 'auto' for {key!r}, got {raw!r}"
                ) from None
        return _parse_float(key, raw, where)
    if key == "n_grid":
        try:
            return int(raw)
        except ValueError:
            raise ValidationError(f"{where}: expected an integer for {key!r}, got {raw!r}") from None
    raise AssertionError(f"unhandled key {key}")


def _parse_assignment(line: str, where: str) -> tuple[str, object]:
    if "=" not in line:
        raise ValidationError(f"{where}: expected 'key = value', got {line!r}")
    key, _, raw = line.partition("=")
    key = key.strip()
    raw = raw.strip()
    if key not in _KNOWN_KEYS:
        raise ValidationError(f"{where}: unknown key {key!r}")
    if not raw:
        raise ValidationError(f"{where}: missing value for {key!r}")
    return key, _parse_value(key, raw, where)


def parse_config(text: str) -> ExperimentConfig:
    """Parse a flat key=value document ('#' starts a comment, blank lines ok)."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, value = _parse_assignment(stripped, f"line {lineno}")
        values[key] = value
    return ExperimentConfig(**values)


def apply_overrides(config: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply --set key=value pairs on top of a parsed config."""
    values = {}
    for i, item in enumerate(overrides, start=1):
        key, value = _parse_assignment(item.strip(), f"--set #{i}")
        values[key] = value
    return replace(config, **values)


def resolved_alpha(config: ExperimentConfig) -> float:
    if config.alpha is not None and config.alpha_over_tau is not None:
        raise ValidationError("alpha and alpha_over_tau are mutually exclusive")
    if config.alpha is not None:
        return config.alpha
    k = DEFAULT_ALPHA_OVER_TAU if config.alpha_over_tau is None else config.alpha_over_tau
    return k / config.tau


def resolved_gap_alphas(config: ExperimentConfig) -> tuple[float, ...]:
    if config.gap_alphas is not None and config.gap_alphas_over_tau is not None:
        raise ValidationError("gap_alphas and gap_alphas_over_tau are mutually exclusive")
    if config.gap_alphas is not None:
        return config.gap_alphas
    ks = config.gap_alphas_over_tau or DEFAULT_GAP_ALPHAS_OVER_TAU
    return tuple(k / config.tau for k in ks)


def system_config(config: ExperimentConfig) -> SystemConfig:
    return SystemConfig.create(
        j1=config.j1,
        j2=config.j2,
        mu0=config.mu0,
        alpha=resolved_alpha(config),
        tau=config.tau,
    )


def integrator_options(config: ExperimentConfig) -> IntegratorOptions:
    return IntegratorOptions(step=config.step, sample_stride=config.sample_stride)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _cfg_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def config_block(config: ExperimentConfig, subcommand: str) -> list[str]:
    """Fully resolved key=value lines for the header (round-trip source)."""
    entries: list[tuple[str, object]] = [
        ("j1", config.j1),
        ("j2", config.j2),
        ("mu0", config.mu0),
        ("tau", config.tau),
        ("alpha", resolved_alpha(config)),
        ("step", config.step),
        ("sample_stride", config.sample_stride),
    ]
    if subcommand == "gap":
        entries.append(("n_grid", config.n_grid))
        entries.append(("gap_alphas", resolved_gap_alphas(config)))
    elif subcommand == "sweep-tau":
        values = config.tau_values or default_tau_values(system_config(config))
        entries.append(("tau_values", tuple(values)))
    elif subcommand == "sweep-mu0":
        values = config.mu0_values or tuple(float(v) for v in range(2, 41, 2))
        entries.append(("mu0_values", tuple(values)))
    elif subcommand == "sweep-ratio":
        values = config.ratio_values or default_ratio_values()
        entries.append(("ratio_values", tuple(values)))
    elif subcommand == "compare":
        values = config.mu0_values or default_compare_mu0_values()
        entries.append(("mu0_values", tuple(values)))
    return [f"{key} = {_cfg_value(value)}" for key, value in entries]


def extract_config_block(csv_text: str) -> str:
    """Recover the config document embedded in an output's header comments."""
    lines = []
    inside = False
    for line in csv_text.splitlines():
        if line.strip() == "# config:":
            inside = True
            continue
        if line.strip() == "# end config":
            return "\n".join(lines) + "\n"
        if inside:
            lines.append(line.removeprefix("# "))
    raise ValidationError("no config block found in input")


def _write_header(sink: TextIO, subcommand: str, config: ExperimentConfig,
                  columns: list[str], extra: list[str]) -> None:
    sink.write(f"# adiapass {__version__} subcommand={subcommand}\n")
    for line in extra:
        sink.write(f"# {line}\n")
    sink.write("# config:\n")
    for line in config_block(config, subcommand):
        sink.write(f"# {line}\n")
    sink.write("# end config\n")
    sink.write(",".join(columns) + "\n")


def _run_evolve(config: ExperimentConfig, sink: TextIO, plot: Optional[str]) -> int:
    sys_cfg = system_config(config)
    opts = integrator_options(config)
    h, n_steps = resolve_step(sys_cfg, opts)
    traj = population_trace(sys_cfg, opts=opts)
    _write_header(
        sink, "evolve", config,
        ["t", "pop_L", "pop_M", "pop_R"],
        [f"step_size: {h!r} n_steps: {n_steps} samples: {len(traj.times)}"],
    )
    for k in range(len(traj.times)):
        p = traj.populations[k]
        sink.write(f"{_fmt(traj.times[k])},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}\n")
    if plot:
        from . import plotting

        plotting.plot_populations(traj, plot)
    return 0


def _run_gap(config: ExperimentConfig, sink: TextIO, plot: Optional[str]) -> int:
    sys_cfg = system_config(config)
    alphas = resolved_gap_alphas(config)
    profile = gap_profile(sys_cfg, alphas, n_grid=config.n_grid)
    columns = ["t"] + [f"gap_alpha{i + 1}" for i in range(len(alphas))]
    _write_header(sink, "gap", config, columns, [])
    for k in range(len(profile.times)):
        row = [_fmt(profile.times[k])] + [_fmt(profile.gaps[i, k]) for i in range(len(alphas))]
        sink.write(",".join(row) + "\n")
    if plot:
        from . import plotting

        plotting.plot_gap_profile(profile, plot)
    return 0


def _run_analytic(config: ExperimentConfig, sink: TextIO, plot: Optional[str]) -> int:
    if plot:
        raise ValidationError("the analytic subcommand has no figure output")
    from .perturbation import analytic_fidelity

    value = analytic_fidelity(config.j1, config.j2, config.mu0)
    _write_header(sink, "analytic", config, ["j1", "j2", "mu0", "fidelity_sq"], [])
    sink.write(f"{_fmt(config.j1)},{_fmt(config.j2)},{_fmt(config.mu0)},{_fmt(value)}\n")
    return 0


def _run_sweep(subcommand: str, config: ExperimentConfig, sink: TextIO,
               plot: Optional[str]) -> int:
    sys_cfg = system_config(config)
    opts = integrator_options(config)
    if subcommand == "sweep-tau":
        result = sweep_tau(sys_cfg, config.tau_values, opts=opts)
    elif subcommand == "sweep-mu0":
        result = sweep_mu0(sys_cfg, config.mu0_values, opts=opts)
    else:
        result = sweep_ratio(sys_cfg, config.ratio_values, opts=opts)
    meta = [f"step: {config.step if isinstance(config.step, str) else repr(config.step)}"]
    if subcommand == "sweep-tau":
        k = resolved_alpha(config) * config.tau
        meta.append(f"pulse shape co-scaled: alpha = {k!r}/tau at every point")
    _write_header(
        sink, subcommand, config,
        ["swept_value", "fidelity_sq", "min_gap", "max_adiab_metric"],
        meta,
    )
    for rec in result.records:
        sink.write(
            f"{_fmt(rec.value)},{_fmt(rec.fidelity_sq)},{_fmt(rec.min_gap)},"
            f"{_fmt(rec.max_adiab_metric)}\n"
        )
        if rec.error is not None:
            sink.write(f"# integration-accuracy error at {_fmt(rec.value)}: {rec.error}\n")
    if plot:
        from . import plotting

        plotting.plot_sweep(result, plot)
    if result.failed:
        failed = [r.value for r in result.records if r.error is not None]
        print(
            f"adiapass: {len(failed)} sweep point(s) failed integration accuracy: "
            f"{', '.join(_fmt(v) for v in failed)}",
            file=sys.stderr,
        )
        return 2
    return 0


def _run_compare(config: ExperimentConfig, sink: TextIO, plot: Optional[str]) -> int:
    sys_cfg = system_config(config)
    grid = compare_grid_from_mu0(sys_cfg, config.mu0_values)
    rows = compare_analytic(grid, opts=integrator_options(config))
    _write_header(
        sink, "compare", config,
        ["mu0", "j1", "j2", "numeric", "analytic", "abs_diff"], [],
    )
    for r in rows:
        sink.write(
            f"{_fmt(r.mu0)},{_fmt(r.j1)},{_fmt(r.j2)},{_fmt(r.numeric)},"
            f"{_fmt(r.analytic)},{_fmt(r.abs_diff)}\n"
        )
    if plot:
        from . import plotting

        plotting.plot_compare(rows, plot)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="adiapass",
        description="Adiabatic state transfer in a gate-driven triple-dot chain.",
    )
    parser.add_argument("--version", action="version", version=f"adiapass {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    descriptions = {
        "evolve": "integrate the drive and emit site populations over time",
        "gap": "instantaneous energy-gap curves for a set of pulse widths",
        "analytic": "closed-form perturbative transfer fidelity",
        "sweep-tau": "fidelity vs total evolution time (pulse shape co-scaled)",
        "sweep-mu0": "fidelity vs peak gate voltage",
        "sweep-ratio": "fidelity vs coupling ratio J1/J2",
        "compare": "numeric vs analytic fidelity over a mu0 grid",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[], help=descriptions[name])
        p.set_defaults(subcommand=name)
        p.add_argument("--config", metavar="FILE", help="key=value config file")
        p.add_argument("--out", metavar="FILE", help="output CSV path (default stdout)")
        p.add_argument(
            "--set",
            metavar="KEY=VALUE",
            action="append",
            default=[],
            dest="overrides",
            help="override a config key (applied after --config; repeatable)",
        )
        p.add_argument("--plot", metavar="FILE", help="also render a PNG figure here")
    return parser


_RUNNERS = {
    "evolve": _run_evolve,
    "gap": _run_gap,
    "analytic": _run_analytic,
    "compare": _run_compare,
}


def _dispatch(args: argparse.Namespace) -> int:
    try:
        text = ""
        if args.config is not None:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ValidationError(f"cannot read config file: {exc}") from None
        config = apply_overrides(parse_config(text), args.overrides)
        sub = args.subcommand
        runner = _RUNNERS.get(sub, lambda c, s, p: _run_sweep(sub, c, s, p))
        if args.out is not None:
            with open(args.out, "w", encoding="utf-8", newline="\n") as sink:
                return runner(config, sink, args.plot)
        return runner(config, sys.stdout, args.plot)
    except ValidationError as exc:
        print(f"adiapass: error: {exc}", file=sys.stderr)
        return 1
    except IntegrationAccuracyError as exc:
        print(f"adiapass: integration accuracy: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("adiapass: error: a subcommand is required", file=sys.stderr)
        return 1
    return _dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
