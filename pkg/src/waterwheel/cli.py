"""Command line runner that writes scenario data files.

Usage::

    waterwheel run --scenario unsteady-asymmetric --x0 1 --out results/
    waterwheel suite --out results/

Each run writes ``trajectory.csv``, ``gseries.csv``, ``events.csv``,
``region.csv`` and ``summary.json`` into its output directory. A suite runs
the three wheels with ``x0`` in ``{1, 0}``, one subdirectory each, plus
``comparison.json``.

Configuration files hold one ``key = value`` pair per line (``#`` starts a
comment). Keys and the flags that override them:

=========================== =====================
key                         flag
=========================== =====================
scenario                    --scenario
x0                          --x0
span.end                    --t-end
integrator.method           --method
integrator.step             --step
integrator.rtol             --rtol
integrator.atol             --atol
integrator.sample_interval  --sample-interval
modes.epsilon               --epsilon
region.x                    --grid-x (``lo,hi``)
region.z                    --grid-z (``lo,hi``)
region.n                    --grid-n
region.tau                  --snapshot-tau
lyapunov.interval           --lyap-interval
lyapunov.perturbation       --lyap-perturbation
lyapunov.transient          --transient
lyapunov.seed               --seed
forcing.r                   --forcing-r (JSON)
forcing.mu                  --forcing-mu (JSON)
output.dir                  --out
=========================== =====================

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import forcing
from .diagnostics import largest_lyapunov, sign_switch_count
from .highermodes import evolving_circle
from .integrate import IntegrationError, IntegratorOptions, integrate
from .modesanalysis import RESIDUAL_PAIRS, check_conjecture, pair_name, region_grid, residual_series
from .models import SCENARIOS, make_scenario, mode_labels, mode_rhs

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
SUITE_RUNS = tuple((kind, x0) for x0 in (1.0, 0.0) for kind in SCENARIOS)
CLAIMED_DISORDER = ("unsteady-asymmetric", "steady-asymmetric", "unsteady-symmetric")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "unsteady-asymmetric"
    x0: float = 1.0
    t_end: float = 60.0
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    epsilon: float = 0.5
    grid_x: tuple = (-30.0, 30.0)
    grid_z: tuple = (-10.0, 110.0)
    grid_n: int = 601
    snapshot_tau: float = 5.0
    lyap_interval: float = 0.5
    lyap_perturbation: float = 1e-8
    transient: float = 20.0
    seed: int = 0
    forcing_r: forcing.TimeFunction | None = None
    forcing_mu: forcing.TimeFunction | None = None
    out: str = "out"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {', '.join(SCENARIOS)}")
        if not self.t_end > 0:
            raise ConfigError("span end must be positive")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.grid_n < 2:
            raise ConfigError("grid size must be at least 2")
        for name in ("grid_x", "grid_z"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise ConfigError(f"{name} needs lo < hi")
        if not 0 <= self.transient < self.t_end:
            raise ConfigError("transient must lie inside the span")


# config keys ---------------------------------------------------------------

def _pair(text):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _expr(text):
    return forcing.from_dict(json.loads(text))


# key -> (config field, flag, parser)
_KEYS = {
    "scenario": ("scenario", "--scenario", str),
    "x0": ("x0", "--x0", float),
    "span.end": ("t_end", "--t-end", float),
    "integrator.method": ("method", "--method", str),
    "integrator.step": ("step", "--step", float),
    "integrator.rtol": ("rtol", "--rtol", float),
    "integrator.atol": ("atol", "--atol", float),
    "integrator.sample_interval": ("sample_interval", "--sample-interval", float),
    "modes.epsilon": ("epsilon", "--epsilon", float),
    "region.x": ("grid_x", "--grid-x", _pair),
    "region.z": ("grid_z", "--grid-z", _pair),
    "region.n": ("grid_n", "--grid-n", int),
    "region.tau": ("snapshot_tau", "--snapshot-tau", float),
    "lyapunov.interval": ("lyap_interval", "--lyap-interval", float),
    "lyapunov.perturbation": ("lyap_perturbation", "--lyap-perturbation", float),
    "lyapunov.transient": ("transient", "--transient", float),
    "lyapunov.seed": ("seed", "--seed", int),
    "forcing.r": ("forcing_r", "--forcing-r", _expr),
    "forcing.mu": ("forcing_mu", "--forcing-mu", _expr),
    "output.dir": ("out", "--out", str),
}
_INTEGRATOR_FIELDS = ("method", "step", "rtol", "atol", "sample_interval")


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        name, _, parse = _KEYS[key]
        try:
            values[name] = parse(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return values


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def build_config(values) -> ScenarioConfig:
    values = dict(values)
    integ = {k: values.pop(k) for k in _INTEGRATOR_FIELDS if k in values}
    try:
        options = IntegratorOptions(**integ)
        return ScenarioConfig(integrator=options, **values)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def config_to_dict(cfg: ScenarioConfig):
    out = {}
    for f in dataclasses.fields(cfg):
        if f.name == "out":
            # outputs must not depend on where they are written
            continue
        value = getattr(cfg, f.name)
        if isinstance(value, IntegratorOptions):
            value = dataclasses.asdict(value)
        elif isinstance(value, forcing.TimeFunction):
            value = value.to_dict()
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


# output ----------------------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _write_region(path: Path, xs, zs, mask):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["z"] + [_fmt(x) for x in xs]) + "\n")
        for z, row in zip(zs, mask):
            fh.write(_fmt(z) + "," + ",".join("1" if v else "0" for v in row) + "\n")


def run_scenario(cfg: ScenarioConfig, out_dir=None):
    """Integrate one scenario, analyse it and write its data files.

    Returns the summary dictionary that is also written to ``summary.json``.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params, state0, _ = make_scenario(cfg.scenario, cfg.x0, r=cfg.forcing_r, mu=cfg.forcing_mu)
    span = (0.0, cfg.t_end)

    def rhs(s, tau):
        return mode_rhs(s, tau, params)

    log.info("integrating %s with x0=%g", cfg.scenario, cfg.x0)
    traj = integrate(rhs, state0, span, cfg.integrator, labels=mode_labels(params.N))
    times = traj.times

    pn, qn = params.forcing(2)
    ca, cb = pn(times) / 2.0, qn(times) / 2.0
    radius = np.hypot(ca, cb)
    _write_csv(
        out_dir / "trajectory.csv",
        ("tau",) + traj.labels + ("circle_center_a", "circle_center_b", "circle_radius"),
        np.column_stack([times, traj.states, ca, cb, radius]),
    )

    resid = residual_series(traj, params)
    _write_csv(
        out_dir / "gseries.csv",
        ["tau"] + [pair_name(pair) for pair in RESIDUAL_PAIRS],
        np.column_stack([times, resid]),
    )

    report = check_conjecture(traj, params, cfg.epsilon)
    with open(out_dir / "events.csv", "w", newline="") as fh:
        fh.write("tau,i,j,g_value,residual\n")
        for e in report.events:
            fh.write(f"{_fmt(e.tau)},{e.pair[0]},{e.pair[1]},{_fmt(e.g_value)},{_fmt(e.residual)}\n")

    xs, zs, mask = region_grid(params, cfg.snapshot_tau, cfg.grid_x, cfg.grid_z, cfg.grid_n)
    _write_region(out_dir / "region.csv", xs, zs, mask)

    late = np.flatnonzero(traj.window(cfg.transient, cfg.t_end))
    late_window = (int(late[0]), int(late[-1]) + 1)
    switches = {
        label: {
            "full": sign_switch_count(traj[label]),
            "after_transient": sign_switch_count(traj[label], late_window),
        }
        for label in ("x", "y")
    }

    # a still symmetric wheel sits on the invariant manifold x = y = 0; the
    # exponent is then measured on the remaining variables
    still = params.mu.is_constant and params.mu(0.0) == 0.0 and cfg.x0 == 0.0
    frozen = (0,) if still else ()
    lyap = largest_lyapunov(
        rhs,
        state0,
        span,
        cfg.lyap_interval,
        cfg.lyap_perturbation,
        transient=cfg.transient,
        step=cfg.integrator.step,
        seed=cfg.seed,
        frozen=frozen,
    )
    circles = [evolving_circle(2, float(t), params) for t in (cfg.transient, cfg.t_end)]

    summary = {
        "scenario": cfg.scenario,
        "x0": cfg.x0,
        "span": list(span),
        "samples": len(traj),
        "config": config_to_dict(cfg),
        "forcing": {"r": params.r.to_dict(), "mu": params.mu.to_dict()},
        "conjecture": {
            "condition_1": report.conditions[0],
            "condition_2": report.conditions[1],
            "condition_3": report.conditions[2],
            "condition_4": report.conditions[3],
            "all": report.all_satisfied,
            "explicit_time_dependence": report.explicit_time_dependence,
            "event_counts": report.pair_counts,
            "total_events": len(report.events),
            "region_fraction": report.region_fraction,
        },
        "sign_switches": switches,
        "lyapunov": dict(lyap.to_dict(), subsystem=[l for i, l in enumerate(traj.labels) if i not in frozen]),
        "max_abs": {label: float(np.max(np.abs(traj[label]))) for label in traj.labels},
        "circle_radius": {"max": float(radius.max()), "at": {_fmt(c.tau): c.radius for c in circles}},
    }
    _write_json(out_dir / "summary.json", summary)
    return summary


def run_suite(base: ScenarioConfig, out_dir=None):
    """Run the six reference combinations and write ``comparison.json``."""
    out_dir = Path(out_dir if out_dir is not None else base.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs = {}
    for kind, x0 in SUITE_RUNS:
        name = f"{kind}_x0-{x0:g}"
        cfg = dataclasses.replace(base, scenario=kind, x0=x0)
        summary = run_scenario(cfg, out_dir / name)
        runs[name] = {
            "scenario": kind,
            "x0": x0,
            "lyapunov": summary["lyapunov"]["exponent"],
            "sign_switches_x": summary["sign_switches"]["x"],
            "event_counts": summary["conjecture"]["event_counts"],
            "total_events": summary["conjecture"]["total_events"],
            "max_abs_x": summary["max_abs"]["x"],
        }
    disorder = {}
    for x0 in (1.0, 0.0):
        lyap = {kind: runs[f"{kind}_x0-{x0:g}"]["lyapunov"] for kind in SCENARIOS}
        observed = sorted(SCENARIOS, key=lambda k: -lyap[k])
        disorder[f"x0={x0:g}"] = {
            "by_lyapunov": observed,
            "claimed": list(CLAIMED_DISORDER),
            "holds": all(lyap[a] >= lyap[b] for a, b in zip(CLAIMED_DISORDER, CLAIMED_DISORDER[1:])),
        }
    comparison = {"runs": runs, "disorder": disorder}
    _write_json(out_dir / "comparison.json", comparison)
    return comparison


# argument handling -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_flags(parser, suite=False):
    parser.add_argument("--config", help="key = value configuration file")
    for key, (name, flag, _) in _KEYS.items():
        if suite and name in ("scenario", "x0"):
            continue
        parser.add_argument(flag, dest=name, default=None, metavar=key.split(".")[-1].upper(),
                            help=f"overrides config key '{key}'")


def build_parser():
    parser = _Parser(prog="waterwheel", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_flags(sub.add_parser("run", help="run a single scenario"))
    _add_flags(sub.add_parser("suite", help="run all six reference combinations"), suite=True)
    return parser


def config_from_args(args) -> ScenarioConfig:
    values = load_config(args.config) if args.config else {}
    for key, (name, flag, parse) in _KEYS.items():
        raw = getattr(args, name, None)
        if raw is None:
            continue
        try:
            values[name] = parse(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {flag}: {exc}") from None
    return build_config(values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "run":
            run_scenario(cfg)
        else:
            run_suite(cfg)
    except ConfigError as exc:
        print(f"waterwheel: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"waterwheel: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"waterwheel: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
