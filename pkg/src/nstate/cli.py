"""Command-line surface: design transfers, simulate, kick schedules, leakage scans.

Subcommands
-----------
design    print the complete-transfer coupling ratio and pulse area for n states
simulate  run the analytic and/or RK4 routes and emit a CSV (optionally an SVG)
kick      propagate a delta-kick schedule and emit pre/post-kick CSV rows
leakage   scan detuning ratios, emit ratio/leakage CSV plus a power-law fit line
selftest  run the cross-module invariant suite and report pass/fail per property

Conventions
-----------
* CSV floats carry 17 significant digits with LF line endings, so repeated
  runs of the same configuration are byte-identical.
* Machine output (CSV, porcelain key=value lines) goes to --out or stdout;
  prose goes to stderr whenever stdout carries data.
* Every failure prints a single ``error=<Name>`` line on stderr.  Exit codes:
  0 success, 1 selftest failure, 2 usage/configuration, 3 numerical failure.

Config files are flat ``key = value`` lines under ``[system]``, ``[pulse]``
and ``[run]`` headers; unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import fit_power_law, leakage_scan
from .errors import NUMERICAL_ERRORS, ConfigError, NStateError
from .integrator import IntegratorConfig, default_dt, integrate, integrate_kicks
from .model import (
    ConstantPulse,
    CosinePulse,
    ExplicitCoupling,
    GaussianPulse,
    KickTrain,
    StructuredCoupling,
    SystemSpec,
    Trajectory,
    invert_area,
)
from .spectral import design_transfer, design_transfer_2state, evolve_analytic

CSV_COLUMNS = ["t", "A", "theta", "P1", "P2", "P3_per_state", "P3_total", "norm"]
RK4_COLUMNS = ["P1_rk4", "P2_rk4", "P3_per_state_rk4", "P3_total_rk4", "norm_rk4"]

_KNOWN_KEYS = {
    "system": {"n", "alpha", "beta", "gamma", "epsilon", "energies", "matrix"},
    "pulse": {"shape", "chi", "omega", "v0", "peak", "center", "width", "kicks"},
    "run": {"t_end", "dt", "samples", "n0", "method"},
}


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems in the machine-parsable format."""

    def error(self, message):
        print("error=Usage", file=sys.stderr)
        print(message, file=sys.stderr)
        raise SystemExit(2)


# ---------------------------------------------------------------------------
# configuration handling


def parse_config_text(text: str) -> dict[str, dict[str, str]]:
    """Parse flat ``[section]`` / ``key = value`` lines; unknown keys are fatal."""
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in _KNOWN_KEYS:
                raise ConfigError(f"unknown section [{current}] at line {lineno}")
            sections.setdefault(current, {})
            continue
        if "=" not in line or current is None:
            raise ConfigError(f"expected 'key = value' inside a section at line {lineno}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _KNOWN_KEYS[current]:
            raise ConfigError(f"unknown key '{key}' in section [{current}] at line {lineno}")
        sections[current][key] = value.strip()
    return sections


def _merge_inline(sections, args) -> dict[str, dict[str, str]]:
    """Inline flags override config-file entries (same keys, same parsing)."""
    inline = {
        "system": {
            "n": args.n,
            "alpha": args.alpha,
            "beta": args.beta,
            "gamma": args.gamma,
            "epsilon": args.epsilon,
            "energies": args.energies,
            "matrix": args.matrix,
        },
        "pulse": {
            "shape": args.pulse,
            "chi": args.chi,
            "omega": args.omega,
            "v0": args.v0,
            "peak": args.peak,
            "center": args.center,
            "width": args.width,
            "kicks": getattr(args, "kicks", None),
        },
        "run": {
            "t_end": args.t_end,
            "dt": args.dt,
            "samples": args.samples,
            "n0": args.n0,
            "method": getattr(args, "method", None),
        },
    }
    merged = {sec: dict(vals) for sec, vals in sections.items()}
    for sec, vals in inline.items():
        for key, value in vals.items():
            if value is not None:
                merged.setdefault(sec, {})[key] = str(value)
    return merged


def _get_float(sec: dict[str, str], key: str, default=None):
    if key not in sec:
        return default
    try:
        return float(sec[key])
    except ValueError as exc:
        raise ConfigError(f"key '{key}' is not a number: {sec[key]!r}") from exc


def _get_int(sec: dict[str, str], key: str, default=None):
    if key not in sec:
        return default
    try:
        return int(sec[key])
    except ValueError as exc:
        raise ConfigError(f"key '{key}' is not an integer: {sec[key]!r}") from exc


def _parse_float_list(text: str, key: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"key '{key}' is not a comma list of numbers: {text!r}") from exc


@dataclass
class RunSetup:
    """Fully resolved inputs for simulate/kick: system, pulse, run block."""

    spec: SystemSpec
    pulse: object
    relabels: list | None
    t_end: float | None
    dt: float | None
    samples: int
    n0: int
    method: str


def build_run_setup(sections: dict[str, dict[str, str]]) -> RunSetup:
    system = sections.get("system", {})
    pulse_sec = sections.get("pulse", {})
    run = sections.get("run", {})

    n = _get_int(system, "n")
    if n is None:
        raise ConfigError("missing required key 'n' in [system]")
    n0 = _get_int(run, "n0", 1)

    if "matrix" in system:
        rows = [_parse_float_list(r, "matrix") for r in system["matrix"].split(";")]
        coupling = ExplicitCoupling(np.array(rows, dtype=np.float64))
    else:
        alpha = _get_float(system, "alpha")
        if alpha is None:
            # default to the designed launch-to-target ratio for this n
            # (for two states the single coupling is the envelope itself)
            alpha = 1.0 if n == 2 else design_transfer(n, n0).alpha
        eps = (0.0, 0.0, 0.0)
        if "epsilon" in system:
            values = _parse_float_list(system["epsilon"], "epsilon")
            if len(values) != 3:
                raise ConfigError("'epsilon' needs exactly three values")
            eps = tuple(values)
        coupling = StructuredCoupling(
            alpha=alpha,
            beta=_get_float(system, "beta", 1.0),
            gamma=_get_float(system, "gamma", 1.0),
            epsilon=eps,
        )
    energies = ()
    if "energies" in system:
        energies = tuple(_parse_float_list(system["energies"], "energies"))
    try:
        spec = SystemSpec(n=n, coupling=coupling, energies=energies)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    pulse, relabels = _build_pulse(pulse_sec, n, n0)

    samples = _get_int(run, "samples", 400)
    if samples < 1:
        raise ConfigError("'samples' must be positive")
    method = run.get("method", "both").lower()
    if method not in ("analytic", "rk4", "both"):
        raise ConfigError(f"unknown method {method!r}")
    return RunSetup(
        spec=spec,
        pulse=pulse,
        relabels=relabels,
        t_end=_get_float(run, "t_end"),
        dt=_get_float(run, "dt"),
        samples=samples,
        n0=n0,
        method=method,
    )


def _design_area(n: int, n0: int) -> float:
    return design_transfer_2state(n0) if n == 2 else design_transfer(n, n0).area


def _build_pulse(sec: dict[str, str], n: int, n0: int):
    """Build the pulse; cosine omega defaults to chi / (1.05 * design area)."""
    shape = sec.get("shape", "cosine").lower()
    relabels = None
    if shape == "cosine":
        chi = _get_float(sec, "chi", 1.0)
        omega = _get_float(sec, "omega")
        if omega is None:
            omega = abs(chi) / (1.05 * abs(_design_area(n, n0)))
        pulse = CosinePulse(chi=chi, omega=omega)
    elif shape == "constant":
        v0 = _get_float(sec, "v0")
        if v0 is None:
            raise ConfigError("constant pulse needs 'v0'")
        pulse = ConstantPulse(v0=v0)
    elif shape == "gaussian":
        peak = _get_float(sec, "peak")
        width = _get_float(sec, "width")
        if peak is None or width is None:
            raise ConfigError("gaussian pulse needs 'peak' and 'width'")
        pulse = GaussianPulse(peak=peak, center=_get_float(sec, "center", 0.0), width=width)
    elif shape == "kicks":
        if "kicks" not in sec:
            pulse = KickTrain(kicks=())
        else:
            kicks, relabels = _parse_kicks(sec["kicks"])
            pulse = _make_kick_train(kicks)
    else:
        raise ConfigError(f"unknown pulse shape {shape!r}")
    return pulse, relabels


def _make_kick_train(kicks) -> KickTrain:
    try:
        return KickTrain(kicks=tuple(kicks))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_kicks(text: str):
    """Parse ``t:area[:i-j]`` tokens; the i-j pair relabels states after that kick."""
    kicks, relabels = [], []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"kick token {token!r} is not 't:area' or 't:area:i-j'")
        try:
            kicks.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"kick token {token!r} has non-numeric fields") from exc
        if len(parts) == 3 and parts[2]:
            try:
                i, j = (int(x) for x in parts[2].split("-"))
            except ValueError as exc:
                raise ConfigError(f"relabel field in {token!r} is not 'i-j'") from exc
            relabels.append((i, j))
        else:
            relabels.append(None)
    return kicks, relabels


# ---------------------------------------------------------------------------
# output helpers


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _csv_text(header: list[str], columns: list[np.ndarray]) -> str:
    lines = [",".join(header)]
    rows = len(columns[0])
    for m in range(rows):
        lines.append(",".join(_fmt(col[m]) for col in columns))
    return "\n".join(lines) + "\n"


def _trajectory_columns(traj: Trajectory, theta_scale: float) -> list[np.ndarray]:
    return [
        traj.times,
        traj.areas,
        traj.areas * theta_scale,
        traj.p1,
        traj.p2,
        traj.p3_per_state,
        traj.p3_total,
        traj.norms,
    ]


def render_svg(times, p1, p2, p3_scaled, title: str) -> str:
    """Self-contained population plot: P1 long-dashed, P2 solid, (n-2)P3 short-dashed."""
    width, height = 640.0, 400.0
    left, right, top, bottom = 64.0, 596.0, 36.0, 356.0
    t0, t1 = float(times[0]), float(times[-1])
    span = (t1 - t0) or 1.0

    def xpix(t):
        return left + (right - left) * (t - t0) / span

    def ypix(y):
        return bottom - (bottom - top) * y / 1.05

    def polyline(values, dash):
        pts = " ".join(f"{xpix(t):.2f},{ypix(v):.2f}" for t, v in zip(times, values))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        return (
            f'<polyline fill="none" stroke="black" stroke-width="1.3"{dash_attr} '
            f'points="{pts}"/>'
        )

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<text x="{(left + right) / 2:.2f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
        f'<line x1="{left:.2f}" y1="{bottom:.2f}" x2="{right:.2f}" y2="{bottom:.2f}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{left:.2f}" y1="{top:.2f}" x2="{left:.2f}" y2="{bottom:.2f}" '
        'stroke="black" stroke-width="1"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = left + (right - left) * frac
        t_label = t0 + span * frac
        parts.append(
            f'<line x1="{x:.2f}" y1="{bottom:.2f}" x2="{x:.2f}" y2="{bottom + 5:.2f}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{bottom + 18:.2f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t_label:.3g}</text>'
        )
        y = ypix(frac)
        parts.append(
            f'<line x1="{left - 5:.2f}" y1="{y:.2f}" x2="{left:.2f}" y2="{y:.2f}" '
            'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 9:.2f}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{frac:.3g}</text>'
        )
    parts.append(
        f'<text x="{(left + right) / 2:.2f}" y="{height - 6:.2f}" text-anchor="middle" '
        'font-family="sans-serif" font-size="12">t</text>'
    )
    parts.append(polyline(p1, "9,5"))
    parts.append(polyline(p2, None))
    parts.append(polyline(p3_scaled, "2,4"))
    legend = [("P1", "9,5"), ("P2", None), ("(n-2) P3", "2,4")]
    for row, (label, dash) in enumerate(legend):
        y = top + 14 + 16 * row
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<line x1="{right - 118:.2f}" y1="{y:.2f}" x2="{right - 78:.2f}" y2="{y:.2f}" '
            f'stroke="black" stroke-width="1.3"{dash_attr}/>'
        )
        parts.append(
            f'<text x="{right - 72:.2f}" y="{y + 4:.2f}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _report(lines_machine: list[str], lines_human: list[str], args, data_on_stdout: bool):
    """Porcelain lines are machine text; prose goes to stderr if stdout has data."""
    stream = sys.stderr if data_on_stdout else sys.stdout
    if args.porcelain:
        for line in lines_machine:
            print(line, file=stream)
    else:
        for line in lines_human:
            print(line, file=stream)


# ---------------------------------------------------------------------------
# subcommands


def _design_pulse_from_args(args, n0: int):
    if args.pulse is None:
        return None
    sec = {"shape": args.pulse}
    for key in ("chi", "omega", "v0", "peak", "center", "width"):
        value = getattr(args, key)
        if value is not None:
            sec[key] = str(value)
    n = args.n if args.n is not None else 3
    pulse, _ = _build_pulse(sec, n, n0)
    return pulse


def cmd_design(args) -> int:
    if args.n is None:
        raise ConfigError("design needs --n")
    if args.n < 2:
        raise ConfigError("design needs n >= 2")
    n0 = args.n0 if args.n0 is not None else 1
    pairs: list[tuple[str, str]] = [("n", str(args.n)), ("n0", str(n0))]
    if args.n == 2:
        area = design_transfer_2state(n0)
        if args.negative_branch:
            area = -area
        pairs.append(("A0", _fmt(area)))
    else:
        design = design_transfer(args.n, n0, negative=args.negative_branch)
        area = design.area
        pairs += [
            ("alpha", _fmt(design.alpha)),
            ("beta", _fmt(design.beta)),
            ("A0", _fmt(design.area)),
            ("k", str(design.k)),
            ("k_prime", str(design.k_prime)),
        ]
    pulse = _design_pulse_from_args(args, n0)
    if pulse is not None:
        pairs.append(("t0", _fmt(invert_area(pulse, area))))
    machine = [f"{key}={value}" for key, value in pairs]
    human = [f"{key} = {value}" for key, value in pairs]
    _report(machine, human, args, data_on_stdout=False)
    return 0


def _resolve_t_end(setup: RunSetup) -> float:
    if setup.t_end is not None:
        return setup.t_end
    area = _design_area(setup.spec.n, setup.n0)
    return invert_area(setup.pulse, area)


def cmd_simulate(args) -> int:
    sections = parse_config_text(_read_config(args)) if args.config else {}
    setup = build_run_setup(_merge_inline(sections, args))
    if isinstance(setup.pulse, KickTrain):
        raise ConfigError("simulate drives smooth pulses; use the kick command for trains")
    t_end = _resolve_t_end(setup)
    area0 = _design_area(setup.spec.n, setup.n0)
    theta_scale = 2.0 * math.pi * setup.n0 / area0

    traj_rk4 = traj_ana = None
    if t_end == 0.0:
        times = np.array([0.0])
        if setup.method in ("analytic", "both"):
            traj_ana = evolve_analytic(setup.spec, setup.pulse, times)
        if setup.method in ("rk4", "both"):
            traj_rk4 = integrate(setup.spec, setup.pulse, IntegratorConfig(t_end=0.0))
    else:
        if setup.method in ("rk4", "both"):
            dt_req = setup.dt if setup.dt is not None else default_dt(setup.spec, setup.pulse)
            n_steps = max(1, math.ceil(t_end / dt_req))
            stride = max(1, n_steps // setup.samples)
            cfg = IntegratorConfig(t_end=t_end, dt=dt_req, sample_stride=stride)
            traj_rk4 = integrate(setup.spec, setup.pulse, cfg)
        if setup.method in ("analytic", "both"):
            times = (
                traj_rk4.times
                if traj_rk4 is not None
                else np.linspace(0.0, t_end, setup.samples + 1)
            )
            traj_ana = evolve_analytic(setup.spec, setup.pulse, times)

    base = traj_ana if traj_ana is not None else traj_rk4
    columns = _trajectory_columns(base, theta_scale)
    header = list(CSV_COLUMNS)
    max_delta = None
    if setup.method == "both":
        header += RK4_COLUMNS
        columns += [
            traj_rk4.p1,
            traj_rk4.p2,
            traj_rk4.p3_per_state,
            traj_rk4.p3_total,
            traj_rk4.norms,
        ]
        max_delta = float(
            max(
                np.max(np.abs(traj_ana.p1 - traj_rk4.p1)),
                np.max(np.abs(traj_ana.p2 - traj_rk4.p2)),
                np.max(np.abs(traj_ana.p3_per_state - traj_rk4.p3_per_state)),
                np.max(np.abs(traj_ana.p3_total - traj_rk4.p3_total)),
            )
        )

    _emit(_csv_text(header, columns), args.out)
    if args.svg:
        n = setup.spec.n
        svg = render_svg(
            base.times,
            base.p1,
            base.p2,
            (n - 2) * base.p3_per_state if n > 2 else base.p3_total,
            title=f"populations, n={n}, method={setup.method}",
        )
        with open(args.svg, "w", newline="") as fh:
            fh.write(svg)

    machine = [f"rows={base.times.size}", f"t_end={_fmt(t_end)}"]
    human = [f"wrote {base.times.size} samples up to t = {_fmt(t_end)}"]
    if max_delta is not None:
        machine.append(f"max_delta={_fmt(max_delta)}")
        human.append(f"max |analytic - rk4| over population columns = {_fmt(max_delta)}")
    _report(machine, human, args, data_on_stdout=args.out is None)
    return 0


def cmd_kick(args) -> int:
    sections = parse_config_text(_read_config(args)) if args.config else {}
    merged = _merge_inline(sections, args)
    merged.setdefault("pulse", {})["shape"] = "kicks"
    setup = build_run_setup(merged)
    train = setup.pulse
    if setup.t_end is not None:
        t_end = setup.t_end
    elif train.kicks:
        t_end = train.kicks[-1][0] + 1.0
    else:
        t_end = 1.0
    traj = integrate_kicks(
        setup.spec,
        train,
        t_end,
        samples=setup.samples + 1,
        relabels=setup.relabels,
    )
    area0 = _design_area(setup.spec.n, setup.n0)
    theta_scale = 2.0 * math.pi * setup.n0 / area0
    _emit(_csv_text(list(CSV_COLUMNS), _trajectory_columns(traj, theta_scale)), args.out)
    machine = [f"rows={traj.times.size}", f"kicks={len(train.kicks)}"]
    human = [f"wrote {traj.times.size} samples through {len(train.kicks)} kicks"]
    _report(machine, human, args, data_on_stdout=args.out is None)
    return 0


def _parse_ratios(text: str) -> list[float]:
    text = text.strip()
    if text.startswith("geom:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError("geometric ratio syntax is geom:<lo>:<hi>:<count>")
        try:
            lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"bad geometric ratio argument {text!r}") from exc
        if lo <= 0 or hi <= lo or count < 2:
            raise ConfigError("geometric ratio range needs 0 < lo < hi and count >= 2")
        return list(np.geomspace(lo, hi, count))
    return _parse_float_list(text, "ratios")


def cmd_leakage(args) -> int:
    if args.n is None:
        raise ConfigError("leakage needs --n")
    ratios = _parse_ratios(args.ratios)
    if any(r >= 1.0 for r in ratios):
        raise ConfigError("ratios must stay below 1 (weak-splitting regime)")
    if any(r < 0.0 for r in ratios):
        raise ConfigError("ratios must be non-negative")
    chi = args.chi if args.chi is not None else 1.0
    if args.omega is not None:
        omega = args.omega
    else:
        omega = abs(chi) / (1.05 * abs(design_transfer(args.n, args.n0).area))
    points = leakage_scan(args.n, args.n0, omega, ratios, chi=chi, dt=args.dt)
    fit = fit_power_law(points)
    csv = _csv_text(
        ["ratio", "leakage"],
        [
            np.array([p.detuning_ratio for p in points]),
            np.array([p.leakage for p in points]),
        ],
    )
    _emit(csv, args.out)
    print(
        f"exponent={_fmt(fit.exponent)}, c={_fmt(fit.coefficient)}, r2={_fmt(fit.r_squared)}"
    )
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(
        name_filter=args.filter, dt_override=args.dt, seed=args.seed
    )
    failures = 0
    for res in results:
        if res.ok:
            print(f"pass {res.name}")
        else:
            failures += 1
            print(f"FAIL {res.name}: {res.detail}")
    print(f"{len(results) - failures}/{len(results)} properties passed")
    return 0 if failures == 0 else 1


def _read_config(args) -> str:
    try:
        with open(args.config, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="path to a [section] key=value config file")
    sub.add_argument("--out", help="write CSV here instead of stdout")
    sub.add_argument("--svg", help="also write a line plot to this SVG path")
    sub.add_argument("--porcelain", action="store_true", help="machine key=value output")
    sub.add_argument("--seed", type=int, default=20240, help="seed for randomized checks")


def _add_system_pulse_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--n", type=int)
    sub.add_argument("--n0", type=int)  # default 1, resolved after config merge
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--epsilon")
    sub.add_argument("--energies")
    sub.add_argument("--matrix")
    sub.add_argument("--pulse", choices=["cosine", "constant", "gaussian", "kicks"])
    sub.add_argument("--chi", type=float)
    sub.add_argument("--omega", type=float)
    sub.add_argument("--v0", type=float)
    sub.add_argument("--peak", type=float)
    sub.add_argument("--center", type=float)
    sub.add_argument("--width", type=float)
    sub.add_argument("--t-end", dest="t_end", type=float)
    sub.add_argument("--dt", type=float)
    sub.add_argument("--samples", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nstate", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p_design = subs.add_parser("design", help="print complete-transfer conditions")
    _add_common(p_design)
    _add_system_pulse_flags(p_design)
    p_design.add_argument(
        "--negative-branch", action="store_true", help="take the falling-area branch"
    )
    p_design.set_defaults(func=cmd_design)

    p_sim = subs.add_parser("simulate", help="run analytic and/or RK4 trajectories")
    _add_common(p_sim)
    _add_system_pulse_flags(p_sim)
    p_sim.add_argument("--method", choices=["analytic", "rk4", "both"])
    p_sim.set_defaults(func=cmd_simulate)

    p_kick = subs.add_parser("kick", help="propagate a delta-kick schedule")
    _add_common(p_kick)
    _add_system_pulse_flags(p_kick)
    p_kick.add_argument("--kicks", help="t:area[:i-j] tokens, comma separated")
    p_kick.set_defaults(func=cmd_kick)

    p_leak = subs.add_parser("leakage", help="detuning-ratio leakage scan and fit")
    _add_common(p_leak)
    p_leak.add_argument("--n", type=int)
    p_leak.add_argument("--n0", type=int, default=1)
    p_leak.add_argument("--ratios", required=True, help="comma list or geom:<lo>:<hi>:<count>")
    p_leak.add_argument("--omega", type=float)
    p_leak.add_argument("--chi", type=float)
    p_leak.add_argument("--dt", type=float)
    p_leak.set_defaults(func=cmd_leakage)

    p_test = subs.add_parser("selftest", help="run the cross-module invariant suite")
    _add_common(p_test)
    p_test.add_argument("--filter", help="run only properties whose name contains this")
    p_test.add_argument("--dt", type=float, help="override integrator steps (fault injection)")
    p_test.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except NStateError as exc:
        print(f"error={exc.code}", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 3 if isinstance(exc, NUMERICAL_ERRORS) else 2
    except (ValueError, TypeError) as exc:
        print("error=Config", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
