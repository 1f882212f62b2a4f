"""Command line front end: ``stirap6 <command> [-c CONFIG] [key=value ...]``.

Exit codes: 0 success, 1 usage or parse error, 2 precondition violation,
3 numerical failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from stirap6.errors import ConfigError, Stirap6Error, VerificationError
from stirap6.frame import adiabaticity_general, dark_frame, dark_state_D1, dark_state_D2
from stirap6.hamiltonian import (
    BASIS_LABELS,
    CONFIG_KEYS,
    PulseConfig,
    builtin_config_path,
    envelopes,
    format_config,
    parse_config_text,
    reduced_hamiltonian,
)
from stirap6.propagator import IntegratorSettings, integrate, max_bright_population, transfer_efficiency
from stirap6.statespace import (
    StateCoords,
    analytic_final_state,
    coords_to_state,
    design_pulses,
    state_to_coords,
)
from stirap6.sweep import SweepTable, run_sweep, slice_records

SETTINGS_KEYS = {"rtol": float, "atol": float, "t0": float, "t1": float, "samples": int}
# Written by ``design`` next to the pulse keys; informational, ignored on load.
RECORD_KEYS = {"residual", "theta", "chi", "delta_target"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_config_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    return builtin_config_path(name)


def load_run_config(name: str, overrides: list[str]) -> tuple[PulseConfig, IntegratorSettings]:
    """Read a config file, apply ``key=value`` overrides, split off integrator settings."""
    text = _resolve_config_path(name).read_text()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        text += f"\n{item}"
    cfg, extra = parse_config_text(text)
    extra = {k: v for k, v in extra.items() if k not in RECORD_KEYS}
    unknown = sorted(set(extra) - set(SETTINGS_KEYS))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    values = {}
    for key, raw in extra.items():
        try:
            values[key] = SETTINGS_KEYS[key](raw)
        except ValueError:
            raise ConfigError(f"{key} needs a {SETTINGS_KEYS[key].__name__}, got {raw!r}") from None
    span = None
    if "t0" in values or "t1" in values:
        default = cfg.default_span()
        span = (values.get("t0", default[0]), values.get("t1", default[1]))
    settings = IntegratorSettings(
        rtol=values.get("rtol", 1e-10),
        atol=values.get("atol", 1e-12),
        t_span=span,
        samples=values.get("samples", 2000),
    )
    return cfg, settings


def _fmt_amp(z: complex) -> str:
    return f"{abs(z):.6f} * exp(i {np.angle(z):+.6f})"


def _print_state(psi) -> None:
    for label, z in zip(BASIS_LABELS, psi):
        print(f"  {label:7s} {_fmt_amp(z)}   pop={abs(z) ** 2:.6f}")


def cmd_simulate(args) -> int:
    cfg, settings = load_run_config(args.config, args.overrides)
    traj = integrate(cfg, settings=settings)
    if args.output:
        traj.write_csv(args.output)
    psi = traj.final_state
    print(f"efficiency {transfer_efficiency(psi):.6f}")
    print(f"max_bright_population {max_bright_population(traj):.6f}")
    print(f"norm_drift {traj.norm_drift:.3e}")
    print("final_state")
    _print_state(psi)
    if cfg.stokes_center < cfg.pump_center:
        analytic = analytic_final_state(cfg)
        print(f"max_J2_deviation_from_analytic {np.max(np.abs(psi[3:] - analytic[3:])):.6f}")
    return 0


def cmd_darkstates(args) -> int:
    cfg, _ = load_run_config(args.config, args.overrides)
    env = envelopes(args.time, cfg)
    frame = dark_frame(env, cfg.phi)
    print(f"t {args.time}")
    print(f"envelopes A={env.A:.6g} B={env.B:.6g} C={env.C:.6g} D={env.D:.6g} phi={cfg.phi:.6f}")
    for name in ("k", "x", "y", "alpha", "beta", "xi", "zeta"):
        print(f"{name} {getattr(frame, name):.10g}")
    print("D1 (phase-reduced basis)")
    _print_state(dark_state_D1(env.C, env.D))
    print("D2 (phase-reduced basis)")
    _print_state(dark_state_D2(frame))
    H1 = reduced_hamiltonian(env, cfg.phi, cfg.detuning)
    residual = max(np.linalg.norm(H1 @ dark_state_D1(env.C, env.D)), np.linalg.norm(H1 @ dark_state_D2(frame)))
    print(f"max |H1 D| {residual:.3e}")
    return 0


def cmd_adiabaticity(args) -> int:
    cfg, settings = load_run_config(args.config, args.overrides)
    t0, t1 = settings.span_for(cfg)
    series = adiabaticity_general(cfg, np.linspace(t0, t1, args.samples))
    out = args.output or "adiabaticity.csv"
    series.write_csv(out)
    window = (series.t >= cfg.stokes_center) & (series.t <= cfg.pump_center)
    print(f"wrote {out}")
    if window.any():
        print(f"min ratio between pulse centers {np.min(series.ratios[window]):.4g}")
    return 0


def cmd_analytic(args) -> int:
    cfg, _ = load_run_config(args.config, args.overrides)
    psi = analytic_final_state(cfg)
    coords = state_to_coords(psi)
    print("final_state")
    _print_state(psi)
    print(f"theta {coords.theta:.10f}")
    print(f"chi {coords.chi:.10f}")
    print(f"delta {coords.delta:.10f}")
    if coords.degenerate:
        print("note: an amplitude vanishes, delta is fixed by convention")
    return 0


def cmd_design(args) -> int:
    shape, _ = load_run_config(args.config, args.overrides)
    target = coords_to_state(StateCoords(args.theta, args.chi, args.delta), phi2=args.phi2)
    result = design_pulses(target, shape, threshold=args.threshold)
    text = format_config(result.config, {k: repr(v) for k, v in result.record(target).items()
                                         if k not in CONFIG_KEYS})
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    shape, settings = load_run_config(args.config, args.overrides)
    steps = tuple(args.steps) if args.steps else (args.step,) * 3
    if args.mode == "numeric":
        settings = IntegratorSettings(rtol=1e-9, atol=1e-11, t_span=settings.t_span, samples=600)
    else:
        settings = None
    table = run_sweep(shape, steps, args.mode, workers=args.workers, settings=settings)
    out = args.output or f"sweep_{args.mode}.csv"
    table.write_csv(out)
    print(f"wrote {len(table)} records to {out}")
    if args.mode == "numeric":
        print(f"max nonadiabaticity {np.max(table.nonadiabaticity):.6f}")
        print(f"min efficiency {np.min(table.efficiency):.6f}")
    return 0


def cmd_slice(args) -> int:
    table = SweepTable.read_csv(args.input)
    report = slice_records(table, args.delta, args.width, args.cells)
    if args.output:
        report.write_csv(args.output)
    status = "ok" if report.occupancy >= args.threshold else "below threshold"
    print(f"delta {args.delta} +- {args.width / 2}: {report.theta.size} points, "
          f"occupancy {report.occupancy:.3f} on {args.cells}x{args.cells} ({status})")
    return 0


def cmd_verify(args) -> int:
    from stirap6.verify import run_checks

    failures = 0
    for name, ok, detail in run_checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += not ok
    if failures:
        raise VerificationError(f"{failures} check(s) failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stirap6", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, default_config="fig2", help=None):
        p = sub.add_parser(name, help=help)
        p.add_argument("-c", "--config", default=default_config,
                       help="config file, or built-in name fig2/fig3/sweep (default %(default)s)")
        p.add_argument("overrides", nargs="*", metavar="key=value")
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, help="integrate and summarize one pulse sequence")
    p.add_argument("-o", "--output", help="trajectory CSV")
    p = add("darkstates", cmd_darkstates, help="dark states and frame parameters at one time")
    p.add_argument("-t", "--time", type=float, default=0.0)
    p = add("adiabaticity", cmd_adiabaticity, help="bright-state adiabaticity ratios")
    p.add_argument("-o", "--output")
    p.add_argument("--samples", type=int, default=2000)
    add("analytic", cmd_analytic, help="closed-form adiabatic final state")
    p = add("design", cmd_design, default_config="sweep", help="pulses for a target (theta, chi, delta)")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--phi2", type=float, default=0.0, help="target phase of |2,0>")
    p.add_argument("--threshold", type=float, default=1e-6)
    p.add_argument("-o", "--output")
    p = add("sweep", cmd_sweep, default_config="sweep", help="coverage sweep over eta, nu, phi")
    p.add_argument("--mode", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--steps", type=float, nargs=3, metavar=("DETA", "DNU", "DPHI"))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-o", "--output")

    p = sub.add_parser("slice", help="delta slice of a sweep CSV")
    p.add_argument("input")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--width", type=float, default=0.1)
    p.add_argument("--cells", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("verify", help="run the built-in invariant checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "sweep" and args.step is None and args.steps is None:
        args.step = 0.015 if args.mode == "analytic" else 0.088
    try:
        return args.func(args)
    except Stirap6Error as exc:
        print(f"stirap6 {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"stirap6 {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
