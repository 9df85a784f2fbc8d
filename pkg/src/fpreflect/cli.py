"""Command-line front end: ``fpreflect <subcommand> ...``.

Subcommands: potential, coeffs, exact, sweep, greens, verify.  Complex k is
written ``a+bj``; k grids are geometric via --kmin/--kmax/--points.  A flat
``key=value`` file passed with --config supplies defaults for the tolerance
and output flags; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, lowenergy, reference, series_algebra
from .potential import CATALOG_NAMES, PotentialError, build_profile, schrodinger_potential

DEFAULTS = {"quad_tol": 1e-8, "ode_rtol": 1e-10, "format": "csv"}
CONFIG_KEYS = {"quad_tol": float, "ode_rtol": float, "format": str, "output": str}


class UsageError(Exception):
    pass


def parse_k(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read {text!r} as a complex number (use a+bj)") from None


def parse_orders(text: str) -> tuple[int, ...]:
    try:
        orders = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"orders must be comma-separated integers, got {text!r}") from None
    if not orders or min(orders) < 0:
        raise argparse.ArgumentTypeError("orders must be nonempty and >= 0")
    return orders


def read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown or malformed setting {raw.strip()!r}")
        try:
            out[key] = CONFIG_KEYS[key](value.strip())
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}") from None
    return out


def _settings(args) -> dict:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if merged["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return merged


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _profile(name: str, max_order: int = 8):
    return build_profile(analysis.resolve_potential(name), max_order)


def _anchor(spec, x):
    if x is not None:
        return x
    if spec.example is not None:
        return reference.EXAMPLE_ANCHORS[spec.example]
    return 0.0


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_potential(args, settings) -> int:
    if args.list:
        _emit("\n".join(CATALOG_NAMES), None)
        return 0
    if not args.potential:
        raise UsageError("potential needs --potential NAME|EXPR or --list")
    profile = _profile(args.potential, 2)
    spec = profile.spec
    cls = profile.asymptotic_class
    lines = [
        f"source: {spec.source}",
        f"domain: x < {spec.domain_max:g}",
        f"breakpoints: {', '.join(f'{b:g}' for b in spec.breakpoints) or 'none'}",
        f"class: {cls.describe() if cls else 'undecided'}",
    ]
    if cls:
        for mode in analysis.MODES:
            v = analysis.validity_verdict(cls, mode, "high")
            lines.append(f"high side, {mode}: {v.expected} ({v.reason})")
        v = analysis.validity_verdict(cls, "ray", "low")
        lines.append(f"low side: {v.expected} ({v.reason})")
    for x in args.x or []:
        side = "left" if x in spec.breakpoints else None
        lines.append(
            f"x = {x:g}: V = {profile.eval_V(x, side):.12g}, f = {profile.eval_f(x, side):.12g}, "
            f"V_S = {schrodinger_potential(profile, x, side):.12g}"
        )
    _emit("\n".join(lines), settings.get("output"))
    return 0


def cmd_coeffs(args, settings) -> int:
    if args.n < 0 or (args.side == "high" and args.n < 1):
        raise UsageError("--n must be >= 1 for the high side and >= 0 for the low side")
    lines = []
    if args.side == "high":
        orders = range(1, args.n + 1) if args.all else [args.n]
        if args.symbolic:
            for n in orders:
                poly = series_algebra.ctilde(n) if args.generalized else series_algebra.high_coeffs(n)[-1][1]
                lines.append(str(poly) if not args.all else f"{'c~' if args.generalized else 'c'}_{n} = {poly}")
        else:
            profile, x = _numeric_target(args)
            coeffs = series_algebra.high_coeffs(args.n)
            for n in orders:
                lines.append(f"c_{n}({x:g}) = {series_algebra.evaluate(coeffs[n - 1][1], profile, x)!r}")
    else:
        orders = range(0, args.n + 1) if args.all else [args.n]
        if args.symbolic:
            if not args.potential:
                raise UsageError("low-side symbolic form depends on the potential class; pass --potential")
            cls = _profile(args.potential, 1).asymptotic_class
            if cls is None:
                raise UsageError("potential class is undecided")
            for n in orders:
                text = lowenergy.describe_terms(n, cls)
                lines.append(text if not args.all else f"r_{n} = {text}")
        else:
            profile, x = _numeric_target(args)
            values = lowenergy.low_coeffs(args.n, x, profile, settings["quad_tol"])
            for n in orders:
                lines.append(f"r_{n}({x:g}) = {values[n].r_at_x!r}")
    _emit("\n".join(lines), settings.get("output"))
    return 0


def _numeric_target(args):
    if not args.potential:
        raise UsageError("numeric coefficients need --potential (or use --symbolic)")
    profile = _profile(args.potential, max(args.n, 1) + 1)
    return profile, _anchor(profile.spec, args.x)


def cmd_exact(args, settings) -> int:
    profile = _profile(args.potential, 2)
    spec = profile.spec
    x = _anchor(spec, args.x)
    energy = reference.ComplexEnergy(args.k)
    out = {"x": x, "k": [args.k.real, args.k.imag]}
    if energy.requires_shift(profile):
        energy = energy.with_default_shift(profile)
        out["epsilon_shift"] = energy.epsilon_shift
    if args.oracle in ("auto", "closed") and analysis.oracle_name(spec, x) == "closed_form":
        alpha = spec.param("alpha") if spec.example == 7 else 0.5
        value = reference.closed_form_rr(spec.example, x, args.k, alpha=alpha)
        out["closed_form"] = [value.real, value.imag]
    elif args.oracle == "closed":
        raise UsageError(f"no closed form for {spec.source} at x = {x:g}")
    if args.oracle in ("auto", "ode") or "closed_form" not in out:
        detail = reference.semiinfinite_detail(profile, x, energy, rtol=settings["ode_rtol"])
        out["semiinfinite"] = [detail.value.real, detail.value.imag]
        out["z_min"] = detail.z_min
        if detail.notes:
            out["notes"] = list(detail.notes)
    if settings["format"] == "json":
        _emit(json.dumps(out, indent=2), settings.get("output"))
    else:
        lines = [f"x = {x:g}, k = {args.k}"]
        for key in ("closed_form", "semiinfinite"):
            if key in out:
                re_, im_ = out[key]
                lines.append(f"R_r[{key}] = {complex(re_, im_)!r}")
        if "notes" in out:
            lines += [f"note: {n}" for n in out["notes"]]
        _emit("\n".join(lines), settings.get("output"))
    return 0


def cmd_sweep(args, settings) -> int:
    spec_p = analysis.resolve_potential(args.potential)
    spec = analysis.SweepSpec(
        args.potential,
        _anchor(spec_p, args.x),
        args.side,
        args.mode,
        analysis.SweepSpec.geometric(args.kmin, args.kmax, args.points),
        args.orders,
        theta=args.theta,
        im_part=args.im,
    )
    report = analysis.run_sweep(spec, tol=settings["quad_tol"], rtol=settings["ode_rtol"])
    text = report.to_json() if settings["format"] == "json" else report.to_csv()
    _emit(text, settings.get("output"))
    for N in spec.orders:
        print(f"N={N}: fitted order {report.fitted_slope[N]:.4f}, verdict {report.verdict[N]}", file=sys.stderr)
    return 0


def cmd_greens(args, settings) -> int:
    profile = _profile(args.potential, 2)
    g = analysis.greens(profile, args.x, args.xprime, args.k, rtol=settings["ode_rtol"])
    s = analysis.s_value(profile, args.x, args.k)
    if settings["format"] == "json":
        _emit(json.dumps({"G": [g.real, g.imag], "S": [s.real, s.imag]}, indent=2), settings.get("output"))
    else:
        _emit(f"G_S({args.x:g}, {args.xprime:g}; {args.k}) = {g!r}\nS({args.x:g}; {args.k}) = {s!r}", settings.get("output"))
    return 0


def cmd_verify(args, settings) -> int:
    from . import acceptance

    results = acceptance.run_all(args.only or None, echo=print)
    failed = [r.number for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed in {total:.1f}s")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value settings file")
    common.add_argument("--quad-tol", dest="quad_tol", type=float, help="quadrature tolerance (default 1e-8)")
    common.add_argument("--ode-rtol", dest="ode_rtol", type=float, help="ODE relative tolerance (default 1e-10)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--output", "-o", help="write the result here instead of stdout")

    parser = argparse.ArgumentParser(prog="fpreflect", description="Reflection coefficients for the Fokker-Planck equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("potential", parents=[common], help="inspect a potential")
    p.add_argument("--potential", "-p")
    p.add_argument("--list", action="store_true", help="list catalog names")
    p.add_argument("--x", type=float, action="append", help="tabulate V, f, V_S at x (repeatable)")
    p.set_defaults(run=cmd_potential)

    p = sub.add_parser("coeffs", parents=[common], help="high/low-energy coefficients")
    p.add_argument("side", choices=("high", "low"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--all", action="store_true", help="print every order up to n")
    p.add_argument("--symbolic", action="store_true")
    p.add_argument("--generalized", action="store_true", help="xi-dependent c~_n (high side, symbolic)")
    p.add_argument("--potential", "-p")
    p.add_argument("--x", type=float)
    p.set_defaults(run=cmd_coeffs)

    p = sub.add_parser("exact", parents=[common], help="R_r(x, -inf; k) from the oracles")
    p.add_argument("--potential", "-p", required=True)
    p.add_argument("--x", type=float)
    p.add_argument("--k", type=parse_k, required=True)
    p.add_argument("--oracle", choices=("auto", "closed", "ode"), default="auto")
    p.set_defaults(run=cmd_exact)

    p = sub.add_parser("sweep", parents=[common], help="remainder scaling sweep")
    p.add_argument("--potential", "-p", required=True)
    p.add_argument("--x", type=float)
    p.add_argument("--side", choices=analysis.SIDES, required=True)
    p.add_argument("--mode", choices=analysis.MODES, required=True)
    p.add_argument("--theta", type=float, help="ray argument (ray mode)")
    p.add_argument("--im", type=float, help="fixed Im k (fixed_im mode)")
    p.add_argument("--kmin", type=float, default=10.0)
    p.add_argument("--kmax", type=float, default=100.0)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--orders", type=parse_orders, default=(2,))
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("greens", parents=[common], help="Green function G_S(x, x'; k)")
    p.add_argument("--potential", "-p", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--xprime", type=float, required=True)
    p.add_argument("--k", type=parse_k, required=True)
    p.set_defaults(run=cmd_greens)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", type=int, action="append", help="run only these criteria (repeatable)")
    p.set_defaults(run=cmd_verify)
    return parser


def _validate(args) -> None:
    if args.command == "sweep":
        if args.mode == "ray" and args.theta is None:
            raise UsageError("ray mode needs --theta")
        if args.mode == "fixed_im" and args.im is None:
            raise UsageError("fixed_im mode needs --im")
        if args.mode != "ray" and args.theta is not None:
            raise UsageError("--theta only applies to ray mode")
        if args.mode != "fixed_im" and args.im is not None:
            raise UsageError("--im only applies to fixed_im mode")
    if args.command == "coeffs" and args.generalized and (args.side != "high" or not args.symbolic):
        raise UsageError("--generalized needs 'high --symbolic'")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        settings = _settings(args)
        return args.run(args, settings)
    except (UsageError, PotentialError, analysis.AnalysisError) as exc:
        print(f"fpreflect {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError) as exc:
        print(f"fpreflect {args.command}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
