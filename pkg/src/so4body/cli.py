"""Batch command-line front-end.

Subcommands
-----------
classify   spectral verdict, eigenstructure, and eigenvalues for the twelve
           Cartan equilibria on an orbit (JSON)
certify    Lyapunov certificates / verdicts for the same twelve points (JSON)
sweep      bifurcation sweep over the ratio r = b^2/a^2 (CSV), with explicit
           rows at the two thresholds
simulate   trajectory integration with conservation monitoring (CSV + JSON
           drift summary)
verify     run the self-verification suites; nonzero exit on failure

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 numerical
failure (blow-up or projection failure).  Options may also be given in a
config file of `key = value` lines (keys are the long option names without
the leading dashes); explicit flags win.  The environment variable
SO4BODY_OUT_DIR, when set, prefixes relative output paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .core import InertiaSpectrum, as_state, integral_value
from .dynamics import BlowUpError, ProjectionError, integrate, write_trajectory_csv
from .equilibria import OrbitParams, ab_from_orbit, cartan_equilibria, cartan_state
from .lyapunov import (
    CertificationError,
    NONLINEARLY_STABLE,
    UNDECIDABLE,
    UNSTABLE,
    certify_bifurcation,
    certify_center_center,
)
from .spectral import (
    SPECTRALLY_STABLE,
    SPECTRALLY_UNSTABLE,
    classify_eigenstructure,
    classify_spectral,
    f_tilde,
    linearize,
    restrict_to_orbit,
)
from .verify import run_all

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY = 2
EXIT_NUMERICAL = 3

# Numeric verdicts treat a max real part below this (times max(1, spectrum
# scale)) as zero.
_SIGN_TOL = 1e-8


class CliError(Exception):
    """Invalid input; mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _complex_pair(z) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _parse_floats(text: str, count: int, what: str) -> tuple:
    try:
        vals = tuple(float(part) for part in str(text).split(","))
    except ValueError as exc:
        raise CliError(f"cannot parse {what} from {text!r}: {exc}") from exc
    if len(vals) != count:
        raise CliError(f"{what} needs {count} comma-separated values, got {len(vals)}")
    return vals


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise CliError(f"cannot parse {what} from {text!r}") from exc


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise CliError(f"cannot parse {what} from {text!r}") from exc


def load_config(path: str) -> dict:
    """Flat `key = value` config file; '#' starts a comment."""
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    return out


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset options from the config file; flags win."""
    if not getattr(args, "config", None):
        return
    conf = load_config(args.config)
    for key, value in conf.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


def _spectrum(args) -> InertiaSpectrum:
    if args.lam is None:
        raise CliError("a moment spectrum is required (--lam l1,l2,l3,l4)")
    try:
        return InertiaSpectrum(*_parse_floats(args.lam, 4, "--lam"))
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _orbit_slots(args) -> tuple:
    """(a, b) from exactly one of --orbit, --ab, --r."""
    given = [name for name in ("orbit", "ab", "r") if getattr(args, name, None) is not None]
    if len(given) != 1:
        raise CliError("exactly one of --orbit, --ab, --r is required")
    if args.orbit is not None:
        c1, c2 = _parse_floats(args.orbit, 2, "--orbit")
        try:
            return ab_from_orbit(OrbitParams(c1, c2))
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    if args.ab is not None:
        a, b = _parse_floats(args.ab, 2, "--ab")
        if not (abs(a) > abs(b)):
            raise CliError(f"--ab expects |a| > |b|, got ({a}, {b})")
        return a, b
    r = _parse_float(args.r, "--r")
    if not (0.0 <= r < 1.0):
        raise CliError(f"--r must lie in [0, 1), got {r}")
    return 1.0, float(np.sqrt(r))


def _out_path(path: str | None) -> str | None:
    if path is None or path == "-":
        return None
    base = os.environ.get("SO4BODY_OUT_DIR")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit_text(text: str, path: str | None) -> None:
    resolved = _out_path(path)
    if resolved is None:
        sys.stdout.write(text)
    else:
        with open(resolved, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(doc: dict, path: str | None) -> None:
    _emit_text(json.dumps(doc, indent=2) + "\n", path)


def _numeric_spectrum(state, lam) -> tuple:
    """Numeric restricted eigenvalues and their pattern tag at an equilibrium."""
    j4 = restrict_to_orbit(linearize(state, lam), state)
    eigs = np.array(sorted(np.linalg.eigvals(j4), key=lambda z: (z.real, z.imag)))
    structure = classify_eigenstructure(eigs, tol=1e-6)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    stable = float(np.max(eigs.real)) <= _SIGN_TOL * scale
    return eigs, structure, stable


def _point_record(eq, lam, ft) -> dict:
    rec = {
        "family": eq.family,
        "a": eq.a,
        "b": eq.b,
        "state": [float(v) for v in eq.state],
        "degenerate_orbit_pattern": bool(eq.b == 0.0 or abs(eq.a) == abs(eq.b)),
    }
    bifurcating = eq.family == "t1" and abs(eq.a) < abs(eq.b)
    if bifurcating:
        verdict = classify_spectral(lam, abs(eq.b), abs(eq.a))
        rec.update({
            "r": verdict.r,
            "verdict": verdict.verdict,
            "eigenstructure": verdict.eigenstructure,
            "eigenvalues": [_complex_pair(z) for z in verdict.eigenvalues],
            "note": verdict.note,
        })
    else:
        eigs, structure, stable = _numeric_spectrum(eq.state, lam)
        rec.update({
            "verdict": SPECTRALLY_STABLE if stable else SPECTRALLY_UNSTABLE,
            "eigenstructure": structure,
            "eigenvalues": [_complex_pair(z) for z in eigs],
            "note": "",
        })
    return rec


def cmd_classify(args) -> int:
    lam = _spectrum(args)
    a, b = _orbit_slots(args)
    ft = f_tilde(lam)
    orbit = OrbitParams(0.5 * (a * a + b * b), a * b)
    doc = {
        "command": "classify",
        "lam": [float(v) for v in lam.values],
        "orbit": {"c1": orbit.c1, "c2": orbit.c2},
        "a": a,
        "b": b,
        "alpha1": ft.alpha1,
        "alpha2": ft.alpha2,
        "equilibria": [_point_record(eq, lam, ft) for eq in cartan_equilibria(orbit)],
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def _certificate_record(eq, lam) -> dict:
    rec = {"family": eq.family, "a": eq.a, "b": eq.b}
    if eq.family == "t2":
        eigs, structure, _ = _numeric_spectrum(eq.state, lam)
        rec.update({
            "verdict": UNSTABLE,
            "eigenstructure": structure,
            "max_real_part": float(np.max(eigs.real)),
            "note": "no certificate: spectrally unstable",
        })
        return rec
    if eq.family == "t1" and abs(eq.a) < abs(eq.b):
        cert = certify_bifurcation(lam, abs(eq.b), abs(eq.a))
    else:
        cert = certify_center_center(eq, lam)
    rec["verdict"] = cert.verdict
    rec["note"] = cert.note
    if cert.base is not None:
        rec.update({
            "base": cert.base,
            "m": cert.m,
            "n": cert.n,
            "definiteness": cert.hessian.definiteness,
            "minors": [float(v) for v in cert.hessian.minors],
            "hessian_eigenvalues": [float(v) for v in cert.hessian.eigenvalues],
        })
    if cert.p is not None:
        rec["p"] = cert.p
    if cert.p_window is not None:
        rec["p_window"] = [float(cert.p_window[0]), float(cert.p_window[1])]
    if cert.spectral is not None:
        rec["spectral_verdict"] = cert.spectral.verdict
        rec["spectral_eigenstructure"] = cert.spectral.eigenstructure
        rec["max_real_part"] = cert.spectral.max_real_part
    return rec


def cmd_certify(args) -> int:
    lam = _spectrum(args)
    a, b = _orbit_slots(args)
    orbit = OrbitParams(0.5 * (a * a + b * b), a * b)
    ft = f_tilde(lam)
    doc = {
        "command": "certify",
        "lam": [float(v) for v in lam.values],
        "orbit": {"c1": orbit.c1, "c2": orbit.c2},
        "a": a,
        "b": b,
        "alpha1": ft.alpha1,
        "alpha2": ft.alpha2,
        "certificates": [_certificate_record(eq, lam) for eq in cartan_equilibria(orbit)],
    }
    _emit_json(doc, args.out)
    return EXIT_OK


SWEEP_HEADER = ("r", "boundary", "verdict", "eigenstructure",
                "max_re_numeric", "certificate", "p")


def _sweep_row(lam, r, boundary_tag) -> tuple:
    a = 1.0
    b = float(np.sqrt(r))
    verdict = classify_spectral(lam, a, b, exact_boundary=boundary_tag or None)
    state = cartan_state("t1", b, a)
    j4 = restrict_to_orbit(linearize(state, lam), state)
    max_re = float(np.max(np.linalg.eigvals(j4).real))
    if verdict.verdict == SPECTRALLY_UNSTABLE:
        cert_status, p_text = UNSTABLE, ""
    else:
        try:
            cert = certify_bifurcation(lam, a, b)
            cert_status = (cert.hessian.definiteness
                           if cert.verdict == NONLINEARLY_STABLE else cert.verdict)
            p_text = _g17(cert.p) if cert.p is not None else ""
        except CertificationError as exc:
            cert_status, p_text = f"failed: {exc}", ""
    return (_g17(r), boundary_tag, verdict.verdict, verdict.eigenstructure,
            _g17(max_re), cert_status, p_text)


def cmd_sweep(args) -> int:
    lam = _spectrum(args)
    r_min = _parse_float(args.r_min, "--r-min") if args.r_min is not None else 0.0
    r_max = _parse_float(args.r_max, "--r-max") if args.r_max is not None else 0.999
    steps = _parse_int(args.steps, "--steps") if args.steps is not None else 101
    if steps < 1:
        raise CliError(f"--steps must be >= 1, got {steps}")
    if not (0.0 <= r_min < r_max < 1.0):
        raise CliError(f"need 0 <= r-min < r-max < 1, got [{r_min}, {r_max}]")
    ft = f_tilde(lam)
    grid = [(float(r), "") for r in np.linspace(r_min, r_max, steps)]
    for alpha, tag in ((ft.alpha1, "alpha1"), (ft.alpha2, "alpha2")):
        if r_min <= alpha <= r_max and alpha < 1.0:
            grid.append((float(alpha), tag))
    grid.sort(key=lambda item: item[0])
    lines = [",".join(SWEEP_HEADER)]
    for r, tag in grid:
        lines.append(",".join(_sweep_row(lam, r, tag)))
    _emit_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    lam = _spectrum(args)
    if args.state is None:
        raise CliError("an initial state is required (--state x1,x2,x3,y1,y2,y3)")
    try:
        m0 = as_state(_parse_floats(args.state, 6, "--state"))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    step = _parse_float(args.step, "--step") if args.step is not None else 1e-3
    horizon = _parse_float(args.horizon, "--horizon") if args.horizon is not None else 100.0
    stride = _parse_int(args.sample_every, "--sample-every") if args.sample_every is not None else 10
    try:
        report = integrate(m0, lam, step=step, horizon=horizon, sample_every=stride)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    out = args.out if args.out is not None else "trajectory.csv"
    resolved = _out_path(out)
    if resolved is None:
        write_trajectory_csv(report, sys.stdout)
    else:
        with open(resolved, "w", encoding="utf-8") as fh:
            write_trajectory_csv(report, fh)
    summary = {
        "command": "simulate",
        "lam": [float(v) for v in lam.values],
        "step": step,
        "horizon": horizon,
        "samples": int(report.times.size),
        "drift": {k: float(v) for k, v in report.drift.items()},
        "trajectory": resolved if resolved is not None else "-",
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    lam = _spectrum(args) if args.lam is not None else InertiaSpectrum(4, 3, 2, 1)
    seed = _parse_int(args.seed, "--seed") if args.seed is not None else 20260810
    perturb = 1e-6 if args.inject_defect else 0.0
    results = run_all(lam, seed=seed, perturb_decomposition=perturb)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    lam_text = ",".join(_g17(v) for v in lam.values)
    print(f"{len(results) - len(failed)}/{len(results)} suites passed on lam={lam_text}")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="so4body",
                     description="Stability workbench for the free rigid body on so(4)")
    parser.add_argument("--version", action="version", version=f"so4body {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, orbitish=False):
        p.add_argument("--lam", help="four moments, comma separated (l1>l2>l3>l4)")
        p.add_argument("--config", help="key = value config file; flags win")
        p.add_argument("--out", help="output path ('-' or omitted = stdout)")
        if orbitish:
            p.add_argument("--orbit", help="orbit levels c1,c2")
            p.add_argument("--ab", help="slot values a,b with |a|>|b|")
            p.add_argument("--r", help="ratio b^2/a^2 in [0,1) with a=1")

    p = sub.add_parser("classify", help="spectral classification of the 12 equilibria")
    common(p, orbitish=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("certify", help="Lyapunov certificates for the 12 equilibria")
    common(p, orbitish=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", help="bifurcation sweep over the ratio r (CSV)")
    common(p)
    p.add_argument("--r-min", dest="r_min")
    p.add_argument("--r-max", dest="r_max")
    p.add_argument("--steps", help="number of grid points")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="integrate a trajectory, export CSV")
    common(p)
    p.add_argument("--state", help="initial state x1,x2,x3,y1,y2,y3")
    p.add_argument("--step")
    p.add_argument("--horizon")
    p.add_argument("--sample-every", dest="sample_every")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the self-verification suites")
    common(p)
    p.add_argument("--seed")
    p.add_argument("--inject-defect", action="store_true",
                   help="negative control: perturb a decomposition coefficient")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge_config(args)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CertificationError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (BlowUpError, ProjectionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
