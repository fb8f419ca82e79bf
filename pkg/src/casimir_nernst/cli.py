"""Command-line driver.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
non-convergence, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import crossover_temperature, fit_asymptotic_coefficients, regime_report
from .config import RunConfig, load_config
from .errors import ConfigError, ConvergenceError, FitError, RegimeError
from .lifshitz import free_energy_curve
from .materials import BlochGruneisen, ConstantRelaxation, Drude, nu_at
from .thermo import check_grid, classify_nernst, entropy_curve
from .verify import VerifySettings, format_report, run_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3

# phonon relaxation is the physical one only above this temperature in impure Au
BG_VALID_ABOVE_K = 4.0
BG_TRANSITION_K = 3.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# emitters


def _config_comment(config: RunConfig) -> str:
    return "".join(f"# {k} = {json.dumps(v)}\n" for k, v in config.resolved().items())


def _csv_text(config: RunConfig, header: list[str], rows, trailer: str = "") -> str:
    buf = io.StringIO()
    buf.write(_config_comment(config))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    buf.write(trailer)
    return buf.getvalue()


def _json_text(config: RunConfig, payload: dict) -> str:
    return json.dumps({"config": config.resolved(), **payload}, indent=2, allow_nan=False) + "\n"


def _write(text: str, path: str | None):
    """Write atomically; nothing is left behind if the run failed earlier."""
    if not path:
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# commands


def _nu_label(model, T: float) -> str:
    if isinstance(model, ConstantRelaxation):
        return "constant"
    if T >= BG_VALID_ABOVE_K:
        return "bloch_gruneisen_valid"
    if T >= BG_TRANSITION_K:
        return "transition"
    if type(model) is BlochGruneisen:
        return "perfect_lattice_extrapolation"
    return "residual_dominated"


def cmd_nu(config: RunConfig, fmt: str) -> str:
    model = config.relaxation()
    rows = []
    for T in config.temperatures():
        rows.append((T, float(nu_at(model, T)), _nu_label(model, T)))
    if fmt == "json":
        return _json_text(config, {"rows": [{"T_K": t, "nu_meV": n, "regime_label": lab} for t, n, lab in rows]})
    return _csv_text(config, ["T_K", "nu_meV", "regime_label"], rows)


def _positive_temperatures(config: RunConfig) -> list[float]:
    temps = config.temperatures()
    if any(T <= 0 for T in temps):
        raise ConfigError("this command needs temperatures > 0")
    return temps


def cmd_regimes(config: RunConfig, fmt: str) -> str:
    model = config.relaxation()
    ratio = config["numerics.strong_ratio"]
    n_freq = config["sweep.n_freq"]
    reports = [regime_report(model, T, config["sweep.m_max"], ratio) for T in _positive_temperatures(config)]
    crossovers = [
        {"nu0_meV": nu0, "n_freq": n_freq, "strong_ratio": ratio, "T_K": crossover_temperature(nu0, n_freq, ratio)}
        for nu0 in config["sweep.crossover_nu0_mev"]
    ]
    if fmt == "json":
        return _json_text(config, {
            "reports": [
                {"T_K": r.T, "nu_meV": r.nu,
                 "entries": [{"m": e.m, "zeta_m_meV": e.zeta, "relation": e.relation} for e in r.entries]}
                for r in reports
            ],
            "crossover": crossovers,
        })
    rows = [(r.T, r.nu, e.m, e.zeta, e.relation) for r in reports for e in r.entries]
    trailer = "".join(
        f"# crossover nu0_meV={c['nu0_meV']!r} n_freq={c['n_freq']} strong_ratio={c['strong_ratio']!r} T_K={c['T_K']!r}\n"
        for c in crossovers
    )
    return _csv_text(config, ["T_K", "nu_meV", "m", "zeta_m_meV", "relation"], rows, trailer)


def cmd_free_energy(config: RunConfig, fmt: str) -> str:
    curve = free_energy_curve(config.system(), _positive_temperatures(config), jobs=config["numerics.jobs"])
    rows = [(p.T, p.F, p.terms_used, p.est_error) for p in curve.points]
    if fmt == "json":
        return _json_text(config, {"points": [
            {"T_K": t, "F_J_per_m2": f, "terms_used": n, "est_error": e} for t, f, n, e in rows]})
    return _csv_text(config, ["T_K", "F_J_per_m2", "terms_used", "est_error"], rows)


def cmd_entropy(config: RunConfig, fmt: str) -> tuple[str, str | None]:
    """Entropy table plus the Nernst verdict as JSON (None if the grid cannot be classified)."""
    temps = _positive_temperatures(config)
    system = config.system()
    curve = entropy_curve(system, temps, jobs=config["numerics.jobs"])
    grid = sorted(temps, reverse=True)
    verdict = None
    try:
        check_grid(grid)
    except ConfigError as exc:
        note = str(exc)
    else:
        order = np.argsort(temps)[::-1]
        curve_desc = type(curve)(system, [curve.points[i] for i in order])
        verdict = classify_nernst(system, grid, curve=curve_desc).to_dict()
        note = None
    verdict_doc = {"verdict": verdict} if note is None else {"verdict": None, "note": note}
    rows = [(p.T, p.S, p.step_used, p.est_error, p.step_dominated) for p in curve.points]
    if fmt == "json":
        return _json_text(config, {"points": [
            {"T_K": t, "S_J_per_m2_K": s, "step_used_K": h, "est_error": e, "step_dominated": d}
            for t, s, h, e, d in rows], **verdict_doc}), None
    table = _csv_text(config, ["T_K", "S_J_per_m2_K", "step_used_K", "est_error", "step_dominated"], rows)
    return table, _json_text(config, verdict_doc)


def cmd_fit(config: RunConfig, fmt: str) -> str:
    system = config.system()
    temps = config["fit.temperatures_k"] or None
    if temps is None:
        perm = system.permittivity
        if not (isinstance(perm, Drude) and isinstance(perm.relaxation, ConstantRelaxation)):
            raise RegimeError("fit requires material.model = \"drude\" with material.relaxation = \"constant\"")
        tc = crossover_temperature(perm.relaxation.nu0, config["sweep.n_freq"], config["numerics.strong_ratio"])
        temps = np.geomspace(config["fit.window_lo"] * tc, config["fit.window_hi"] * tc, config["fit.points"])
    fit = fit_asymptotic_coefficients(system, temps, strong_ratio=config["numerics.strong_ratio"],
                                      n_freq=config["sweep.n_freq"], jobs=config["numerics.jobs"])
    if fmt == "json":
        return _json_text(config, {"fit": fit.to_dict()})
    rows = [(t, f, f / t**2, float(fit.thermal_correction(t))) for t, f in zip(fit.temperatures, fit.delta_f)]
    summary = {k: v for k, v in fit.to_dict().items() if k != "points"}
    trailer = "".join(f"# fit.{k} = {json.dumps(v)}\n" for k, v in summary.items())
    return _csv_text(config, ["T_K", "delta_F_J_per_m2", "delta_F_over_T2", "fitted_delta_F_J_per_m2"], rows, trailer)


def cmd_verify(config: RunConfig, slow: bool, jobs: int) -> tuple[str, bool]:
    settings = VerifySettings(
        omega_p=config["material.omega_p_mev"],
        separation=config["geometry.separation_m"],
        strong_ratio=config["numerics.strong_ratio"],
        numeric=config.numeric(),
        slow=slow,
    )
    checks = run_checks(settings, jobs=jobs)
    return format_report(checks), all(c.passed for c in checks)


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat dotted-key config file (TOML syntax)")
    common.add_argument("--output", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default: config output.format)")
    common.add_argument("--jobs", type=int, help="worker processes (default: config numerics.jobs)")
    common.add_argument("--slow", action="store_true", help="include the deep low-temperature checks")

    parser = _Parser(prog="casimir-nernst", description="Casimir free energy, entropy and Nernst checks for metal plates.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("nu", parents=[common], help="relaxation frequency over the sweep")
    sub.add_parser("regimes", parents=[common], help="Matsubara vs relaxation frequency relations")
    sub.add_parser("free-energy", parents=[common], help="Casimir free energy over the sweep")
    p = sub.add_parser("entropy", parents=[common], help="Casimir entropy and Nernst verdict")
    p.add_argument("--verdict", help="verdict JSON path for csv output (default: <output>.verdict.json)")
    sub.add_parser("fit", parents=[common], help="fit of the low-temperature coefficients C1, C2")
    sub.add_parser("verify", parents=[common], help="run the golden verification suite")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        overrides = {}
        if args.format:
            overrides["output.format"] = args.format
        if args.output:
            overrides["output.path"] = args.output
        if args.jobs is not None:
            overrides["numerics.jobs"] = args.jobs
        if overrides:
            config = RunConfig({**config.values, **overrides})
        fmt = config["output.format"]
        out = config["output.path"] or None

        if args.command == "verify":
            report, ok = cmd_verify(config, args.slow, config["numerics.jobs"])
            sys.stdout.write(report)
            if out:
                _write(report, out)
            return EXIT_OK if ok else EXIT_VERIFY
        if args.command == "nu":
            _write(cmd_nu(config, fmt), out)
        elif args.command == "regimes":
            _write(cmd_regimes(config, fmt), out)
        elif args.command == "free-energy":
            _write(cmd_free_energy(config, fmt), out)
        elif args.command == "fit":
            _write(cmd_fit(config, fmt), out)
        elif args.command == "entropy":
            table, verdict = cmd_entropy(config, fmt)
            _write(table, out)
            if verdict is not None:
                vpath = args.verdict or (f"{out}.verdict.json" if out else None)
                if vpath:
                    _write(verdict, vpath)
                else:
                    sys.stdout.write(verdict)
        return EXIT_OK
    except (ConfigError, RegimeError) as exc:
        print(f"casimir-nernst: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, FitError) as exc:
        print(f"casimir-nernst: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"casimir-nernst: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
