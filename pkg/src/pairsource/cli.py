"""Command-line interface: sweeps, scattering grids, correlators, verification.

Configuration is a flat INI file; outputs are CSV (grids and series, 17
significant digits, content-hash header, no timestamps) or JSON (verdicts and
verification reports, sorted keys).  Exit codes: 0 success, 1 configuration
error, 2 numeric failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from . import analytic, circuit, criterion, lindblad, scattering
from .errors import ConfigError, NumericError, PairSourceError, VerificationError
from .fock import SystemParams

VERIFY_SUITES = ("equivalence", "flux", "lorentzian", "optimal-drive", "timescales", "circuit")


# ---------------------------------------------------------------------------
# configuration


def load_config(path: str) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return cfg


def _getfloat(section, key: str, default: float | None = None) -> float:
    raw = section.get(key, None)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required option '{key}'")
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"option '{key}' must be a number, got {raw!r}") from exc


def params_from_config(cfg: configparser.ConfigParser, **overrides) -> SystemParams:
    if not cfg.has_section("params"):
        raise ConfigError("config needs a [params] section")
    sec = cfg["params"]
    kwargs = {
        "g_p": _getfloat(sec, "g_p"),
        "g_s": _getfloat(sec, "g_s"),
        "omega_s_drive": _getfloat(sec, "omega_s"),
        "omega_p_drive": _getfloat(sec, "omega_p"),
        "gamma_p": _getfloat(sec, "gamma_p"),
        "gamma_s": _getfloat(sec, "gamma_s", 1.0),
        "gamma_star": _getfloat(sec, "gamma_star", 0.0),
        "k0": _getfloat(sec, "k0", 0.0),
    }
    kwargs.update(overrides)
    try:
        return SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _axis_from_section(sec, suffix: str = "") -> tuple[str, np.ndarray]:
    name = sec.get("parameter" + suffix, None)
    if name is None:
        raise ConfigError(f"missing 'parameter{suffix}' in [sweep]")
    if name not in ("omega_s", "gamma_star", "omega_p"):
        raise ConfigError(f"unsupported sweep parameter {name!r}")
    start = _getfloat(sec, "start" + suffix)
    stop = _getfloat(sec, "stop" + suffix)
    points = int(_getfloat(sec, "points" + suffix))
    scale = sec.get("scale" + suffix, "linear")
    if points < 1:
        raise ConfigError("sweep needs at least one point")
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log scale requires positive endpoints")
        values = np.logspace(np.log10(start), np.log10(stop), points)
    elif scale == "linear":
        values = np.linspace(start, stop, points)
    else:
        raise ConfigError(f"scale must be 'linear' or 'log', got {scale!r}")
    return name, values


# ---------------------------------------------------------------------------
# output


def _format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(stream, columns: list[str], rows: list[dict], metadata: dict) -> None:
    body = io.StringIO()
    body.write(",".join(columns) + "\n")
    for row in rows:
        body.write(",".join(_format_value(row.get(c)) for c in columns) + "\n")
    data = body.getvalue()
    digest = hashlib.sha256(data.encode()).hexdigest()
    for key, value in sorted(metadata.items()):
        stream.write(f"# {key}={value}\n")
    stream.write(f"# sha256={digest}\n")
    stream.write(data)


def write_json(stream, payload) -> None:
    json.dump(payload, stream, sort_keys=True, indent=2, default=str)
    stream.write("\n")


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _emit(path, fmt, columns, rows, metadata, payload_json=None):
    stream, close = _open_out(path)
    try:
        if fmt == "json":
            write_json(stream, payload_json if payload_json is not None else rows)
        else:
            write_csv(stream, columns, rows, metadata)
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------------------
# sweep


def _sweep_point(task: dict) -> dict:
    """Evaluate one grid point; never raises (failures land in 'status')."""
    record = dict(task["coords"])
    try:
        params = SystemParams(**task["params"])
        obs = lindblad.steady_observables(params, task["n_p_max"], task["n_s_max"])
        record.update({k: float(v) for k, v in obs.items()})
        record["regime"] = criterion.classify_regime(obs["g2_p_0"])
        if task["verdicts"]:
            basis_args = dict(n_p_max=task["n_p_max"], n_s_max=task["n_s_max"])
            from .fock import box_basis

            basis = box_basis(**basis_args)
            liouv = lindblad.build_liouvillian(params, basis)
            rho = lindblad.steady_state(liouv)
            tau = lindblad.correlation_tau_grid(params, tau_max=task["tau_max"])
            _, g2 = lindblad.correlator_G2(params, tau, basis=basis, liouv=liouv, rho_ss=rho)
            _, g2p = lindblad.correlator_G2_pairs(
                params, tau, basis=basis, liouv=liouv, rho_ss=rho
            )
            verdict = criterion.evaluate_criterion(g2, g2p, g2_pump_zero=obs["g2_p_0"])
            record.update(
                {
                    "is_pair_source": verdict.is_pair_source,
                    "g2_peak_at_zero": verdict.g2_peak_at_zero,
                    "pairs_antibunched": verdict.pairs_antibunched,
                    "timescale_ordering_ok": verdict.timescale_ordering_ok,
                    "tau_a": verdict.measured.tau_a,
                    "tau_b": verdict.measured.tau_b,
                }
            )
        record["status"] = "ok"
    except Exception as exc:  # per-point failures must not abort the sweep
        record["status"] = f"error: {type(exc).__name__}: {exc}"
    return record


def run_sweep(cfg: configparser.ConfigParser, jobs: int | None = None) -> tuple[list, list]:
    """Evaluate steady observables (and optional verdicts) on a 1-D/2-D grid.

    Returns (columns, rows) in deterministic grid order.
    """
    if not cfg.has_section("sweep"):
        raise ConfigError("config needs a [sweep] section")
    sec = cfg["sweep"]
    name, values = _axis_from_section(sec)
    axes = [(name, values)]
    if sec.get("parameter2", None) is not None:
        axes.append(_axis_from_section(sec, "2"))
    n_p_max = int(_getfloat(sec, "n_p_max", lindblad.DEFAULT_N_P))
    n_s_max = int(_getfloat(sec, "n_s_max", lindblad.DEFAULT_N_S))
    verdicts = sec.get("verdicts", "false").strip().lower() in ("1", "true", "yes", "on")
    tau_max = sec.get("tau_max", None)
    tau_max = float(tau_max) if tau_max is not None else None

    base = params_from_config(cfg)
    field = {"omega_s": "omega_s_drive", "omega_p": "omega_p_drive", "gamma_star": "gamma_star"}
    tasks = []
    if len(axes) == 1:
        points = [(v,) for v in axes[0][1]]
    else:
        points = [(v1, v2) for v1 in axes[0][1] for v2 in axes[1][1]]
    for pt in points:
        overrides = {field[axes[i][0]]: float(pt[i]) for i in range(len(axes))}
        kwargs = asdict(base)
        kwargs.update(overrides)
        coords = {axes[i][0]: float(pt[i]) for i in range(len(axes))}
        tasks.append(
            {
                "coords": coords,
                "params": kwargs,
                "n_p_max": n_p_max,
                "n_s_max": n_s_max,
                "verdicts": verdicts,
                "tau_max": tau_max,
            }
        )

    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]

    columns = [a[0] for a in axes]
    columns += ["n_p", "n_s", "n_e", "n_p_out", "g2_p_0", "g2_s_0", "g2_pairs_0", "regime"]
    if verdicts:
        columns += [
            "is_pair_source",
            "g2_peak_at_zero",
            "pairs_antibunched",
            "timescale_ordering_ok",
            "tau_a",
            "tau_b",
        ]
    columns.append("status")
    return columns, rows


# ---------------------------------------------------------------------------
# scatter / correlate


def run_scatter(cfg: configparser.ConfigParser) -> tuple[list, list]:
    """Reflection spectrum plus two-photon wavefunction on requested grids."""
    params = params_from_config(cfg)
    sec = cfg["scatter"] if cfg.has_section("scatter") else {}
    k_max = _getfloat(sec, "k_max", 5.0 * params.gamma_p) if sec else 5.0 * params.gamma_p
    k_points = int(_getfloat(sec, "k_points", 201)) if sec else 201
    r_max = _getfloat(sec, "r_max", 10.0 / params.gamma_s) if sec else 10.0 / params.gamma_s
    r_points = int(_getfloat(sec, "r_points", 201)) if sec else 201

    engine = scattering.ScatterEngine(params)
    k = np.linspace(-k_max, k_max, k_points)
    r = np.linspace(0.0, r_max, r_points)
    refl = scattering.reflection_coefficient(engine, k)
    lorentz = analytic.lorentzian_reflection(params, k)
    psi2 = np.abs(scattering.psi_2ph_grid(engine, r)) ** 2
    rows = []
    for i in range(max(k_points, r_points)):
        row = {}
        if i < k_points:
            row.update({"k": float(k[i]), "R_p": float(refl[i]), "R_lorentz": float(lorentz[i])})
        if i < r_points:
            row.update({"r": float(r[i]), "psi_2ph_sq": float(psi2[i])})
        rows.append(row)
    return ["k", "R_p", "R_lorentz", "r", "psi_2ph_sq"], rows


def run_correlate(cfg: configparser.ConfigParser) -> tuple[list, list]:
    """G2 and pair-correlation series at the configured parameters."""
    params = params_from_config(cfg)
    sec = cfg["correlate"] if cfg.has_section("correlate") else {}
    tau_max = _getfloat(sec, "tau_max", 0.0) if sec else 0.0
    tau = lindblad.correlation_tau_grid(params, tau_max=tau_max if tau_max > 0 else None)
    G2, g2 = lindblad.correlator_G2(params, tau)
    G2p, g2p = lindblad.correlator_G2_pairs(params, tau)
    rows = [
        {
            "tau": float(tau[i]),
            "G2": float(G2.values[i]),
            "g2": float(g2.values[i]),
            "G2_pairs": float(G2p.values[i]),
            "g2_pairs": float(g2p.values[i]),
        }
        for i in range(len(tau))
    ]
    return ["tau", "G2", "g2", "G2_pairs", "g2_pairs"], rows


# ---------------------------------------------------------------------------
# verification suites


def _fig2_defaults() -> SystemParams:
    return SystemParams(
        g_p=0.1, g_s=0.1, omega_s_drive=analytic.omega_2ph(
            SystemParams(g_p=0.1, g_s=0.1, omega_s_drive=1.0, omega_p_drive=0.01,
                         gamma_p=20.0, gamma_s=1.0)
        ),
        omega_p_drive=0.01, gamma_p=20.0, gamma_s=1.0,
    )


def _suite_flux(params: SystemParams) -> dict:
    engine = scattering.ScatterEngine(params)
    gamma_p_purcell = analytic.purcell_rates(params).gamma_p_purcell
    worst = 0.0
    for k_i in (0.0, gamma_p_purcell, -gamma_p_purcell, 5 * gamma_p_purcell, -5 * gamma_p_purcell):
        total = scattering.flux_total(engine, k_i)
        worst = max(worst, abs(total - 1.0))
    return {"max_deviation": worst, "tolerance": 1e-6, "passed": worst < 1e-6}


def _suite_lorentzian(params: SystemParams) -> dict:
    eff = analytic.purcell_rates(params)
    width = eff.gamma_p_purcell + eff.gamma_s_purcell + params.gamma_star
    k = np.linspace(-5 * width, 5 * width, 401)
    engine = scattering.ScatterEngine(params)
    exact = scattering.reflection_coefficient(engine, k)
    approx = analytic.lorentzian_reflection(params, k)
    worst = float(np.max(np.abs(exact - approx)))
    return {"max_deviation": worst, "tolerance": 1e-2, "passed": worst < 1e-2}


def _suite_optimal_drive(params: SystemParams) -> dict:
    target = analytic.omega_2ph(params)
    grid = np.linspace(0.3 * target, 3.0 * target, 241)
    refl = [
        scattering.reflection_coefficient(
            SystemParams(**{**asdict(params), "omega_s_drive": float(w)}), 0.0
        )
        for w in grid
    ]
    i = int(np.argmin(refl))
    dev = abs(grid[i] - target) / target
    return {
        "argmin": float(grid[i]),
        "analytic": float(target),
        "relative_deviation": float(dev),
        "min_reflection": float(refl[i]),
        "passed": bool(dev < 0.10 and refl[i] < 1e-3),
    }


def _suite_timescales(params: SystemParams) -> dict:
    results = {}
    passed = True
    for omega_s in (10.0 * params.gamma_s, 0.01 * params.gamma_s):
        p = SystemParams(**{**asdict(params), "omega_s_drive": float(omega_s)})
        rate = analytic.reloading_rate(p)
        r_grid = np.linspace(0.0, 2.5 / rate, 120)
        norm = scattering.psi_4ph_pair_grid(p, r_grid)["normalized_sq"]
        fitted = scattering.fit_reloading_rate(r_grid, norm)
        dev = abs(fitted - rate) / rate
        results[f"omega_s={omega_s:g}"] = {
            "fitted": float(fitted),
            "analytic": float(rate),
            "relative_deviation": float(dev),
        }
        passed = passed and dev < 0.10
    results["tolerance"] = 0.10
    results["passed"] = passed
    return results


def _suite_equivalence(params: SystemParams) -> dict:
    weak = SystemParams(**{**asdict(params), "omega_p_drive": 1e-3 * params.gamma_s})
    tau = np.linspace(0.0, 10.0 / params.gamma_s, 201)
    G2, _ = lindblad.correlator_G2(weak, tau)
    psi2 = np.abs(scattering.psi_2ph_grid(weak, tau)) ** 2
    a = G2.values / np.max(G2.values)
    b = psi2 / np.max(psi2)
    worst = float(np.max(np.abs(a - b)))
    return {"max_deviation": worst, "tolerance": 2e-2, "passed": worst < 2e-2}


def _suite_circuit(_: SystemParams) -> dict:
    worst = 0.0
    for kappa in (0.01, 0.1, 0.5):
        spec = circuit.two_qubit_spectrum(1.0, kappa)
        for lab, e in spec["closed_form"].items():
            worst = max(worst, abs(spec["energies"][lab] - e) / abs(e))
    return {"max_deviation": worst, "tolerance": 1e-12, "passed": worst < 1e-12}


def run_verify(suite: str, cfg: configparser.ConfigParser | None = None) -> dict:
    if suite not in VERIFY_SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(VERIFY_SUITES)}")
    params = params_from_config(cfg) if cfg and cfg.has_section("params") else _fig2_defaults()
    fn = {
        "equivalence": _suite_equivalence,
        "flux": _suite_flux,
        "lorentzian": _suite_lorentzian,
        "optimal-drive": _suite_optimal_drive,
        "timescales": _suite_timescales,
        "circuit": _suite_circuit,
    }[suite]
    report = fn(params)
    report["suite"] = suite
    return report


# ---------------------------------------------------------------------------
# circuit subcommand


def run_circuit(cfg: configparser.ConfigParser) -> dict:
    if not cfg.has_section("circuit"):
        raise ConfigError("config needs a [circuit] section")
    sec = cfg["circuit"]
    cp = circuit.CircuitParams(
        omega_t=_getfloat(sec, "omega_t"),
        kappa=_getfloat(sec, "kappa"),
        g_1L=_getfloat(sec, "g_1L", 0.0),
        g_2p=_getfloat(sec, "g_2p", 0.0),
        g_1s=_getfloat(sec, "g_1s", 0.0),
        alpha=_getfloat(sec, "alpha", 0.0),
    )
    gamma_p = _getfloat(sec, "gamma_p", 1.0)
    gamma_s = _getfloat(sec, "gamma_s", 1.0)
    omega_p_drive = _getfloat(sec, "omega_p_drive", 0.0)
    report = circuit.circuit_report(cp, gamma_p, gamma_s, omega_p_drive)
    horizon = sec.get("rwa_horizon", None)
    if horizon is not None:
        report["rwa"] = circuit.rwa_validation(cp, horizon=float(horizon))
    return report


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map argparse failures onto exit code 1
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairsource", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep", "scatter", "correlate", "verify", "circuit"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI configuration file")
        p.add_argument("--out", default=None, help="output path ('-' for stdout)")
        p.add_argument("--jobs", type=int, default=None, help="worker processes")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "verify":
            p.add_argument("--suite", required=True, help=", ".join(VERIFY_SUITES))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config) if args.config else None
        unit = cfg["params"].get("unit", "gamma_s") if cfg and cfg.has_section("params") else "gamma_s"
        metadata = {"unit": unit, "command": args.command}

        if args.command == "verify":
            report = run_verify(args.suite, cfg)
            _emit(args.out, "json", [], [], {}, payload_json=report)
            return 0 if report["passed"] else 3
        if args.command == "circuit":
            if cfg is None:
                raise ConfigError("circuit requires --config")
            _emit(args.out, "json", [], [], {}, payload_json=run_circuit(cfg))
            return 0
        if cfg is None:
            raise ConfigError(f"{args.command} requires --config")
        fmt = args.format or "csv"
        if args.command == "sweep":
            columns, rows = run_sweep(cfg, jobs=args.jobs)
        elif args.command == "scatter":
            columns, rows = run_scatter(cfg)
        else:
            columns, rows = run_correlate(cfg)
        _emit(args.out, fmt, columns, rows, metadata)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3
    except (NumericError, PairSourceError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
