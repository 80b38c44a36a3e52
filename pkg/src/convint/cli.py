"""Command-line front end: config parsing, pipeline orchestration, outputs.

One JSON document describes a run: the kernel, weights, nonlinearities and
scaling map by variant name with a parameters object, plus numeric controls.
The pipeline executes in dependency order

  kernel scalars -> spectral normalization -> eigenvector eta ->
  nonlinearities (eta filled in where not declared) -> condition checks ->
  excess masses -> majorant xi -> (sigma, k) -> truncation R -> grid ->
  operator plan -> quadrature error budget -> monotone solve ->
  uniqueness probe -> emission

and every failure maps to a distinct exit code with a message naming the
stage or condition: 1 config, 2 validation, 3 spectral, 4 majorant,
5 solve. Outputs are a report JSON (byte-reproducible: sorted keys, no
timestamps) and a profile CSV with one row per grid node.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import (SpectralData, contraction_params, perron_vector,
                      solve_xi, spectral_radius)
from .discretization import (build_grid, build_plan, choose_truncation,
                             estimate_quadrature_error)
from .errors import (ConfigError, ConvintError, MajorantError, SolveError,
                     SpectralError, ValidationFailure)
from .kernels import (ExpMixtureKernel, GaussianKernel, kernel_scalars,
                      load_tabulated_kernel)
from .nonlinearities import (PowerNonlin, PowerPhi, RootPowerMeanNonlin,
                             SaturatingExpNonlin, TwoPowerMeanNonlin,
                             g_eval, load_tabulated_nonlin)
from .problem import ProblemSpec, validate_problem
from .solver import SolveOptions, solve, uniqueness_probe
from .weights import (ExpSqrtWeight, RationalWeight, build_b_matrix,
                      load_tabulated_excess)

__all__ = ["Numerics", "RunConfig", "load_config", "run", "emit_profile",
           "emit_report", "main"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Numerics:
    tol_eig: float = 1e-12
    tol_alg: float = 1e-13
    tol_trunc: float = 1e-8
    tol_stop: float = 1e-8
    tol_validate: float = 1e-8
    n_cells: int = None
    h_target: float = None
    max_iters: int = 400
    mono_slack: float = None
    samples: int = 64
    probe_scale: float = 2.0
    run_probe: bool = True
    conv_method: str = "auto"


@dataclass(frozen=True)
class RunConfig:
    mode: str
    kernel: dict
    weights: list
    nonlins: list
    phi: dict
    numerics: Numerics
    sweep_eps: list
    labels: list
    base_dir: Path
    raw: dict


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _parse_numerics(d: dict) -> Numerics:
    _require(isinstance(d, dict), "numerics must be an object")
    kwargs = {}
    for name in ("tol_eig", "tol_alg", "tol_trunc", "tol_stop", "tol_validate"):
        if name in d:
            v = float(d[name])
            _require(v > 0.0, f"numerics.{name} must be positive")
            kwargs[name] = v
    if d.get("n_cells") is not None:
        n = int(d["n_cells"])
        _require(n >= 2 and n % 2 == 0, "numerics.n_cells must be even and >= 2")
        kwargs["n_cells"] = n
    if d.get("h_target") is not None:
        h = float(d["h_target"])
        _require(h > 0.0, "numerics.h_target must be positive")
        kwargs["h_target"] = h
    if "max_iters" in d:
        m = int(d["max_iters"])
        _require(m >= 1, "numerics.max_iters must be at least 1")
        kwargs["max_iters"] = m
    if d.get("mono_slack") is not None:
        s = float(d["mono_slack"])
        _require(s >= 0.0, "numerics.mono_slack must be nonnegative")
        kwargs["mono_slack"] = s
    if "samples" in d:
        s = int(d["samples"])
        _require(s >= 2, "numerics.samples must be at least 2")
        kwargs["samples"] = s
    if "probe_scale" in d:
        p = float(d["probe_scale"])
        _require(p >= 1.0, "numerics.probe_scale must be at least 1")
        kwargs["probe_scale"] = p
    if "run_probe" in d:
        kwargs["run_probe"] = bool(d["run_probe"])
    if "conv_method" in d:
        _require(d["conv_method"] in ("auto", "fft", "direct"),
                 "numerics.conv_method must be auto, fft, or direct")
        kwargs["conv_method"] = d["conv_method"]
    return Numerics(**kwargs)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict), "config root must be a JSON object")

    mode = raw.get("mode", "solve")
    if mode == "validate-only":
        mode = "validate"
    _require(mode in ("solve", "validate", "sweep"),
             f"mode must be solve, validate, or sweep (got {mode!r})")

    for key in ("kernel", "weights", "nonlins", "phi"):
        _require(key in raw, f"config is missing the {key!r} section")
    _require(isinstance(raw["weights"], list) and raw["weights"],
             "weights must be a nonempty list")
    _require(isinstance(raw["nonlins"], list) and raw["nonlins"],
             "nonlins must be a nonempty list")
    _require(len(raw["weights"]) == len(raw["nonlins"]),
             "weights and nonlins must have the same length")

    sweep_eps = raw.get("sweep_eps", [])
    if mode == "sweep":
        _require(isinstance(sweep_eps, list) and sweep_eps,
                 "sweep mode needs a nonempty sweep_eps list")
        sweep_eps = [float(e) for e in sweep_eps]

    labels = raw.get("labels")
    if labels is not None:
        _require(isinstance(labels, list) and len(labels) == len(raw["weights"]),
                 "labels must list one name per component")

    return RunConfig(mode=mode, kernel=raw["kernel"], weights=raw["weights"],
                     nonlins=raw["nonlins"], phi=raw["phi"],
                     numerics=_parse_numerics(raw.get("numerics", {})),
                     sweep_eps=sweep_eps, labels=labels,
                     base_dir=path.parent, raw=raw)


def _build_kernel(cfg: dict, base_dir: Path):
    _require(isinstance(cfg, dict) and "variant" in cfg, "kernel needs a variant")
    v = cfg["variant"]
    try:
        if v == "gaussian":
            return GaussianKernel(cfg["coeffs"])
        if v == "exp_mixture":
            s_hi = cfg.get("s_hi", 2.0)
            if isinstance(s_hi, str):
                _require(s_hi in ("inf", "infinity"), f"bad s_hi {s_hi!r}")
                s_hi = math.inf
            return ExpMixtureKernel(cfg["coeffs"], s_lo=cfg.get("s_lo", 1.0),
                                    s_hi=s_hi, power=cfg.get("power", 0.0),
                                    decay=cfg.get("decay", 0.0))
        if v == "tabulated":
            return load_tabulated_kernel(base_dir / cfg["path"])
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"kernel: {exc}") from exc
    raise ConfigError(f"unknown kernel variant {v!r}")


def _build_weight(cfg: dict, base_dir: Path, idx: int):
    _require(isinstance(cfg, dict) and "variant" in cfg,
             f"weight {idx + 1} needs a variant")
    v = cfg["variant"]
    try:
        if v == "exp_sqrt":
            return ExpSqrtWeight(cfg["eps"])
        if v == "rational":
            return RationalWeight(cfg["eps"], cfg["alpha"])
        if v == "tabulated_excess":
            return load_tabulated_excess(base_dir / cfg["path"])
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"weight {idx + 1}: {exc}") from exc
    raise ConfigError(f"unknown weight variant {v!r} (weight {idx + 1})")


def _build_nonlin(cfg: dict, eta_default: float, base_dir: Path, idx: int):
    _require(isinstance(cfg, dict) and "variant" in cfg,
             f"nonlin {idx + 1} needs a variant")
    v = cfg["variant"]
    eta = float(cfg["eta"]) if cfg.get("eta") is not None else float(eta_default)
    try:
        if v == "power":
            return PowerNonlin(cfg["alpha"], eta)
        if v == "root_power_mean":
            return RootPowerMeanNonlin(cfg["alpha"], eta)
        if v == "two_power_mean":
            return TwoPowerMeanNonlin(cfg["alpha"], cfg["beta"], eta)
        if v == "saturating_exp":
            return SaturatingExpNonlin(cfg["alpha"], eta)
        if v == "tabulated":
            return load_tabulated_nonlin(base_dir / cfg["path"], eta=cfg.get("eta"))
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"nonlin {idx + 1}: {exc}") from exc
    raise ConfigError(f"unknown nonlin variant {v!r} (nonlin {idx + 1})")


def _build_phi(cfg: dict):
    _require(isinstance(cfg, dict) and "variant" in cfg, "phi needs a variant")
    if cfg["variant"] == "power":
        try:
            return PowerPhi(cfg["p"])
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"phi: {exc}") from exc
    raise ConfigError(f"unknown phi variant {cfg['variant']!r}")


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def emit_report(doc: dict, path):
    Path(path).write_text(json.dumps(_jsonify(doc), indent=2, sort_keys=True) + "\n")


def emit_profile(report, eta, path):
    """CSV with x, the field components, and their gaps to eta, full precision."""
    f = report.field
    eta = np.asarray(eta, dtype=float)
    n = f.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + [f"f_{i + 1}" for i in range(n)]
                   + [f"eta_gap_{i + 1}" for i in range(n)])
        for m, x in enumerate(f.grid.nodes):
            row = [format(float(x), ".17g")]
            row += [format(float(f.values[i, m]), ".17g") for i in range(n)]
            row += [format(float(f.values[i, m] - eta[i]), ".17g") for i in range(n)]
            w.writerow(row)


def _spectral_block(spectral: SpectralData, excess_w):
    return {
        "eta": spectral.eta,
        "xi": spectral.xi,
        "sigma": spectral.sigma,
        "k": spectral.k,
        "excess_w": excess_w,
        "b": spectral.b,
    }


def _solve_block(sol):
    return {
        "iterations": sol.iterations,
        "termination": sol.termination,
        "a_priori_n": sol.a_priori_n,
        "residual_sup": sol.residual_sup,
        "alpha_plus": sol.alpha_plus,
        "alpha_minus": sol.alpha_minus,
        "asymptotics": sol.asymptotics.as_dict(),
        "trace": sol.trace.as_dict(),
        "probe_deviation": sol.probe_deviation,
    }


def _n_cells_for(num: Numerics, r: float) -> int:
    if num.n_cells is not None:
        return num.n_cells
    if num.h_target is not None:
        return 2 * max(1, math.ceil(r / num.h_target))
    raise ConfigError("set numerics.n_cells or numerics.h_target")


def _prepare_spec(config: RunConfig, weights, say):
    """Normalize the kernel, compute eta, build nonlinearities, validate."""
    kernel_raw = _build_kernel(config.kernel, config.base_dir)
    try:
        scalars_raw = kernel_scalars(kernel_raw)
    except ValueError as exc:
        raise ConfigError(f"kernel scalars: {exc}") from exc
    rho = spectral_radius(scalars_raw.a, config.numerics.tol_eig)
    kernel = kernel_raw.rescaled(1.0 / rho)
    scalars = kernel_scalars(kernel)
    say(f"kernel integral matrix normalized by 1/{rho:.12g}")

    eta = perron_vector(scalars.a, config.numerics.tol_eig)
    say(f"eigenvector eta = {np.array2string(eta, precision=8)}")

    nonlins = [_build_nonlin(cfg, float(eta[j]), config.base_dir, j)
               for j, cfg in enumerate(config.nonlins)]
    try:
        spec = ProblemSpec(n=len(weights), kernel=kernel, weights=weights,
                           nonlins=nonlins, phi=_build_phi(config.phi),
                           labels=config.labels)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    validation = validate_problem(spec, samples=config.numerics.samples,
                                  tol=config.numerics.tol_validate)
    return spec, scalars, eta, rho, validation


def _solve_one(spec, scalars, eta, num: Numerics, grid, say):
    """Majorant, contraction parameters, plan, solve, probe for one problem."""
    excess = build_b_matrix(spec.weights, scalars)
    try:
        xi = solve_xi(scalars.a, excess.b, spec.nonlins, eta, num.tol_alg)
    except ValueError as exc:
        raise MajorantError(str(exc)) from exc
    sigma, k = contraction_params(eta, xi, spec.phi)
    spectral = SpectralData(a=scalars.a, eta=eta, b=excess.b, xi=xi,
                            sigma=sigma, k=k)
    say(f"majorant xi = {np.array2string(xi, precision=8)}; "
        f"sigma = {sigma:.8g}, k = {k:.8g}")

    plan = build_plan(spec, grid, spectral)
    quad = estimate_quadrature_error(spec, plan, eta, xi)
    mono_slack = num.mono_slack if num.mono_slack is not None else 10.0 * quad.total
    say(f"quadrature error budget {quad.total:.3e} "
        f"(regular {quad.regular:.1e}, singular {quad.singular:.1e}, "
        f"dropped tail {quad.dropped_tail:.1e}); slack {mono_slack:.3e}")

    opts = SolveOptions(tol_stop=num.tol_stop, max_iters=num.max_iters,
                        mono_slack=mono_slack, conv_method=num.conv_method)
    sol = solve(spec, grid, spectral, plan, opts)
    say(f"solve: {sol.iterations} iterations ({sol.termination}), "
        f"residual {sol.residual_sup:.3e}")
    if sol.termination == "iteration_cap":
        raise SolveError(
            f"iteration cap {num.max_iters} reached before the step tolerance "
            f"{num.tol_stop:g} (last step {sol.trace.d[-1]:.3e})")

    if num.run_probe:
        sol.probe_deviation = uniqueness_probe(
            spec, grid, spectral, plan, sol, scale=num.probe_scale, opts=opts)
        say(f"uniqueness probe deviation {sol.probe_deviation:.3e}")

    quad_block = {"regular": quad.regular, "singular": quad.singular,
                  "dropped_tail": quad.dropped_tail, "total": quad.total,
                  "mono_slack": mono_slack}
    return spectral, excess, quad_block, sol


def run(config: RunConfig, out_dir=".", quiet: bool = False) -> int:
    """Execute the configured pipeline; returns the process exit code."""
    say = (lambda *a, **k: None) if quiet else print
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        weights = [_build_weight(cfg, config.base_dir, j)
                   for j, cfg in enumerate(config.weights)]
        spec, scalars, eta, rho, validation = _prepare_spec(config, weights, say)
        doc = {"schema_version": SCHEMA_VERSION, "mode": config.mode,
               "config": config.raw, "kernel_scale": rho,
               "validation": validation.as_dict()}

        if config.mode == "validate":
            emit_report(doc, out / "report.json")
            say(validation)
            if not validation.passed:
                say(f"validation failed: condition(s) "
                    f"{', '.join(validation.failing_ids)}")
                return 2
            say("all eight conditions pass")
            return 0

        if not validation.passed:
            emit_report(doc, out / "report.json")
            raise ValidationFailure(
                f"condition(s) {', '.join(validation.failing_ids)} failed",
                report=validation)

        num = config.numerics
        if config.mode == "solve":
            g_sup = _g_sup_bound(spec, scalars, eta, num)
            r = choose_truncation(spec.kernel, spec.weights, eta,
                                  num.tol_trunc, g_sup)
            grid = build_grid(r, _n_cells_for(num, r))
            say(f"truncation R = {grid.r:g}, n_cells = {grid.n_cells}, h = {grid.h:g}")
            spectral, excess, quad_block, sol = _solve_one(
                spec, scalars, eta, num, grid, say)
            doc["spectral"] = _spectral_block(spectral, excess.w)
            doc["truncation"] = {"r": grid.r, "n_cells": grid.n_cells, "h": grid.h}
            doc["quadrature_error"] = quad_block
            doc["solve"] = _solve_block(sol)
            emit_report(doc, out / "report.json")
            emit_profile(sol, spectral.eta, out / "profile.csv")
            say(f"wrote {out / 'report.json'} and {out / 'profile.csv'}")
            return 0

        # sweep: one grid sized for the largest excess, fresh majorant per eps
        entries = []
        sweeps = sorted(config.sweep_eps)
        top_weights = [_swept(w, sweeps[-1], j) for j, w in enumerate(weights)]
        top_spec = ProblemSpec(n=spec.n, kernel=spec.kernel, weights=top_weights,
                               nonlins=spec.nonlins, phi=spec.phi, labels=spec.labels)
        g_sup = _g_sup_bound(top_spec, scalars, eta, num)
        r = choose_truncation(spec.kernel, top_weights, eta, num.tol_trunc, g_sup)
        grid = build_grid(r, _n_cells_for(num, r))
        say(f"sweep grid: R = {grid.r:g}, n_cells = {grid.n_cells} "
            f"(sized for eps = {sweeps[-1]:g})")
        for idx, eps in enumerate(sweeps):
            say(f"-- sweep entry {idx}: eps = {eps:g}")
            w_eps = [_swept(w, eps, j) for j, w in enumerate(weights)]
            spec_eps = ProblemSpec(n=spec.n, kernel=spec.kernel, weights=w_eps,
                                   nonlins=spec.nonlins, phi=spec.phi,
                                   labels=spec.labels)
            val_eps = validate_problem(spec_eps, samples=num.samples,
                                       tol=num.tol_validate)
            if not val_eps.passed:
                raise ValidationFailure(
                    f"sweep eps = {eps:g}: condition(s) "
                    f"{', '.join(val_eps.failing_ids)} failed", report=val_eps)
            spectral, excess, quad_block, sol = _solve_one(
                spec_eps, scalars, eta, num, grid, say)
            emit_profile(sol, spectral.eta, out / f"profile_{idx:03d}.csv")
            entries.append({"eps": eps, "profile": f"profile_{idx:03d}.csv",
                            "validation": val_eps.as_dict(),
                            "spectral": _spectral_block(spectral, excess.w),
                            "quadrature_error": quad_block,
                            "solve": _solve_block(sol)})
        doc["truncation"] = {"r": grid.r, "n_cells": grid.n_cells, "h": grid.h}
        doc["entries"] = entries
        emit_report(doc, out / "report.json")
        say(f"wrote {out / 'report.json'} and {len(entries)} profiles")
        return 0

    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 2
    except SpectralError as exc:
        print(f"spectral stage failed: {exc}", file=sys.stderr)
        return 3
    except MajorantError as exc:
        print(f"majorant stage failed: {exc}", file=sys.stderr)
        return 4
    except SolveError as exc:
        print(f"solve stage failed: {exc}", file=sys.stderr)
        return 5


def _swept(weight, eps: float, idx: int):
    if not hasattr(weight, "with_eps"):
        raise ConfigError(
            f"weight {idx + 1} ({type(weight).__name__}) has no eps parameter; "
            "sweep mode needs parametric weights")
    return weight.with_eps(eps)


def _g_sup_bound(spec, scalars, eta, num: Numerics) -> float:
    """Largest nonlinearity value the solve can reach, for truncation choice."""
    excess = build_b_matrix(spec.weights, scalars)
    try:
        xi = solve_xi(scalars.a, excess.b, spec.nonlins, eta, num.tol_alg)
    except (MajorantError, ValueError):
        xi = 4.0 * np.asarray(eta, dtype=float)
    return max(float(g_eval(nl, x)) for nl, x in zip(spec.nonlins, xi))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="convint",
        description="Solve systems of nonlinear convolution integral equations "
                    "on the line with singular weights by monotone iteration.")
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--mode", choices=["solve", "validate", "sweep"],
                        help="override the mode given in the config")
    parser.add_argument("--out-dir", default=".", help="directory for outputs")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.mode and args.mode != config.mode:
            if args.mode == "sweep" and not config.sweep_eps:
                raise ConfigError("sweep mode needs a sweep_eps list in the config")
            config = RunConfig(mode=args.mode, kernel=config.kernel,
                               weights=config.weights, nonlins=config.nonlins,
                               phi=config.phi, numerics=config.numerics,
                               sweep_eps=config.sweep_eps, labels=config.labels,
                               base_dir=config.base_dir, raw=config.raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ConvintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    return run(config, out_dir=args.out_dir, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
