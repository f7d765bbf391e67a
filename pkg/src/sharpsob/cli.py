"""Command-line driver.

    sharpsob <subcommand> [--config FILE] [flags]

Every subcommand expands its configuration into independent sweep points
(one per (n, k) pair and, where relevant, per α), runs them on a process
pool, and writes ``<subcommand>.json`` and ``<subcommand>.csv`` into the
output directory (``--output-dir``, else $SHARPSOB_OUTPUT_DIR, else
./sharpsob-output).

Exit status: 0 when every enabled check passes, 1 when some check fails,
2 for an invalid configuration, 3 when a computation leaves its regime
(the failing audit is named; results gathered so far are still written).

Config files are INI-style: a [common] section and one section per
subcommand, ``key = value`` lines, ``#`` comments.  Command-line flags win.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SUBCOMMANDS = ("constants", "verify-bubble", "rescaled-audit", "green", "giraud", "blowup", "fit",
               "fixed-point", "quotient", "b0", "rates")

CSV_HEADER = ("subcommand", "n", "k", "alpha", "alpha_mu2", "metric", "value", "threshold", "passed")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REGIME = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# configuration -------------------------------------------------------------------------------

def _dims_list(text: str):
    out = []
    for item in text.replace(" ", "").split(";"):
        if not item:
            continue
        parts = item.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'n,k' pairs separated by ';', got {item!r}")
        out.append((int(parts[0]), int(parts[1])))
    if not out:
        raise ValueError("no (n,k) pairs given")
    return tuple(out)


def _float_list(text: str):
    vals = tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    if not vals:
        raise ValueError("empty list")
    return vals


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, help)
SCHEMA = {
    "dims": (_dims_list, ((3, 1),), "(n,k) pairs, e.g. '3,1;5,2'"),
    "manifold": (str, "sphere", "sphere or torus"),
    "alpha_min": (float, 100.0, "smallest α of the sweep"),
    "alpha_max": (float, 10000.0, "largest α of the sweep"),
    "alpha_count": (int, 3, "number of log-spaced α values (at least 2)"),
    "alpha_mu2": (float, 1e-3, "target αμ²"),
    "alpha_mu2_sweep": (_float_list, (1e-3, 1e-4, 1e-5), "αμ² per α point for the rate audit"),
    "tau": (float, 1.0, "admissible bound on αμ²"),
    "tol": (float, 1e-8, "solver tolerance"),
    "degree": (int, 12, "spectral-element degree"),
    "grid_points": (int, 400, "points of audit grids"),
    "eps": (float, 0.25, "ε of the exponential weights"),
    "gamma": (float, 2.0, "γ of the X kernel"),
    "beta": (float, 2.0, "β of the Y kernel"),
    "rho": (float, 0.5, "ρ of the gir1 X kernel"),
    "gamma2": (float, 2.5, "γ of the gir2 X kernel (must exceed β)"),
    "lam": (float, 1.0, "Λ of the quotient"),
    "band": (float, 10.0, "allowed max/min ratio across a sweep"),
    "seed": (int, 0, "seed for randomized checks"),
    "random_fields": (int, 20, "number of random fields"),
    "output_dir": (str, "", "directory for reports"),
    "workers": (int, 0, "worker processes (0: number of processors)"),
    "verbose": (_bool, False, "print progress"),
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def alphas(self):
        return tuple(float(a) for a in np.geomspace(self.alpha_min, self.alpha_max, self.alpha_count))

    def echo(self) -> dict:
        out = {"subcommand": self.subcommand}
        for k, v in self.values.items():
            if k in ("output_dir", "workers", "verbose"):
                continue
            out[k] = [list(x) for x in v] if k == "dims" else (list(v) if isinstance(v, tuple) else v)
        return out


def _key_lines(text: str):
    """(section, key) -> line number, for error messages."""
    where, section = {}, None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            continue
        if "=" in s and section is not None:
            where[(section, s.split("=", 1)[0].strip())] = no
    return where


def load_config_file(path: str, subcommand: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}".replace("\n", " ")) from None
    lines = _key_lines(text)
    out = {}
    for section in parser.sections():
        if section != "common" and section not in SUBCOMMANDS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        if section not in ("common", subcommand):
            continue
        for key, raw in parser.items(section):
            line = lines.get((section, key), "?")
            if key not in SCHEMA:
                raise ConfigError(f"{path}:{line}: unknown key '{key}' in [{section}]")
            try:
                out[key] = SCHEMA[key][0](raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line}: bad value for '{key}': {exc}") from None
    return out


def validate(values: dict):
    from .euclid import Dimensions

    for n, k in values["dims"]:
        try:
            Dimensions(n, k)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"dims: {exc}") from None
    if values["manifold"] not in ("sphere", "torus"):
        raise ConfigError("manifold: must be 'sphere' or 'torus'")
    if values["alpha_count"] < 2:
        raise ConfigError("alpha_count: a sweep needs at least 2 points")
    if values["alpha_min"] < 1 or values["alpha_max"] < 1:
        raise ConfigError("alpha_min/alpha_max: α must be at least 1")
    if values["alpha_max"] < values["alpha_min"]:
        raise ConfigError("alpha_max: must not be below alpha_min")
    if not 0 < values["tau"] <= 1:
        raise ConfigError("tau: must lie in (0, 1]")
    if not 0 < values["alpha_mu2"] < values["tau"]:
        raise ConfigError("alpha_mu2: need 0 < αμ² < τ")
    if not 0 < values["eps"] < 1:
        raise ConfigError("eps: must lie in (0, 1)")
    if values["degree"] < 2:
        raise ConfigError("degree: must be at least 2")
    from .green import GreenError, check_exponents

    for n, _ in values["dims"]:
        try:
            check_exponents(n, "gir1", values["gamma"], values["beta"], values["rho"])
            check_exponents(n, "gir2", values["gamma2"], values["beta"])
        except GreenError as exc:
            raise ConfigError(f"gamma/beta/rho: {exc} (n = {n})") from None
    if values["workers"] < 0:
        raise ConfigError("workers: must be non-negative")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharpsob", description="Sharp Sobolev constant audits on model manifolds.")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--n", type=int, help="dimension (with --k, replaces dims)")
        sp.add_argument("--k", type=int, help="order (with --n, replaces dims)")
        for key, (_, _, hlp) in SCHEMA.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=hlp)
    return ap


def resolve_config(args) -> RunConfig:
    values = {k: v[1] for k, v in SCHEMA.items()}
    if args.config:
        values.update(load_config_file(args.config, args.subcommand))
    for key, (conv, _, _) in SCHEMA.items():
        raw = getattr(args, key, None)
        if raw is not None:
            try:
                values[key] = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"--{key.replace('_', '-')}: {exc}") from None
    if (args.n is None) != (args.k is None):
        raise ConfigError("--n and --k must be given together")
    if args.n is not None:
        values["dims"] = ((args.n, args.k),)
    validate(values)
    return RunConfig(args.subcommand, values)


# reports -----------------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k, ensure_ascii=False)}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def check(value, threshold, relation: str = "<="):
    """A pass/fail record; ``relation`` says how value compares with threshold."""
    value = float(value)
    ops = {"<=": value <= threshold, ">=": value >= threshold, "<": value < threshold, ">": value > threshold}
    ok = bool(ops[relation]) if math.isfinite(value) else False
    return {"value": value, "threshold": float(threshold), "relation": relation, "passed": ok}


def emit_report(cfg: RunConfig, points, summary, failure, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"subcommand": cfg.subcommand, "config": cfg.echo(), "points": points, "summary": summary,
              "regime_failure": failure}
    (out_dir / f"{cfg.subcommand}.json").write_text(dumps(report) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    rows = []
    for p in points:
        for name, c in sorted(p.get("checks", {}).items()):
            rows.append((p.get("n", ""), p.get("k", ""), p.get("alpha", ""), p.get("alpha_mu2", ""), name,
                         c["value"], c["threshold"], c["passed"]))
        for name, v in sorted(p.get("measured", {}).items()):
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                rows.append((p.get("n", ""), p.get("k", ""), p.get("alpha", ""), p.get("alpha_mu2", ""), name,
                             v, "", ""))
    for name, c in sorted(summary.get("checks", {}).items()):
        rows.append(("", "", "", "", name, c["value"], c["threshold"], c["passed"]))
    for row in rows:
        w.writerow([cfg.subcommand] + [_csv_cell(x) for x in row])
    (out_dir / f"{cfg.subcommand}.csv").write_text(buf.getvalue())


def _csv_cell(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


# jobs ---------------------------------------------------------------------------------------

def _manifold(cfg_values, n):
    from .manifold import ModelManifold

    if cfg_values["manifold"] == "sphere":
        return ModelManifold.sphere(n)
    return ModelManifold.torus(n)


def _job_constants(v, n, k, alpha):
    from .euclid import Dimensions, euclid_norms

    d = Dimensions(n, k)
    base = euclid_norms(d, nodes=v["grid_points"])
    fine = euclid_norms(d, nodes=2 * v["grid_points"])
    delta = abs(base.K0_from_hk / base.K0_from_quotient - 1.0)
    shift = abs(fine.K0_from_quotient / base.K0_from_quotient - 1.0)
    return {"measured": {"rho": d.rho, "two_sharp": d.two_sharp, "K0": base.K0_from_quotient,
                         "K0_from_norm": base.K0_from_hk, "K0_consistency_delta": delta,
                         "hk_norm_B": base.hk_norm_B},
            "checks": {"K0_consistency": check(delta, 1e-6), "K0_resolution_shift": check(shift, 1e-8)}}


def _job_verify_bubble(v, n, k, alpha):
    from .euclid import Dimensions, pde_residuals

    d = Dimensions(n, k)
    grid = np.geomspace(1e-3, 1e3, v["grid_points"])
    res = pde_residuals(d, grid)
    zmax = max(res.max_residual_Z)
    return {"measured": {"max_residual_B": res.max_residual_B, "max_residual_Z": zmax},
            "checks": {"bubble_pde": check(res.max_residual_B, 1e-8), "kernel_pde": check(zmax, 1e-8)}}


def _job_rescaled(v, n, k, alpha):
    from .euclid import Dimensions
    from .rescaled import ConcentrationParams, residual_audit

    d = Dimensions(n, k)
    m = _manifold(v, n)
    p = ConcentrationParams.from_ratio(m, d, alpha, v["alpha_mu2"], v["tau"])
    a = residual_audit(p, "B", sem_degree=v["degree"])
    return {"measured": {"inner_ratio": a.inner_ratio, "outer_ratio": a.outer_ratio, "hminus_k": a.hminus_k,
                         "hminus_scaled": a.hminus_k / math.sqrt(math.sqrt(alpha) * p.mu), "mu": p.mu}}


def _job_green(v, n, k, alpha):
    from .green import SpectralGreen, green_apply, green_decay_audit, green_integral, zonal_expand

    m = _manifold(v, n)
    g = SpectralGreen(m, alpha, k)
    integral = green_integral(g)
    decay = green_decay_audit(g)
    rng = np.random.default_rng(v["seed"] + 7919 * n + 104729 * k)
    worst = 0.0
    for _ in range(v["random_fields"]):
        coeffs = rng.standard_normal(9)
        f = zonal_expand(m, lambda r, c=coeffs: np.polynomial.polynomial.polyval(np.cos(r), c), degree=12)
        u = green_apply(g, f)
        worst = max(worst, u.hk_norm(k) / f.hminus_norm(k, alpha))
    rel = abs(integral * alpha ** k - 1.0)
    return {"measured": {"integral_times_alpha_k": integral * alpha ** k, "decay_sup": decay.sup,
                         "coercivity_ratio_max": worst},
            "checks": {"green_integral": check(rel, 1e-8), "coercivity_transfer": check(worst, 1.0)}}


def _job_giraud(v, n, k, alpha):
    from .green import exponential_slope, giraud_convolution_audit

    mu = 0.1 / math.sqrt(alpha)
    g1 = giraud_convolution_audit(n, "gir1", v["gamma"], v["beta"], v["eps"], alpha, mu, v["rho"])
    g2 = giraud_convolution_audit(n, "gir2", v["gamma2"], v["beta"], v["eps"], alpha, mu)
    out = {"measured": {"gir1_inner": g1.inner_constant, "gir1_outer": g1.outer_constant,
                        "gir2_inner": g2.inner_constant, "gir2_outer": g2.outer_constant,
                        "gir2_regime": g2.regime}, "checks": {}}
    if alpha == v["alpha_max"]:
        s = exponential_slope(n, v["gamma"], v["beta"], v["eps"], alpha, mu, v["rho"])
        out["measured"]["gir1_slope"] = s.slope
        out["checks"]["gir1_slope"] = check(s.relative_error, 0.1)
    else:
        out["skipped"] = {"gir1_slope": "slope fitted at the largest α only"}
    return out


def _job_fixed_point(v, n, k, alpha):
    from .blowup import fixed_point_construct, linear_solve_projected
    from .euclid import Dimensions
    from .rescaled import ConcentrationParams

    d = Dimensions(n, k)
    p = ConcentrationParams.from_ratio(_manifold(v, n), d, alpha, v["alpha_mu2"], v["tau"])
    fp = fixed_point_construct(p, degree=v["degree"])
    prob = fp.problem
    space = prob.space(0)
    # manufactured solution: a random field orthogonal to the kernel
    rng = np.random.default_rng(v["seed"] + 7919 * n + 104729 * k)
    psi = prob.project(rng.standard_normal(space.size) * prob.w_nodal())
    phi, _ = linear_solve_projected(prob, prob.apply(psi))
    rec = space.hk_norm(phi - psi, k) / space.hk_norm(psi, k)
    worst = max(fp.ratios) if fp.ratios else 0.0
    return {"measured": {"condition_number": prob.condition_number(0), "weighted_sup": fp.weighted_sup,
                         "sup_scaled": fp.sup_ratio, "iterations": fp.iterates, "max_ratio": worst,
                         "residual_hminus": fp.residual_hminus, "at_noise_floor": fp.at_noise_floor,
                         "mu": p.mu},
            "checks": {"manufactured_recovery": check(rec, 1e-8), "contraction": check(worst, 0.5),
                       "fixed_point_residual": check(fp.residual_hminus, 1e-8)}}


def _job_blowup(v, n, k, alpha):
    from .blowup import NodalField, fit_bubble, remainder_audit, solve_critical
    from .euclid import Dimensions

    d = Dimensions(n, k)
    m = _manifold(v, n)
    sol = solve_critical(m, d, alpha, "newton", alpha_mu2=v["alpha_mu2"], degree=v["degree"], tol=v["tol"])
    u = NodalField(sol.space, sol.values)
    mu0 = math.sqrt(v["alpha_mu2"] / alpha)
    fit = fit_bubble(m, u, alpha, d, start_mu=mu0, tau=v["tau"])
    ra = remainder_audit(m, u, fit, d)
    energy_floor = d.K0 ** (-n / (2.0 * k))
    return {"measured": {"newton_residual": sol.residual_sup, "newton_iterations": sol.iterations,
                         "energy": sol.energy, "energy_floor": energy_floor, "fit_mu": fit.mu,
                         "fit_residual": fit.residual, "remainder_inner_l0": ra.inner[0],
                         "remainder_inner_l1": ra.inner[1], "remainder_outer_l0": ra.outer[0],
                         "remainder_outer_l1": ra.outer[1], "message": sol.message},
            "checks": {"newton_residual": check(sol.residual_sup, v["tol"]),
                       "fit_defects": check(float(np.max(np.abs(fit.defects))), 1e-4),
                       "energy_above_floor": check(sol.energy, energy_floor, ">"),
                       "positivity": check(sol.min_value / float(np.max(sol.values)), -1e-10, ">=")}}


def _job_fit(v, n, k, alpha):
    from .blowup import NodalField, fit_bubble, fixed_point_construct
    from .euclid import Dimensions
    from .manifold import GeodesicOps
    from .rescaled import ConcentrationParams

    d = Dimensions(n, k)
    m = _manifold(v, n)
    p = ConcentrationParams.from_ratio(m, d, alpha, v["alpha_mu2"], v["tau"])
    fp = fixed_point_construct(p, degree=v["degree"])
    u = NodalField(fp.problem.space(0), fp.problem.w_nodal() + fp.phi)
    shift = np.zeros(n)
    shift[0] = 0.2 * p.mu
    f1 = fit_bubble(m, u, alpha, d, start_mu=1.1 * p.mu, start_shift=shift, tau=v["tau"])
    f2 = fit_bubble(m, u, alpha, d, start_mu=0.9 * p.mu, tau=v["tau"])
    dz = float(GeodesicOps(m).distance(f1.z, f2.z))
    ratio = abs(f1.mu / f2.mu - 1.0)
    ident = dz ** 2 / (f1.mu * f2.mu)
    return {"measured": {"mu_1": f1.mu, "mu_2": f2.mu, "residual": f1.residual, "boundary_hit": f1.boundary_hit},
            "checks": {"fit_defects": check(float(np.max(np.abs(f1.defects))), 1e-4),
                       "mu_identifiability": check(ratio, 1e-4), "center_identifiability": check(ident, 1e-4)}}


def _job_quotient(v, n, k, alpha):
    from .audit import sharpness_probe
    from .euclid import Dimensions

    d = Dimensions(n, k)
    s = sharpness_probe(_manifold(v, n), d, alpha=v["alpha_min"], lam=v["lam"])
    return {"measured": {"extrapolated": s.extrapolated, "target": s.target, "rate": s.rate,
                         "raw_error": s.raw_error},
            "checks": {"sharpness_extrapolated": check(s.extrapolated_error, 0.01)}}


def _job_b0(v, n, k, alpha):
    from .audit import constant_field_b0, empirical_B0
    from .euclid import Dimensions

    d = Dimensions(n, k)
    m = _manifold(v, n)
    rep = empirical_B0(m, d)
    const = constant_field_b0(m, d)
    bubbles = [c for label, c in rep.contributions.items() if label.startswith("bubble")]
    return {"measured": {"B0_lower_bound": rep.value, "constant_contribution": const,
                         "dictionary_version": rep.version, "bubble_max": max(bubbles)},
            "checks": {"b0_at_least_constant": check(rep.value - const, -1e-12, ">="),
                       "bubbles_finite": check(float(np.all(np.isfinite(bubbles))), 1.0, ">=")}}


def _job_rates(v, n, k, alpha):
    from .audit import lower_order_rate_audit
    from .euclid import Dimensions

    d = Dimensions(n, k)
    alphas = np.geomspace(v["alpha_min"], v["alpha_max"], v["alpha_count"])
    a2 = list(v["alpha_mu2_sweep"])
    if len(a2) != len(alphas):
        raise ValueError("alpha_mu2_sweep must have one entry per α")
    rep = lower_order_rate_audit(_manifold(v, n), d, alphas, a2, degree=v["degree"])
    return {"measured": {"lower_bound": rep.lower_bound, "ball_band": rep.ball_band,
                         "energy_defects": list(rep.column("energy_defect")),
                         "lebesgue_defects": list(rep.column("lebesgue_defect"))},
            "checks": {"lower_ratio_positive": check(rep.lower_bound, 0.0, ">"),
                       "energy_defect_decreasing": check(float(rep.defects_decreasing("energy_defect")), 1.0, ">="),
                       "lebesgue_defect_decreasing": check(float(rep.defects_decreasing("lebesgue_defect")), 1.0, ">="),
                       "ball_two_sided": check(rep.ball_band, v["band"])}}


JOBS = {"constants": (_job_constants, False), "verify-bubble": (_job_verify_bubble, False),
        "rescaled-audit": (_job_rescaled, True), "green": (_job_green, True), "giraud": (_job_giraud, True),
        "blowup": (_job_blowup, True), "fit": (_job_fit, True), "fixed-point": (_job_fixed_point, True),
        "quotient": (_job_quotient, False), "b0": (_job_b0, False), "rates": (_job_rates, False)}

# measured quantities whose spread across the α sweep is checked against the band
BANDED = {"rescaled-audit": ("inner_ratio", "outer_ratio", "hminus_scaled"),
          "green": ("decay_sup",), "giraud": ("gir1_inner", "gir1_outer", "gir2_inner", "gir2_outer"),
          "fixed-point": ("condition_number", "weighted_sup", "sup_scaled"),
          "blowup": ("remainder_inner_l0", "remainder_inner_l1", "remainder_outer_l0", "remainder_outer_l1")}


def _run_point(args):
    name, values, n, k, alpha = args
    from .audit import AuditError
    from .blowup import RegimeFailure
    from .green import GreenError

    func, _ = JOBS[name]
    try:
        res = func(values, n, k, alpha)
    except (RegimeFailure, GreenError, AuditError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return {"n": n, "k": k, "alpha": alpha, "regime_failure": f"{name}: {type(exc).__name__}: {exc}"}
    res.update({"n": n, "k": k, "alpha": alpha, "alpha_mu2": values["alpha_mu2"]})
    return res


def _summary(cfg: RunConfig, points):
    checks = {}
    for key in BANDED.get(cfg.subcommand, ()):
        for n, k in cfg.dims:
            vals = [p["measured"][key] for p in points
                    if p.get("n") == n and p.get("k") == k and "measured" in p
                    and isinstance(p["measured"].get(key), float) and p["measured"][key] > 0]
            if len(vals) >= 2:
                checks[f"band_{key}_n{n}_k{k}"] = check(max(vals) / min(vals), cfg.band)
    return {"checks": checks}


def run(cfg: RunConfig, out_dir: Path | None = None, stream=sys.stdout) -> int:
    func, per_alpha = JOBS[cfg.subcommand]
    alphas = cfg.alphas if per_alpha else (None,)
    tasks = [(cfg.subcommand, dict(cfg.values), n, k, a) for (n, k) in cfg.dims for a in alphas]
    workers = cfg.workers or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            points = list(pool.map(_run_point, tasks))
    else:
        points = [_run_point(t) for t in tasks]
    failure = next((p["regime_failure"] for p in points if "regime_failure" in p), None)
    summary = _summary(cfg, points)
    if out_dir is None:
        out_dir = Path(cfg.output_dir or os.environ.get("SHARPSOB_OUTPUT_DIR") or "sharpsob-output")
    emit_report(cfg, points, summary, failure, out_dir)
    all_checks = [c for p in points for c in p.get("checks", {}).values()] + list(summary["checks"].values())
    failed = [c for c in all_checks if not c["passed"]]
    print(f"{cfg.subcommand}: {len(points)} point(s), {len(all_checks) - len(failed)}/{len(all_checks)} checks "
          f"passed, report in {out_dir}", file=stream)
    if failure:
        print(f"regime failure: {failure}", file=stream)
        return EXIT_REGIME
    return EXIT_OK if not failed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
