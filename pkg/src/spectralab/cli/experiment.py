"""Experiment pipeline: measure -> operator -> spectrum -> analyses -> report.

A run is fully determined by its config (scenario + overrides + seed); the
summary JSON is byte-identical across reruns.  Wall-clock timings are kept
out of the summary for that reason and land in a sidecar timings file.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import coeffs, measures, operators, orlicz, spectral
from ..errors import ConfigError, ScenarioError
from .scenarios import scenario_defaults

SCHEMA_VERSION = 1


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    seed: int
    measure: dict
    density: dict
    operator: dict
    analysis: dict
    checks: list
    compare: dict | None = None
    variants: list = field(default_factory=list)
    output: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        if "scenario" not in raw:
            raise ConfigError("config must name a scenario")
        base = scenario_defaults(raw["scenario"])
        cfg = ExperimentConfig(
            scenario=raw["scenario"],
            seed=int(raw.get("seed", 0)),
            measure=_merge(base["measure"], raw.get("measure", {})),
            density=_merge(base["density"], raw.get("density", {})),
            operator=_merge(base["operator"], raw.get("operator", {})),
            analysis=_merge(base.get("analysis", {}), raw.get("analysis", {})),
            checks=raw.get("checks", base.get("checks", [])),
            compare=raw.get("compare", base.get("compare")),
            variants=raw.get("variants", base.get("variants", [])),
            output=raw.get("output", {}),
        )
        cfg.validate()
        return cfg

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        try:
            with open(path) as f:
                raw = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return ExperimentConfig.from_dict(raw)

    def validate(self) -> None:
        if self.measure.get("name") not in measures.BUILTIN_MEASURES:
            raise ScenarioError(f"unknown measure {self.measure.get('name')!r}")
        route = self.operator.get("route")
        if route not in ("fourier", "logkernel", "logpotential", "steklov"):
            raise ConfigError(f"unknown operator route {route!r}")
        budget = int(self.operator.get("budget", operators.DEFAULT_MATRIX_BUDGET))
        if route == "fourier":
            if "L" not in self.operator or "K" not in self.operator:
                raise ConfigError("fourier route needs torus period L and cutoff K")
            n_dim = 2  # catalog measures used with this route live in the plane
            modes = (2 * int(self.operator["K"]) + 1) ** n_dim
            if modes > budget:
                raise ConfigError(f"{modes} Fourier modes exceed the budget {budget}")
        if route == "steklov":
            if "K" not in self.operator:
                raise ConfigError("steklov route needs a Fourier cutoff K")
            if 2 * int(self.operator["K"]) + 1 > budget:
                raise ConfigError("Steklov cutoff exceeds the matrix budget")
        win = self.analysis.get("window")
        if win is not None and (len(win) != 2 or win[0] < 1 or win[1] < win[0]):
            raise ConfigError(f"invalid analysis window {win!r}")
        kind = self.density.get("kind", "default")
        if kind not in ("default", "constant", "expression", "file"):
            raise ConfigError(f"unknown density kind {kind!r}")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "measure": self.measure,
            "density": self.density,
            "operator": self.operator,
            "analysis": self.analysis,
            "checks": self.checks,
            "compare": self.compare,
            "variants": self.variants,
            "output": self.output,
        }


def _resolve_density(
    cfg: ExperimentConfig, mu: measures.PointCloudMeasure, default: measures.SignedDensity
) -> measures.SignedDensity:
    kind = cfg.density.get("kind", "default")
    if kind == "default":
        return default
    if kind == "constant":
        return measures.SignedDensity(
            np.full(mu.atom_count, float(cfg.density.get("value", 1.0)))
        )
    if kind == "expression":
        expr = cfg.density["expr"]
        env = {"np": np, "pi": math.pi}
        names = ["x", "y", "z"]
        for ax in range(mu.ambient_dim):
            env[f"x{ax}"] = mu.positions[:, ax]
            if ax < len(names):
                env[names[ax]] = mu.positions[:, ax]
        vals = eval(expr, {"__builtins__": {}}, env)  # declarative configs only
        return measures.SignedDensity(np.broadcast_to(vals, (mu.atom_count,)).astype(float))
    if kind == "file":
        vals = np.loadtxt(cfg.density["path"], dtype=float).reshape(-1)
        return measures.SignedDensity(vals)
    raise ConfigError(f"unknown density kind {kind!r}")


def _assemble(op_cfg: dict, mu, v) -> operators.AssembledOperator:
    route = op_cfg["route"]
    budget = int(op_cfg.get("budget", operators.DEFAULT_MATRIX_BUDGET))
    if route == "fourier":
        return operators.assemble_fourier_bs(
            mu, v, L=float(op_cfg["L"]), K=int(op_cfg["K"]), matrix_budget=budget
        )
    if route == "logkernel":
        spec = operators.LogKernelSpec(
            kernel_choice=op_cfg.get("kernel", "pure_log"),
            log_coefficient=op_cfg.get("log_coefficient"),
            diagonal_rule=op_cfg.get("diagonal_rule", "cell_average"),
        )
        return operators.assemble_log_kernel(mu, v, spec)
    if route == "logpotential":
        return operators.assemble_log_potential(
            mu, v, diagonal_rule=op_cfg.get("diagonal_rule", "cell_average")
        )
    if route == "steklov":
        return operators.assemble_steklov_circle(
            mu,
            v,
            K=int(op_cfg["K"]),
            zero_mode=op_cfg.get("zero_mode", "drop"),
            center=tuple(op_cfg.get("center", (0.0, 0.0))),
            matrix_budget=budget,
        )
    raise ConfigError(f"unknown operator route {route!r}")


def _spectral_summary(report: spectral.EigenReport, analysis: dict) -> dict:
    out = {
        "route": report.route,
        "size": report.size,
        "floor": report.floor,
        "n_positive": int(len(report.positive)),
        "n_negative": int(len(report.negative)),
        "top_positive": [float(x) for x in report.positive[:40]],
        "top_negative": [float(x) for x in report.negative[:40]],
    }
    window = analysis.get("window")
    fractions = tuple(analysis.get("window_fractions", spectral.DEFAULT_WINDOW_FRACTIONS))
    for sign, key in (("+", "plateau_plus"), ("-", "plateau_minus")):
        seq = report.sequence(sign)
        if len(seq) >= 40:
            fit = spectral.weyl_plateau(
                report, sign=sign, window=window, window_fractions=fractions
            )
            out[key] = {
                "window": list(fit.window),
                "plateau": fit.plateau,
                "dispersion": fit.dispersion,
            }
        else:
            out[key] = None
    if len(report.positive):
        out["dixmier_final_positive"] = spectral.DixmierEstimate.from_values(
            report.positive
        ).final
        out["dixmier_final_signed"] = spectral.dixmier_sequence(report).final
    ow = analysis.get("order_window")
    if ow is not None and len(report.positive) >= ow[0]:
        lo, hi = spectral.order_bounds(report, "+", window=tuple(ow))
        out["order_bounds"] = {"window": list(ow), "inf": lo, "sup": hi}
    else:
        out["order_bounds"] = None
    return out


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    measure: dict
    orlicz: dict
    prediction: dict
    spectral_summary: dict
    verdicts: list
    timings: dict
    eigen_primary: spectral.EigenReport | None = None
    eigen_compare: spectral.EigenReport | None = None

    @property
    def all_passed(self) -> bool:
        return all(v["pass"] for v in self.verdicts)

    def summary_dict(self) -> dict:
        # Timings deliberately excluded: summaries are byte-stable per seed.
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "measure": self.measure,
            "orlicz": self.orlicz,
            "prediction": self.prediction,
            "spectral": self.spectral_summary,
            "verdicts": self.verdicts,
        }


def _prediction_summary(mu, v, mode: str) -> dict:
    symbol = coeffs.flagship_symbol(mu.ambient_dim)
    pred = coeffs.predicted_trace(mu, v, symbol, mode=mode)
    return {
        "a_plus": pred.a_plus,
        "a_minus": pred.a_minus,
        "residue": pred.residue,
        "components": [
            {
                "nominal_dim": c.nominal_dim,
                "coefficient": c.coefficient,
                "mass_plus": c.mass_plus,
                "mass_minus": c.mass_minus,
            }
            for c in pred.components
        ],
    }


def _measure_diagnostics(cfg, mu, v) -> dict:
    nn = measures.nearest_neighbor_spacing(mu)
    diam = measures.diameter(mu)
    out = {
        "name": cfg.measure["name"],
        "ambient_dim": mu.ambient_dim,
        "atom_count": mu.atom_count,
        "total_mass": mu.total_mass,
        "nn_spacing": nn,
        "diameter": diam,
        "components": [
            {
                "nominal_dim": c.nominal_dim,
                "atoms": c.stop - c.start,
                "mass": float(mu.weights[c.start : c.stop].sum()),
            }
            for c in mu.components
        ],
        "signed_mass": float(np.sum(mu.weights * v.values)),
    }
    lo_r = 8.0 * nn
    hi_r = diam / 4.0
    if math.isfinite(nn) and lo_r < hi_r:
        radii = np.geomspace(lo_r, hi_r, 5)
        band = measures.ahlfors_constants(
            mu,
            s=mu.components[0].nominal_dim,
            radii=radii,
            sample_count=32,
            seed=cfg.seed,
        )
        out["ahlfors"] = {
            "exponent": band.exponent,
            "c_lower": band.c_lower,
            "c_upper": band.c_upper,
            "ratio": band.ratio,
            "is_regular": band.is_regular,
            "radii": list(band.radii),
            "sample_count": band.sample_count,
        }
        center = mu.positions[mu.atom_count // 2]
        dens = measures.density_bounds(
            mu, s=mu.components[0].nominal_dim, center=center, radii=radii
        )
        out["density_bounds"] = {
            "lower": dens.lower,
            "upper": dens.upper,
            "mat_cond_ok": dens.mat_cond_ok,
            "preiss_ok": dens.preiss_ok,
            "preiss_constant": dens.preiss_constant,
        }
    else:
        out["ahlfors"] = None
        out["density_bounds"] = None
    return out


def _steklov_expected_spectrum(op_cfg: dict, mass: float) -> np.ndarray:
    K = int(op_cfg["K"])
    if op_cfg.get("zero_mode", "drop") == "drop":
        ks = np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])
        b2 = 1.0 / np.abs(ks)
    else:
        ks = np.arange(-K, K + 1)
        b2 = 1.0 / (np.abs(ks) + 1.0)
    return np.sort(b2 * mass / (2 * math.pi))[::-1]


def _evaluate_checks(cfg, report_bits) -> list:
    mu = report_bits["mu"]
    primary = report_bits["primary"]
    analysis = cfg.analysis
    window = analysis.get("window")
    fractions = tuple(analysis.get("window_fractions", spectral.DEFAULT_WINDOW_FRACTIONS))
    pred_cal = report_bits["prediction"]["calibrated"]
    verdicts = []

    def plateau_of(rep, sign="+"):
        return spectral.weyl_plateau(
            rep, sign=sign, window=window, window_fractions=fractions
        )

    for check in cfg.checks:
        kind = check["kind"]
        name = check.get("name", kind)
        entry = {"name": name, "kind": kind}
        if kind == "plateau":
            sign = check.get("sign", "+")
            fit = plateau_of(primary, sign)
            target = check["target"]
            if target == "predicted":
                target = pred_cal["a_plus"] if sign == "+" else pred_cal["a_minus"]
            rel = abs(fit.plateau / target - 1.0) if target else math.inf
            entry.update(
                observed=fit.plateau,
                expected=target,
                rel_error=rel,
                window=list(fit.window),
                dispersion=fit.dispersion,
                tol=check["tol"],
            )
            entry["pass"] = bool(rel <= check["tol"])
        elif kind == "plateau_ratio_mass":
            fit = plateau_of(primary)
            comp = mu.components[0]
            d = int(round(comp.nominal_dim))
            codim = mu.ambient_dim - d
            z_cal = coeffs.weyl_surface_coefficient(d, codim, "calibrated").value
            z_printed = coeffs.weyl_surface_coefficient(d, codim, "printed").value
            ratio = fit.plateau / mu.total_mass
            rel_cal = abs(ratio / z_cal - 1.0)
            rel_printed = abs(ratio / z_printed - 1.0)
            entry.update(
                observed=ratio,
                expected=z_cal,
                rejected=z_printed,
                rel_error=rel_cal,
                rel_error_printed=rel_printed,
                tol=check["tol"],
            )
            entry["pass"] = bool(rel_cal <= check["tol"] and rel_printed > check["tol"])
        elif kind == "variant_plateau":
            fit = plateau_of(primary)
            var = report_bits["variants"][check["variant"]]
            vfit = plateau_of(var)
            rel = abs(vfit.plateau / fit.plateau - 1.0)
            entry.update(
                observed=vfit.plateau,
                expected=fit.plateau,
                rel_error=rel,
                tol=check["tol"],
            )
            entry["pass"] = bool(rel <= check["tol"])
        elif kind == "dixmier_plateau":
            fit = plateau_of(primary)
            dix = spectral.DixmierEstimate.from_values(primary.positive).final
            rel = abs(dix / fit.plateau - 1.0)
            entry.update(observed=dix, expected=fit.plateau, rel_error=rel, tol=check["tol"])
            entry["pass"] = bool(rel <= check["tol"])
        elif kind == "dixmier_signed":
            dix = spectral.dixmier_sequence(primary).final
            err = abs(dix - check.get("target", 0.0))
            entry.update(observed=dix, expected=check.get("target", 0.0), abs_error=err, tol=check["tol"])
            entry["pass"] = bool(err <= check["tol"])
        elif kind == "order_ratio":
            ow = tuple(analysis["order_window"])
            lo, hi = spectral.order_bounds(primary, check.get("sign", "+"), window=ow)
            ratio = hi / lo if lo > 0 else math.inf
            entry.update(observed=ratio, inf=lo, sup=hi, window=list(ow), tol=check["tol"])
            entry["pass"] = bool(ratio <= check["tol"])
        elif kind == "order_norm_constant":
            ow = tuple(analysis["order_window"])
            _, hi = spectral.order_bounds(primary, "+", window=ow)
            av = report_bits["orlicz"]["averaged"]
            fitted = hi / av if av > 0 else math.inf
            factor = check.get("factor", 5.0)
            entry.update(
                sup=hi,
                averaged_norm=av,
                fitted_constant=fitted,
                bound=factor * fitted * av,
                factor=factor,
            )
            entry["pass"] = bool(hi <= factor * fitted * av)
        elif kind == "route_match":
            match = spectral.spectra_match(
                primary, report_bits["compare"], top=check["top"], rel_tol=check["tol"]
            )
            entry.update(
                observed=match.worst,
                top=check["top"],
                tol=check["tol"],
                deviations=[float(x) for x in match.deviations_positive],
            )
            entry["pass"] = bool(match.matched)
        elif kind == "steklov_diagonal":
            expected = _steklov_expected_spectrum(cfg.operator, mu.total_mass)
            got = primary.positive
            m = min(len(expected), len(got))
            dev = float(np.abs(expected[:m] - got[:m]).max()) if m else math.inf
            entry.update(observed=dev, compared=m, tol=check["tol"])
            entry["pass"] = bool(m == len(expected) and dev <= check["tol"])
        else:
            raise ConfigError(f"unknown check kind {kind!r}")
        verdicts.append(entry)
    return verdicts


def run_experiment(cfg: ExperimentConfig, out_dir) -> ExperimentReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    stage = "setup"

    def tick(name, fn, *args, **kwargs):
        nonlocal stage
        stage = name
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        timings[name] = time.perf_counter() - t0
        return result

    try:
        mu, v_default = tick(
            "measure", measures.builtin_measure, cfg.measure["name"], cfg.measure.get("params", {})
        )
        v = _resolve_density(cfg, mu, v_default)
        tick("measure_io", measures.save_measure_text, mu, out / "measure.txt", v)
        measure_diag = tick("diagnostics", _measure_diagnostics, cfg, mu, v)
        orlicz_diag = tick(
            "orlicz",
            lambda: {
                "luxemburg_psi": orlicz.luxemburg_norm(v, mu, "psi").value,
                "luxemburg_phi": orlicz.luxemburg_norm(v, mu, "phi").value,
                "averaged": orlicz.averaged_norm(v, mu),
            },
        )
        prediction = tick(
            "prediction",
            lambda: {
                "calibrated": _prediction_summary(mu, v, "calibrated"),
                "printed": _prediction_summary(mu, v, "printed"),
            },
        )
        op = tick("assemble", _assemble, cfg.operator, mu, v)
        primary = tick("eigensolve", spectral.eigen_spectrum, op)
        tick("spectrum_io", spectral.write_spectrum_csv, primary, out / "spectrum.csv")

        compare = None
        if cfg.compare is not None:
            op2 = tick("assemble_compare", _assemble, cfg.compare, mu, v)
            compare = tick("eigensolve_compare", spectral.eigen_spectrum, op2)
            spectral.write_spectrum_csv(compare, out / "spectrum_compare.csv")
        variants = {}
        for var in cfg.variants:
            label = var["label"]
            vop = tick(f"assemble_{label}", _assemble, var["operator"], mu, v)
            variants[label] = tick(f"eigensolve_{label}", spectral.eigen_spectrum, vop)

        stage = "analysis"
        summary = {"primary": _spectral_summary(primary, cfg.analysis)}
        if compare is not None:
            summary["compare"] = _spectral_summary(compare, cfg.analysis)
        for label, rep in variants.items():
            summary.setdefault("variants", {})[label] = _spectral_summary(rep, cfg.analysis)

        stage = "verdicts"
        bits = {
            "mu": mu,
            "primary": primary,
            "compare": compare,
            "variants": variants,
            "prediction": prediction,
            "orlicz": orlicz_diag,
        }
        verdicts = _evaluate_checks(cfg, bits)

        report = ExperimentReport(
            config=cfg,
            measure=measure_diag,
            orlicz=orlicz_diag,
            prediction=prediction,
            spectral_summary=summary,
            verdicts=verdicts,
            timings=timings,
            eigen_primary=primary,
            eigen_compare=compare,
        )
        stage = "emit"
        emit_report(report, out)
        return report
    except Exception as exc:
        (out / "FAILED").write_text(f"stage: {stage}\nerror: {exc!r}\n")
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_svg_line(path, xs, ys, title: str, xlabel: str, ylabel: str) -> None:
    """Tiny dependency-free SVG polyline plot."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    w, h, pad = 640, 400, 50
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    px = pad + (xs - x0) / (x1 - x0) * (w - 2 * pad)
    py = h - pad - (ys - y0) / (y1 - y0) * (h - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    with open(path, "w") as f:
        f.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n'
            f'<rect width="{w}" height="{h}" fill="white"/>\n'
            f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>\n'
            f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
            f'<text x="{w / 2}" y="{h - 10}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
            f'<text x="15" y="{h / 2}" font-size="12" transform="rotate(-90 15 {h / 2})" '
            f'text-anchor="middle">{ylabel}</text>\n'
            f'<text x="{pad}" y="{h - pad + 15}" font-size="10">{x0:.4g}</text>\n'
            f'<text x="{w - pad}" y="{h - pad + 15}" font-size="10" text-anchor="end">{x1:.4g}</text>\n'
            f'<text x="{pad - 5}" y="{h - pad}" font-size="10" text-anchor="end">{y0:.4g}</text>\n'
            f'<text x="{pad - 5}" y="{pad}" font-size="10" text-anchor="end">{y1:.4g}</text>\n'
            "</svg>\n"
        )


def emit_report(report: ExperimentReport, out_dir, formats=("json", "plotdata")) -> list:
    """Write the summary JSON and plain plot-data files (spectrum CSVs are
    written by the pipeline as soon as spectra exist)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out / "summary.json"
        with open(path, "w") as f:
            json.dump(_jsonable(report.summary_dict()), f, indent=2, sort_keys=True)
            f.write("\n")
        written.append(path)
    if "csv" in formats and report.eigen_primary is not None:
        path = out / "spectrum.csv"
        spectral.write_spectrum_csv(report.eigen_primary, path)
        written.append(path)
    if "plotdata" in formats and report.eigen_primary is not None:
        pos = report.eigen_primary.positive
        k = np.arange(1, len(pos) + 1)
        path = out / "weyl.dat"
        with open(path, "w") as f:
            f.write("# k  k*lambda_k\n")
            for kk, lam in zip(k, pos):
                f.write(f"{kk} {float(kk * lam)!r}\n")
        written.append(path)
        est = spectral.dixmier_sequence(report.eigen_primary)
        path = out / "dixmier.dat"
        with open(path, "w") as f:
            f.write("# n  dixmier_n\n")
            for n, val in enumerate(est.sequence, start=1):
                f.write(f"{n} {float(val)!r}\n")
        written.append(path)
        if report.config.output.get("svg"):
            write_svg_line(
                out / "weyl.svg", k, k * pos, "Weyl plateau", "k", "k * lambda_k"
            )
            write_svg_line(
                out / "dixmier.svg",
                np.arange(1, len(est.sequence) + 1),
                est.sequence,
                "Dixmier estimator",
                "n",
                "partial sum / log(n+2)",
            )
            written += [out / "weyl.svg", out / "dixmier.svg"]
    # Timings go to a sidecar so summary.json stays deterministic.
    with open(out / "timings.txt", "w") as f:
        for name, dt in report.timings.items():
            f.write(f"{name} {dt:.3f}\n")
    return written
