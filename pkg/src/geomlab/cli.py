"""Command-line front end.

Three subcommands: `compute` evaluates curvature/boundary/functional
quantities on a model, `verify` runs a named check suite, `list` prints
the catalog. Options resolve as flags > config file > defaults; config
files are plain JSON with the same keys as the long flags and unknown
keys are rejected. Exit status: 0 pass, 1 check/model failure, 2
usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from .boundary import boundary_bundle
from .errors import ConfigError, GeomlabError
from .functionals import (area_radius, boundary_area, functional_E1,
                          functional_E2, functional_F,
                          mass_boundary_integral, mass_extrapolate)
from .geometry import curvature_bundle
from .models import make_model, model_names
from .quadrature import boundary_rule, sample_interior
from .report import base_environment
from .suites import SUITES, SuiteOptions, run_suite, suite_names

QUANTITIES = ("curvature", "boundary", "functionals", "mass")


@dataclass
class RunConfig:
    command: str = ""
    model: Optional[str] = None
    suite: Optional[str] = None
    quantity: str = "functionals"
    seed: int = 0
    quad_order: Optional[int] = None
    radial_order: Optional[int] = None
    paths: Optional[int] = None
    phi: Optional[str] = None
    radii: Optional[tuple] = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: Optional[str] = None
    json_output: bool = False


_CONFIG_KEYS = {
    "model": str, "suite": str, "quantity": str, "seed": int,
    "quad_order": int, "radial_order": int, "paths": int, "phi": str,
    "radii": list, "params": dict, "tolerances": dict, "out": str,
    "json": bool,
}


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, val in doc.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        want = _CONFIG_KEYS[key]
        if want in (int,) and isinstance(val, bool):
            raise ConfigError(f"config key '{key}' must be {want.__name__}")
        if not isinstance(val, want):
            raise ConfigError(f"config key '{key}' must be {want.__name__}")
    return doc


def _parse_param(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"--param expects key=value, got '{text}'")
    for cast in (int, float):
        try:
            return key, cast(raw)
        except ValueError:
            continue
    return key, raw


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        doc = load_config_file(args.config)
        for key, val in doc.items():
            if key == "json":
                cfg.json_output = bool(val)
            elif key == "radii":
                cfg.radii = tuple(float(r) for r in val)
            elif key == "params":
                cfg.params = dict(val)
            elif key == "tolerances":
                cfg.tolerances = {str(k): float(v) for k, v in val.items()}
            else:
                setattr(cfg, key, val)
    # flags override config-file values; None means "not given"
    for name in ("model", "suite", "quantity", "seed", "quad_order",
                 "radial_order", "paths", "phi", "out"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "radii", None):
        cfg.radii = tuple(float(r) for r in args.radii.split(","))
    for item in getattr(args, "param", None) or ():
        key, val = _parse_param(item)
        cfg.params[key] = val
    if getattr(args, "json", False):
        cfg.json_output = True
    return cfg


def _emit(doc: dict, table: str, cfg: RunConfig) -> None:
    payload = json.dumps(doc, indent=2)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(payload + "\n")
    print(payload if cfg.json_output else table)


# ---------------------------------------------------------------------------
# compute


def _rows_curvature(model, cfg: RunConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    x = sample_interior(model.domain, 40, rng)
    b = curvature_bundle(model.metric, x)
    G = b.einstein_lambda(model.lam)
    gsup = float(np.sqrt(np.max(np.maximum(
        0.0, np.einsum("...ij,...ij->...", G, G)))))
    return [
        ("scalar-curvature-min", float(np.min(b.scal))),
        ("scalar-curvature-max", float(np.max(b.scal))),
        ("space-form-target", model.lam * model.dim * (model.dim - 1)),
        ("einstein-tensor-sup", gsup),
    ]


def _rows_boundary(model, cfg: RunConfig) -> list:
    order = cfg.quad_order or 16
    rows = []
    for comp in model.domain.components():
        rule = boundary_rule(comp, order)
        bb = boundary_bundle(model.metric, comp, rule.u)
        area = boundary_area(model.metric, comp, n_angular=order)
        H = bb.mean_curvature
        rows.extend([
            (f"{comp.label}-area", area),
            (f"{comp.label}-area-radius", area_radius(area, model.dim)),
            (f"{comp.label}-mean-curvature-min", float(np.min(H))),
            (f"{comp.label}-mean-curvature-max", float(np.max(H))),
            (f"{comp.label}-h2-mean", float(np.mean(bb.h2))),
        ])
    return rows


def _rows_functionals(model, cfg: RunConfig) -> list:
    order = cfg.quad_order or 48
    ck_name = model.params.get("primary_ck", "dilation")
    rows = [("F[" + ck_name + "]",
             functional_F(model.metric, model.domain, model.primary_ck,
                          model.lam, n_angular=order))]
    for phi_label, phi in (("1", 1.0),):
        rows.append((f"E1[phi={phi_label}]",
                     functional_E1(model.metric, model.domain, phi,
                                   n_angular=order)))
        rows.append((f"E2[phi={phi_label}]",
                     functional_E2(model.metric, model.domain, phi,
                                   n_angular=order)))
    return rows


def _rows_mass(model, cfg: RunConfig) -> list:
    order = cfg.quad_order or 48
    radii = cfg.radii or (10.0, 20.0, 40.0)
    rows = [(f"flux-mass-r{r:g}",
             mass_boundary_integral(model.metric, model.primary_ck, r,
                                    n_angular=order)) for r in radii]
    rows.append(("extrapolated-mass",
                 mass_extrapolate(model.metric, model.primary_ck,
                                  radii=radii, n_angular=order)))
    return rows


def cmd_compute(cfg: RunConfig) -> int:
    if cfg.model is None:
        raise ConfigError("compute needs --model")
    if cfg.quantity not in QUANTITIES:
        raise ConfigError(f"unknown quantity '{cfg.quantity}'; expected one "
                          f"of {', '.join(QUANTITIES)}")
    model = make_model(cfg.model, **cfg.params)
    rows = {
        "curvature": _rows_curvature,
        "boundary": _rows_boundary,
        "functionals": _rows_functionals,
        "mass": _rows_mass,
    }[cfg.quantity](model, cfg)
    doc = {
        "command": "compute",
        "model": cfg.model,
        "quantity": cfg.quantity,
        "environment": dict(sorted(base_environment(
            seed=cfg.seed, quad_order=cfg.quad_order,
            params=dict(sorted(cfg.params.items()))).items())),
        "rows": [{"name": n, "value": float(v)} for n, v in rows],
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    width = max(len(n) for n, _ in rows)
    table = "\n".join([f"model: {cfg.model}   quantity: {cfg.quantity}"]
                      + [f"{n:<{width}}  {v:+.10e}" for n, v in rows])
    _emit(doc, table, cfg)
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.suite is None:
        raise ConfigError("verify needs --suite")
    opts = SuiteOptions(model=cfg.model, seed=cfg.seed,
                        n_angular=cfg.quad_order,
                        n_radial=cfg.radial_order,
                        paths=cfg.paths, phi=cfg.phi)
    report = run_suite(cfg.suite, opts)
    if cfg.tolerances:
        by_name = {c.name: c for c in report.checks}
        for name, tol in cfg.tolerances.items():
            if name not in by_name:
                raise ConfigError(
                    f"tolerance override '{name}' matched no check")
            by_name[name].tolerance = float(tol)
    doc = report.to_document()
    _emit(doc, report.text_table(), cfg)
    return 0 if report.verdict else 1


# ---------------------------------------------------------------------------
# list


def cmd_list(cfg: RunConfig, sections: tuple) -> int:
    doc: dict = {}
    lines: list = []
    if "models" in sections:
        entries = []
        for name in model_names():
            m = make_model(name)
            entries.append({
                "name": name, "dim": m.dim, "lam": m.lam,
                "einstein": m.einstein,
                "boundary_components": [c.label
                                        for c in m.domain.components()],
            })
        doc["models"] = entries
        lines.append("models:")
        for e in entries:
            lines.append(f"  {e['name']:<22s} dim={e['dim']} "
                         f"lam={e['lam']:+g} einstein={e['einstein']} "
                         f"boundary={','.join(e['boundary_components'])}")
    if "suites" in sections:
        entries = []
        for name in suite_names():
            sd = SUITES[name]
            entries.append({"name": name, "anchors": list(sd.anchors),
                            "description": sd.description})
        doc["suites"] = entries
        lines.append("suites:")
        for e in entries:
            lines.append(f"  {e['name']:<22s} [{', '.join(e['anchors'])}]")
            lines.append(f"  {'':<22s} {e['description']}")
    if "fields" in sections:
        entries = []
        for name in model_names():
            m = make_model(name)
            entries.append({"model": name,
                            "conformal_killing": sorted(m.cks),
                            "static_potentials": sorted(m.statics)})
        doc["fields"] = entries
        lines.append("fields:")
        for e in entries:
            lines.append(f"  {e['model']:<22s} "
                         f"ck={','.join(e['conformal_killing'])} "
                         f"static={','.join(e['static_potentials'])}")
    _emit(doc, "\n".join(lines), cfg)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="geomlab",
        description="curvature, boundary functionals, and verification "
                    "suites on chart-described compact manifolds")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file (flags override)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--quad-order", dest="quad_order", type=int,
                        default=None, help="angular quadrature order")
        sp.add_argument("--out", default=None, help="write JSON report here")
        sp.add_argument("--json", action="store_true",
                        help="print JSON instead of the text table")

    sp = sub.add_parser("compute", help="evaluate quantities on a model")
    common(sp)
    sp.add_argument("--model", default=None, choices=model_names())
    sp.add_argument("--quantity", default=None, choices=QUANTITIES)
    sp.add_argument("--radii", default=None,
                    help="comma-separated radii for mass rows")
    sp.add_argument("--param", action="append", default=None,
                    metavar="KEY=VALUE", help="model parameter override")

    sp = sub.add_parser("verify", help="run a named verification suite")
    common(sp)
    sp.add_argument("--suite", default=None, choices=suite_names())
    sp.add_argument("--model", default=None, choices=model_names())
    sp.add_argument("--radial-order", dest="radial_order", type=int,
                    default=None)
    sp.add_argument("--paths", type=int, default=None,
                    help="number of seeded paths where applicable")
    sp.add_argument("--phi", default=None,
                    help="boundary weight choice where applicable")

    sp = sub.add_parser("list", help="print the model/suite/field catalog")
    common(sp)
    sp.add_argument("--models", action="store_true")
    sp.add_argument("--suites", action="store_true")
    sp.add_argument("--fields", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "compute":
            return cmd_compute(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        picked = tuple(s for s in ("models", "suites", "fields")
                       if getattr(args, s))
        return cmd_list(cfg, picked or ("models", "suites", "fields"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GeomlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
