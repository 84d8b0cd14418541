"""Command-line front end: config parsing, sweeps, and CSV/JSON emission.

Configuration lives in a single YAML file (hierarchical key/value); any
value can be overridden from the command line, with flags taking precedence
over the file and the file over built-in defaults.  Every output file
starts with a header line carrying the package version and a hash of the
fully resolved configuration, and all numbers are written with 17
significant digits so outputs diff bit-identically across platforms.

Config schema (YAML, all keys optional unless noted)::

    model: model_i            # model_i | model_ii_full | model_ii_effective
    boundary: obc             # obc | pbc
    seed: 1234
    threads: 1                # default from TOPOCORR_THREADS, else 1
    params:
      n_sites: 50             # model_i site count / model_ii cell count
      j: 1.0
      g_s: 1.0
      g_c: 1.0
      delta: 0.0
      phi: 1.5707963267948966
      gamma: 4.0
      g_c_prime: 3.0          # model_ii only
      gamma_prime: 30.0       # model_ii only
    omega_grid: {min: -4.0, max: 4.0, count: 601}
    winding: {n_k: 256, refine_tol: 1.0e-4}
    correlations: {omega: 0.0, reference_site: 10, equal_time: true}
    disorder:
      w_grid: [0.0, 0.25, 0.5]   # or {min, max, count}
      n_r: 100
      seed: 7
      observable: lambda_n       # lambda_n | r
      omega: 0.0
    quadrature: {rel_tol: 1.0e-6, tail_tol: 1.0e-8}
    outputs: {dir: out}
    validate: {n_sites: 40}

Exit codes: 0 success, 2 configuration error, 3 dynamically unstable model,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .correlations import (
    QuadratureSpec,
    equal_time,
    freq_correlations,
    lro_parameter,
)
from .disorder import critical_disorder, disorder_sweep
from .greensvd import ResonanceError, singular_gap, svd_at
from .models import (
    CouplingSet,
    ModelIParams,
    ModelIIParams,
    UnstableSystemError,
    adiabatic_eliminate,
    assert_stable,
    bloch_matrix,
    build_model_i,
    build_model_ii_full,
    dynamical_matrix,
)
from .topology import GapClosingError, winding_array, winding_number
from .validate import run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    pass


_DEFAULTS = {
    "model": "model_i",
    "boundary": "obc",
    "seed": 1234,
    "threads": None,
    "params": {
        "n_sites": 50, "j": 1.0, "g_s": None, "g_c": None, "delta": 0.0,
        "phi": math.pi / 2, "gamma": 4.0, "g_c_prime": 3.0, "gamma_prime": 30.0,
    },
    "omega_grid": {"min": -4.0, "max": 4.0, "count": 601},
    "winding": {"n_k": 256, "refine_tol": 1e-4},
    "correlations": {"omega": 0.0, "reference_site": None, "equal_time": True},
    "disorder": {"w_grid": None, "n_r": 100, "seed": 7,
                 "observable": "lambda_n", "omega": 0.0},
    "quadrature": {"rel_tol": 1e-6, "tail_tol": 1e-8},
    "outputs": {"dir": "out"},
    "validate": {"n_sites": 40},
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(val, dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = val
    return out


@dataclass
class RunConfig:
    """Fully resolved run configuration (defaults < file < CLI flags)."""

    data: dict = field(default_factory=lambda: json.loads(json.dumps(_DEFAULTS)))

    @classmethod
    def load(cls, path: str | None, overrides: dict | None = None) -> "RunConfig":
        merged = json.loads(json.dumps(_DEFAULTS))
        if path is not None:
            try:
                with open(path) as fh:
                    loaded = yaml.safe_load(fh) or {}
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
            if not isinstance(loaded, dict):
                raise ConfigError("config file must contain a mapping")
            merged = _deep_merge(merged, loaded)
        if overrides:
            merged = _deep_merge(merged, overrides)
        cfg = cls(data=merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.data["model"] not in ("model_i", "model_ii_full", "model_ii_effective"):
            raise ConfigError(f"unknown model {self.data['model']!r}")
        if self.data["boundary"] not in ("obc", "pbc"):
            raise ConfigError(f"unknown boundary {self.data['boundary']!r}")
        og = self.data["omega_grid"]
        if og["count"] < 2:
            raise ConfigError("omega_grid.count must be >= 2")
        if not og["min"] < og["max"]:
            raise ConfigError("omega_grid.min must be below omega_grid.max")

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True)

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        cfg = cls(data=_deep_merge(json.loads(json.dumps(_DEFAULTS)),
                                   yaml.safe_load(text) or {}))
        cfg.validate()
        return cfg

    @property
    def config_hash(self) -> str:
        """Hash of the computational configuration (output paths excluded)."""
        payload = {k: v for k, v in self.data.items() if k != "outputs"}
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    @property
    def threads(self) -> int:
        if self.data.get("threads"):
            return int(self.data["threads"])
        return int(os.environ.get("TOPOCORR_THREADS", "1"))

    def coupling_set(self) -> CouplingSet:
        p = self.data["params"]
        model = self.data["model"]
        if model == "model_i":
            g_s = p["g_s"] if p["g_s"] is not None else 1.0
            g_c = p["g_c"] if p["g_c"] is not None else 1.0
            return build_model_i(ModelIParams(
                n_sites=int(p["n_sites"]), j=p["j"], g_s=g_s, g_c=g_c,
                delta=p["delta"], phi=p["phi"], gamma=p["gamma"],
            ))
        g_s = p["g_s"] if p["g_s"] is not None else 0.1
        g_c = p["g_c"] if p["g_c"] is not None else 0.1
        params = ModelIIParams(
            n_cells=int(p["n_sites"]), j=p["j"], g_s=g_s, g_c=g_c,
            g_c_prime=p["g_c_prime"], delta=p["delta"], phi=p["phi"],
            gamma=p["gamma"], gamma_prime=p["gamma_prime"],
        )
        if model == "model_ii_full":
            return build_model_ii_full(params)
        return adiabatic_eliminate(params)

    def omega_values(self) -> np.ndarray:
        og = self.data["omega_grid"]
        return np.linspace(og["min"], og["max"], int(og["count"]))

    def w_values(self) -> np.ndarray:
        d = self.data["disorder"]
        grid = d.get("w_grid")
        if grid is None:
            return np.linspace(0.0, 3.0, 13)
        if isinstance(grid, dict):
            return np.linspace(grid["min"], grid["max"], int(grid["count"]))
        return np.asarray(grid, dtype=float)


# ---------------------------------------------------------------------------
# Output helpers


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


class OutputWriter:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.dir = Path(cfg.data["outputs"]["dir"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []

    @property
    def header(self) -> str:
        return f"# topocorr v{__version__} config={self.cfg.config_hash}"

    def csv(self, name: str, columns: list[str], rows) -> Path:
        path = self.dir / name
        with open(path, "w", newline="\n") as fh:
            fh.write(self.header + "\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
        self.written.append(path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.dir / name
        with open(path, "w", newline="\n") as fh:
            fh.write(self.header + "\n")
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
        self.written.append(path)
        return path


def matrix_rows(mat, with_abs=False):
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            v = mat[i, j]
            row = [i, j, v.real, v.imag]
            if with_abs:
                row.append(abs(v))
            yield row


# ---------------------------------------------------------------------------
# Subcommands


def cmd_spectrum(cfg: RunConfig) -> int:
    """Singular values over the frequency grid, OBC or per-band PBC minima."""
    c = cfg.coupling_set()
    out = OutputWriter(cfg)
    omegas = cfg.omega_values()
    if cfg.data["boundary"] == "obc":
        h = dynamical_matrix(c)
        assert_stable(h, "cmd_spectrum")
        rows = []
        for w in omegas:
            t = svd_at(h, w)
            rows.extend((w, i, s) for i, s in enumerate(t.s))
        out.csv("spectrum_obc.csv", ["omega", "index", "singular_value"], rows)
    else:
        # Band structure is a property of the matrix family, not of a steady
        # state, so the stability gate does not apply under pbc.
        n_k = int(cfg.data["winding"]["n_k"])
        ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
        dim = 2 * c.unit_cell
        rows = []
        for w in omegas:
            mats = np.stack([w * np.eye(dim) - bloch_matrix(c, k) for k in ks])
            svals = np.linalg.svd(mats, compute_uv=False)
            band_min = np.sort(svals, axis=1).min(axis=0)  # ascending per band
            for i, s in enumerate(band_min):
                rows.append((w, i, s))
        out.csv("spectrum_pbc.csv", ["omega", "band", "min_singular_value"], rows)
    for p in out.written:
        print(p)
    return EXIT_OK


def cmd_winding(cfg: RunConfig) -> int:
    """Winding-number array over the frequency window, as JSON."""
    c = cfg.coupling_set()
    og = cfg.data["omega_grid"]
    wcfg = cfg.data["winding"]
    arr = winding_array(
        c,
        omega_max=max(abs(og["min"]), abs(og["max"])),
        n_omega=int(og["count"]),
        refine_tol=wcfg["refine_tol"],
        n_k=int(wcfg["n_k"]),
    )
    out = OutputWriter(cfg)
    out.json("winding.json", {
        "closings": list(arr.closings), "nus": list(arr.nus), "stable": arr.stable,
    })
    nu0 = winding_number(c, 0.0, int(wcfg["n_k"]))
    print(f"winding array: {arr.nus} closings at {[round(x, 6) for x in arr.closings]}"
          f" (nu(0) = {nu0})")
    for p in out.written:
        print(p)
    return EXIT_OK


def cmd_correlations(cfg: RunConfig) -> int:
    """Frequency-resolved and equal-time correlation matrices plus LRO curves."""
    c = cfg.coupling_set()
    h = dynamical_matrix(c)
    assert_stable(h, "cmd_correlations")
    out = OutputWriter(cfg)
    ccfg = cfg.data["correlations"]
    omega0 = float(ccfg["omega"])

    fc = freq_correlations(svd_at(h, omega0), c)
    out.csv("freq_nbar.csv", ["row", "col", "re", "im", "abs"],
            matrix_rows(np.nan_to_num(fc.n_bar), with_abs=True))
    out.csv("freq_mbar.csv", ["row", "col", "re", "im", "abs"],
            matrix_rows(np.nan_to_num(fc.m_bar), with_abs=True))

    rows = []
    for w in cfg.omega_values():
        try:
            fcw = freq_correlations(svd_at(h, w), c)
        except ResonanceError:
            continue
        rows.append((w, lro_parameter(fcw.n_bar), lro_parameter(fcw.m_bar)))
    out.csv("lro_curve.csv", ["omega", "lambda_n", "lambda_m"], rows)

    if ccfg.get("equal_time", True):
        q = cfg.data["quadrature"]
        et = equal_time(c, QuadratureSpec(rel_tol=q["rel_tol"], tail_tol=q["tail_tol"]))
        out.csv("equal_time_nbar.csv", ["row", "col", "re", "im", "abs"],
                matrix_rows(np.nan_to_num(et.n_bar), with_abs=True))
        out.csv("equal_time_mbar.csv", ["row", "col", "re", "im", "abs"],
                matrix_rows(np.nan_to_num(et.m_bar), with_abs=True))
        rep = et.quadrature_report
        print(f"equal-time quadrature: |omega| <= {rep.omega_max:.3g}, "
              f"{rep.panels} panels, estimated error {rep.est_error:.3e}")
    for p in out.written:
        print(p)
    return EXIT_OK


def cmd_disorder(cfg: RunConfig) -> int:
    """Disorder sweep with rescaled collapse output and critical-disorder fit."""
    c = cfg.coupling_set()
    dcfg = cfg.data["disorder"]
    sweep = disorder_sweep(
        c, cfg.w_values(), n_r=int(dcfg["n_r"]), seed=int(dcfg["seed"]),
        observable=dcfg["observable"], omega=float(dcfg["omega"]),
        threads=cfg.threads,
    )
    h = dynamical_matrix(c)
    gap = singular_gap(svd_at(h, float(dcfg["omega"])), n_edge=1)
    out = OutputWriter(cfg)
    out.csv("disorder_sweep.csv", ["w", "mean", "stderr", "n_unstable"],
            zip(sweep.w_grid, sweep.means, sweep.stderrs, sweep.n_unstable))
    out.csv("disorder_collapse.csv",
            ["w", "w_over_sqrt_gap", "mean", "stderr"],
            zip(sweep.w_grid, sweep.w_grid / np.sqrt(gap), sweep.means, sweep.stderrs))
    payload = {"gap": gap, "n_r": sweep.n_r, "seed": sweep.seed,
               "observable": sweep.observable_name}
    try:
        w_c = critical_disorder(sweep)
        payload["w_c"] = w_c
        payload["c"] = w_c / math.sqrt(gap)
        print(f"W_c = {w_c:.4f}, gap = {gap:.4f}, c = W_c/sqrt(gap) = {payload['c']:.3f}")
    except ValueError as exc:
        payload["w_c"] = None
        print(f"critical disorder not identified: {exc}")
    frac_bad = sweep.n_unstable.max() / sweep.n_r
    if frac_bad > 0.1:
        print(f"warning: up to {100 * frac_bad:.0f}% unstable realizations at some W")
    out.json("disorder_fit.json", payload)
    for p in out.written:
        print(p)
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    """Run the invariant suite and print one pass/fail line per check."""
    report = run_validation(n_sites=int(cfg.data["validate"]["n_sites"]),
                            seed=int(cfg.data["seed"]))
    for line in report.lines():
        print(line)
    print(f"{'OK' if report.all_passed else 'FAILED'} "
          f"({sum(c.passed for c in report.checks)}/{len(report.checks)} checks, "
          f"{report.elapsed_s:.1f} s)")
    return EXIT_OK if report.all_passed else EXIT_NUMERICAL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topocorr",
        description="Steady-state topological diagnostics of driven-dissipative chains",
    )
    parser.add_argument("--version", action="version", version=f"topocorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", default=None, help="YAML configuration file")
        p.add_argument("--model", choices=["model_i", "model_ii_full", "model_ii_effective"])
        p.add_argument("--gamma", type=float)
        p.add_argument("--omega-min", type=float, dest="omega_min")
        p.add_argument("--omega-max", type=float, dest="omega_max")
        p.add_argument("--omega-count", type=int, dest="omega_count")
        p.add_argument("--bc", choices=["obc", "pbc"])
        p.add_argument("--n-sites", type=int, dest="n_sites")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int)
    return parser


def _overrides_from_args(args) -> dict:
    over: dict = {}
    if args.model:
        over["model"] = args.model
    if args.bc:
        over["boundary"] = args.bc
    if args.seed is not None:
        over["seed"] = args.seed
    if args.threads is not None:
        over["threads"] = args.threads
    params = {}
    if args.gamma is not None:
        params["gamma"] = args.gamma
    if args.n_sites is not None:
        params["n_sites"] = args.n_sites
    if params:
        over["params"] = params
    grid = {}
    if args.omega_min is not None:
        grid["min"] = args.omega_min
    if args.omega_max is not None:
        grid["max"] = args.omega_max
    if args.omega_count is not None:
        grid["count"] = args.omega_count
    if grid:
        over["omega_grid"] = grid
    if args.out is not None:
        over["outputs"] = {"dir": args.out}
    return over


COMMANDS = {
    "spectrum": cmd_spectrum,
    "winding": cmd_winding,
    "correlations": cmd_correlations,
    "disorder": cmd_disorder,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, _overrides_from_args(args))
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except UnstableSystemError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (GapClosingError, ResonanceError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # precondition violations surfaced by the library (window too small,
        # incompatible model for the requested quantity, ...)
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
