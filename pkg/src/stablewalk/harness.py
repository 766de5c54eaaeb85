"""Experiment configs, runners, exponent fits, result files and the command line."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import steplaw as sl
from .dilation import ExponentStructure, NormalizationSequence
from .occupation import (CapExceeded, ProfileF, enumerate_paths, estimate_laplace, functional, range_dp,
                         replica_rng, simulate)
from .stablelaw import LimitLaw, attracting_limit, llt_error
from .varconst import (Domain, constant_dv_theta, constant_nonamenable, constant_schmidt,
                       constant_wreath_ZD, eigen_rayleigh, lambda_theta, solve_scaling)
from .wreath import (EnumerationCap, LampGroupModel, wreath_exact_enum, wreath_exact_z2z,
                     wreath_return_estimate)

log = logging.getLogger("stablewalk")

SCHEMA_VERSION = 1
SOURCES = ("laplace_mc", "enumerate", "range_dp", "wreath_mc", "wreath_enum", "wreath_z2z")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_SKIPPED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --- config parsing -----------------------------------------------------------------------

def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: str | Path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    version = cfg.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    return cfg


def law_from_config(c: dict) -> sl.StepLaw:
    kind = c.get("kind")
    try:
        if kind == "lazy_nearest_neighbor":
            return sl.lazy_nearest_neighbor(c.get("hold", 0.5), c.get("d", 1))
        if kind == "simple_random_walk":
            return sl.simple_random_walk(c.get("d", 1))
        if kind == "point_mass":
            return sl.point_mass(c.get("d", 1))
        if kind == "axis_product":
            return sl.axis_product(c["alphas"])
        if kind == "radial":
            return sl.radial(c["alpha"], c.get("d", 1))
        if kind == "one_dim_general":
            return sl.one_dim_general(c["z"], c["p"], c.get("p0", 0.0))
        if kind == "explicit_table":
            return sl.explicit_table(c["points"], c["probs"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"law {kind!r}: missing or bad field {exc}") from exc
    raise ConfigError(f"unknown law kind {kind!r}")


def limit_law_from_config(c: dict) -> LimitLaw:
    kind = c.get("kind")
    if kind == "isotropic":
        return LimitLaw.isotropic(c["alpha"], c.get("d", 1), c.get("scale", 1.0))
    if kind == "axis_stable":
        return LimitLaw.axis_stable(c["alphas"], c["scales"])
    raise ConfigError(f"unknown limit law kind {kind!r}")


def profile_from_config(c: dict) -> ProfileF:
    c = dict(c)
    kind = c.pop("kind", None)
    if kind == "table":
        return ProfileF.table(c["values"])
    try:
        return getattr(ProfileF, kind)(**c)
    except (AttributeError, TypeError) as exc:
        raise ConfigError(f"bad functional spec: {exc}") from exc


def lamp_from_config(c: dict) -> LampGroupModel:
    kind = c.get("kind")
    if kind == "cyclic":
        return LampGroupModel.cyclic(c["order"], c["nu"])
    if kind == "lattice":
        return LampGroupModel.lattice(law_from_config(c["law"]))
    raise ConfigError(f"unknown lamp kind {kind!r}")


def schedule_from_config(c: dict) -> list[int]:
    if "n" in c:
        ns = [int(v) for v in c["n"]]
    elif "geometric" in c:
        g = c["geometric"]
        ns, v = [], float(g["start"])
        while v <= g["stop"] * (1 + 1e-12):
            ns.append(int(round(v)))
            v *= g["factor"]
    else:
        raise ConfigError("schedule needs 'n' or 'geometric'")
    if any(b <= a for a, b in zip(ns, ns[1:])) or not ns:
        raise ConfigError("n schedule must be nonempty and strictly increasing")
    return ns


@dataclass
class ExperimentSpec:
    source: str
    law: dict
    schedule: list[int]
    functional: dict | None = None
    lamp: dict | None = None
    replicas: int = 0
    seed: int = 0
    chunk: int = 4096
    exact_lstar: bool = True
    endpoint: list[int] | None = None
    fit: dict | None = None
    output: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_config(cls, cfg: dict) -> "ExperimentSpec":
        exp = cfg.get("experiment", cfg)
        src = exp.get("source")
        if src not in SOURCES:
            raise ConfigError(f"source must be one of {SOURCES}, got {src!r}")
        spec = cls(source=src, law=exp.get("law", {}), schedule=schedule_from_config(exp.get("schedule", {})),
                   functional=exp.get("functional"), lamp=exp.get("lamp"),
                   replicas=int(exp.get("replicas", 0)), seed=int(exp.get("seed", 0)),
                   chunk=int(exp.get("chunk", 4096)), exact_lstar=bool(exp.get("exact_lstar", True)),
                   endpoint=exp.get("endpoint"), fit=exp.get("fit"), output=exp.get("output"), raw=cfg)
        spec.validate()
        return spec

    def validate(self):
        law_from_config(self.law)
        if self.source in ("laplace_mc", "wreath_mc") and self.replicas < 2:
            raise ConfigError("Monte Carlo runs need replicas >= 2")
        if self.source in ("laplace_mc", "enumerate", "range_dp"):
            if self.functional is None and self.source != "range_dp":
                raise ConfigError(f"source {self.source} needs a functional")
        if self.source in ("wreath_mc", "wreath_enum") and self.lamp is None:
            raise ConfigError(f"source {self.source} needs a lamp model")


@dataclass
class Row:
    n: int
    value: float | None
    stderr: float | None
    exact: bool
    status: str = "ok"
    reason: str = ""
    elapsed: float = 0.0


def _run_row(spec: ExperimentSpec, n: int, workers: int = 1) -> Row:
    t0 = time.perf_counter()
    law = law_from_config(spec.law)
    src = spec.source
    try:
        if src == "laplace_mc":
            res = estimate_laplace(law, n, profile_from_config(spec.functional), spec.replicas,
                                   spec.seed, chunk=spec.chunk, workers=workers)
            row = Row(n, res.mean, res.stderr, False)
        elif src == "enumerate":
            row = Row(n, enumerate_paths(law, n, profile_from_config(spec.functional)).value, None, True)
        elif src == "range_dp":
            F = profile_from_config(spec.functional or {"kind": "indicator", "nu": 1.0})
            if F.kind != "indicator":
                raise ConfigError("range_dp rows support the indicator functional")
            if n > 5000:
                raise CapExceeded("range_dp supports n <= 5000")
            row = Row(n, range_dp(law, n).laplace(F.params["nu"]), None, True)
        elif src == "wreath_mc":
            g = tuple(spec.endpoint or [0] * law.d)
            res = wreath_return_estimate(law, lamp_from_config(spec.lamp), n, g, spec.replicas, spec.seed,
                                         exact_lstar=spec.exact_lstar, chunk=spec.chunk, workers=workers)
            row = Row(n, res.mean, res.stderr, False)
        elif src == "wreath_enum":
            g = (spec.endpoint or [0])[0]
            row = Row(n, wreath_exact_enum(law, lamp_from_config(spec.lamp), n, g), None, True)
        else:
            if n > 5000:
                raise CapExceeded("wreath_exact_z2z supports n <= 5000")
            row = Row(n, wreath_exact_z2z(law, n), None, True)
    except (CapExceeded, EnumerationCap) as exc:
        row = Row(n, None, None, True, "skipped", str(exc))
    row.elapsed = time.perf_counter() - t0
    return row


def _row_job(args):
    return _run_row(*args)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[Row]:
    """One row per scheduled ``n``; skipped rows are kept with their reason."""
    if spec.source in ("laplace_mc", "wreath_mc") or workers <= 1:
        rows = [_run_row(spec, n, workers) for n in spec.schedule]
    else:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_row_job, [(spec, n, 1) for n in spec.schedule]))
    for r in rows:
        log.info("n=%d status=%s elapsed=%.2fs", r.n, r.status, r.elapsed)
    return rows


# --- fits ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    predicted: float
    distance: float
    constant: float
    predicted_constant: float | None
    window: tuple[int, int]
    residual_rms: float


def fit_exponent(ns: Sequence[float], values: Sequence[float], predicted: float,
                 log_correction: bool = False, log_power: float | None = None,
                 window: tuple[int, int] | None = None,
                 predicted_constant: float | None = None) -> FitResult:
    """Least squares of ``log(-log v)`` on ``log n``.

    With ``log_correction`` the regressand is reduced by ``log_power * log log n``
    (default ``1 - predicted``).  The window defaults to the upper half of the
    schedule but keeps at least four rows.  ``constant`` is ``-log v / n**predicted``
    at the largest ``n`` in the window (log-corrected when requested).
    """
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        k = max(4, math.ceil(len(ns) / 2))
        window = (int(ns[-k]) if k <= len(ns) else int(ns[0]), int(ns[-1]))
    sel = (ns >= window[0]) & (ns <= window[1])
    ns, v = ns[sel], v[sel]
    if len(ns) < 4:
        raise ValueError("fit_exponent needs at least 4 rows in the window")
    if np.any(v <= 0) or np.any(v >= 1):
        raise ValueError("nonpositive -log value: fit needs values in (0, 1)")
    y = np.log(-np.log(v))
    p = (1 - predicted) if log_power is None else log_power
    if log_correction:
        y = y - p * np.log(np.log(ns))
    x = np.log(ns)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    scale = ns[-1] ** predicted * (math.log(ns[-1]) ** p if log_correction else 1.0)
    return FitResult(float(coef[0]), float(coef[1]), predicted, float(abs(coef[0] - predicted)),
                     float(-math.log(v[-1]) / scale), predicted_constant, (int(ns[0]), int(ns[-1])),
                     float(math.sqrt(np.mean(resid**2))))


# --- output -----------------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence], chash: str):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header) + ["config_hash"])
    for r in rows:
        w.writerow([_fmt(v) for v in r] + [chash])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def write_json(path: Path, payload: dict, chash: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({**payload, "config_hash": chash}, sort_keys=True, indent=2) + "\n")


def rows_to_csv(path: Path, rows: Sequence[Row], chash: str):
    write_csv(path, ["n", "value", "stderr", "exact", "status", "reason"],
              [(r.n, r.value, r.stderr, int(r.exact), r.status, r.reason) for r in rows], chash)


# --- subcommands ---------------------------------------------------------------------------

def _need_config(args) -> dict:
    if not args.config:
        raise ConfigError(f"{args.command} needs --config PATH")
    return load_config(args.config)


def _override_seed(cfg: dict, seed: int | None) -> dict:
    if seed is not None:
        target = cfg.get("experiment", cfg)
        target["seed"] = int(seed)
    return cfg


def cmd_simulate(args, out: Path) -> int:
    cfg = _override_seed(_need_config(args), args.seed)
    law = law_from_config(cfg["law"])
    F = profile_from_config(cfg.get("functional", {"kind": "indicator", "nu": 1.0}))
    n, reps, seed = int(cfg["n"]), int(cfg.get("replicas", 10)), int(cfg.get("seed", 0))
    rows = []
    for r in range(reps):
        rec = simulate(law, n, replica_rng(seed, r))
        rows.append((r, functional(rec, F), rec.range, " ".join(map(str, rec.endpoint))))
    write_csv(out / "simulate.csv", ["replica", "functional", "range", "endpoint"], rows, config_hash(cfg))
    return EXIT_OK


def _experiment_cmd(args, out: Path, name: str, allowed: tuple[str, ...]) -> int:
    cfg = _override_seed(_need_config(args), args.seed)
    spec = ExperimentSpec.from_config(cfg)
    if spec.source not in allowed:
        raise ConfigError(f"{name} accepts sources {allowed}, got {spec.source}")
    rows = run_experiment(spec, args.workers)
    chash = config_hash(cfg)
    rows_to_csv(out / f"{name}.csv", rows, chash)
    ok = [r for r in rows if r.status == "ok"]
    if spec.fit and len(ok) >= 4:
        f = fit_exponent([r.n for r in ok], [r.value for r in ok], spec.fit["predicted"],
                         spec.fit.get("log_correction", False), spec.fit.get("log_power"),
                         tuple(spec.fit["window"]) if "window" in spec.fit else None,
                         spec.fit.get("predicted_constant"))
        write_json(out / f"{name}_fit.json", asdict(f), chash)
    return EXIT_SKIPPED if not ok else EXIT_OK


def cmd_llt(args, out: Path) -> int:
    cfg = _need_config(args)
    law = law_from_config(cfg["law"])
    ll, ns = attracting_limit(law)
    rows = []
    for n in schedule_from_config(cfg["schedule"]):
        r = llt_error(law, ll, ns, n)
        rows.append((n, r.error, r.half, r.det_Bn, int(r.wrapped), r.alias_bound))
    write_csv(out / "llt.csv", ["n", "error", "half", "det_Bn", "wrapped", "alias_bound"], rows, config_hash(cfg))
    return EXIT_OK


def _domain_from_config(c: dict, d: int) -> Domain:
    kind = c.get("kind", "interval")
    if kind == "interval":
        return Domain.interval(*c.get("bounds", (0.0, 1.0)))
    if kind == "box":
        return Domain.box(c["sides"])
    if kind == "ball":
        return Domain.ball(c["radius"], d) if "radius" in c else Domain.unit_volume_ball(d)
    raise ConfigError(f"unknown domain kind {kind!r}")


def cmd_eigen(args, out: Path) -> int:
    cfg = _need_config(args)
    ll = limit_law_from_config(cfg["symbol"])
    results = []
    if cfg.get("lambda_theta"):
        r = lambda_theta(ll)
        results.append({"family": r.details.get("family", "interval"), "lambda": r.lam,
                        "domain": asdict(r.domain), "ritz_dimension": r.ritz_dimension, "residual": r.residual})
    else:
        U = _domain_from_config(cfg.get("domain", {}), ll.d)
        for N in cfg.get("basis_sizes", [64]):
            r = eigen_rayleigh(ll, U, N)
            results.append({"lambda": r.lam, "domain": asdict(U), "ritz_dimension": r.ritz_dimension,
                            "residual": r.residual})
    write_json(out / "eigen.json", {"results": results}, config_hash(cfg))
    return EXIT_OK


_CONSTANTS = {"dv_theta": constant_dv_theta, "wreath_ZD": constant_wreath_ZD,
              "schmidt_gamma": constant_schmidt, "nonamenable": constant_nonamenable}


def cmd_constants(args, out: Path) -> int:
    cfg = load_config(args.config) if args.config else {
        "constants": [{"formula": "dv_theta", "theta": 1.0, "trE": 0.5, "lambda1": math.pi**2 / 2},
                      {"formula": "dv_theta", "theta": math.log(2), "trE": 0.5, "lambda1": math.pi**2 / 2}]}
    reports = []
    for c in cfg["constants"]:
        c = dict(c)
        fn = _CONSTANTS.get(c.pop("formula", None))
        if fn is None:
            raise ConfigError(f"unknown constant formula in {c}")
        reports.append(json.loads(fn(**c).to_json()))
    write_json(out / "constants.json", {"reports": reports}, config_hash(cfg))
    return EXIT_OK


def cmd_scaling(args, out: Path) -> int:
    cfg = _need_config(args)
    F = profile_from_config(cfg["functional"])
    es = ExponentStructure.diagonal(cfg["alphas"])
    sol = solve_scaling(F, NormalizationSequence(es))
    rows = [(n, sol.a(n), sol.a_real(n), sol.kappa) for n in schedule_from_config(cfg["schedule"])]
    write_csv(out / "scaling.csv", ["n", "a_n", "a_real", "kappa"], rows, config_hash(cfg))
    return EXIT_OK


def cmd_fit(args, out: Path) -> int:
    cfg = _need_config(args)
    with open(cfg["input"], newline="") as fh:
        data = [r for r in csv.DictReader(fh) if r.get("status", "ok") == "ok" and r["value"]]
    ns = [int(r["n"]) for r in data]
    vals = [float(r["value"]) for r in data]
    f = fit_exponent(ns, vals, cfg["predicted"], cfg.get("log_correction", False), cfg.get("log_power"),
                     tuple(cfg["window"]) if "window" in cfg else None, cfg.get("predicted_constant"))
    write_json(out / "fit.json", asdict(f), config_hash(cfg))
    return EXIT_OK


def cmd_accept(args, out: Path) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(seed=args.seed if args.seed is not None else 20240601, out=out,
                             workers=args.workers, echo=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "laplace": lambda a, o: _experiment_cmd(a, o, "laplace", ("laplace_mc", "enumerate", "range_dp")),
    "wreath-return": lambda a, o: _experiment_cmd(a, o, "wreath_return", ("wreath_mc", "wreath_enum", "wreath_z2z")),
    "llt-check": cmd_llt,
    "eigen": cmd_eigen,
    "constants": cmd_constants,
    "scaling": cmd_scaling,
    "fit": cmd_fit,
    "accept": cmd_accept,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stablewalk", description="Heavy-tailed walk experiments.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--workers", type=int, default=1, metavar="N")
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INVALID
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](args, Path(args.out))
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
