"""Acceptance suite: twelve numbered checks with fixed tolerances.

Every check writes its measurements into ``acceptance.csv`` / ``acceptance.json``
(plus a few series files); wall-clock times are printed, never written, so the
files are reproducible byte for byte from the seed.
"""

from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats

from . import steplaw as sl
from .dilation import ExponentStructure, NormalizationSequence
from .harness import Row, config_hash, fit_exponent, rows_to_csv, write_csv, write_json
from .occupation import ProfileF, enumerate_paths, estimate_laplace, range_dp, replica_rng, simulate
from .stablelaw import LimitLaw, attracting_limit, density, llt_error
from .varconst import (Domain, constant_dv_theta, constant_nonamenable, constant_schmidt,
                       constant_wreath_ZD, eigen_rayleigh, schmidt_profile_minimum, solve_scaling)
from .wreath import LampGroupModel, wreath_exact_enum, wreath_exact_z2z, wreath_return_estimate

DEFAULT_SEED = 20240601
SCHEDULE = (250, 500, 1000, 2000)


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.metrics = {k: _plain(v) for k, v in self.metrics.items()}

    def line(self) -> str:
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items() if not isinstance(v, (list, dict)))
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.cid:2d} {self.title}: {shown} ({self.elapsed:.1f}s)"


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def _short(v):
    return f"{v:.6g}" if isinstance(v, float) else v


@dataclass
class Context:
    seed: int
    out: Path
    workers: int = 1


def c01_mass_identity(ctx: Context) -> CriterionResult:
    laws = [sl.lazy_nearest_neighbor(0.5, 1), sl.axis_product([0.8, 1.6]), sl.radial(1.0, 2)]
    n, total, bad = 100, 10_000, 0
    counts = [total // 3 + (i < total % 3) for i in range(3)]
    for j, (law, m) in enumerate(zip(laws, counts)):
        for r in range(m):
            rec = simulate(law, n, replica_rng(ctx.seed + j, r))
            vals = rec.count_values()
            origin = (0,) * law.d
            if int(vals.sum()) != n + 1 or rec.counts.get(origin, 0) < 1:
                bad += 1
    return CriterionResult(1, "mass identity", bad == 0, {"paths": total, "violations": bad})


def c02_oracle_triangle(ctx: Context) -> CriterionResult:
    law = sl.lazy_nearest_neighbor(0.5, 1)
    F = ProfileF.indicator(0.3)
    worst = 0.0
    exact16 = None
    for n in range(17):
        e = enumerate_paths(law, n, F)
        dd = range_dp(law, n).d_distribution()
        worst = max(worst, max(abs(dd[m] - e.range_distribution.get(m, 0.0)) for m in range(1, n + 2)))
        exact16 = e.value
    mc = estimate_laplace(law, 16, F, 100_000, ctx.seed, workers=ctx.workers)
    z = (mc.mean - exact16) / mc.stderr
    ok = worst <= 1e-12 and abs(z) <= 3
    return CriterionResult(2, "oracle triangle", ok, {"max_dist_diff": worst, "exact": exact16,
                                                      "mc_mean": mc.mean, "mc_stderr": mc.stderr, "z": z})


def _fit_series(ctx: Context, name: str, values: list[float], k_ref: float, rel_tol: float, cid: int, title: str):
    rows = [Row(n, v, None, True) for n, v in zip(SCHEDULE, values)]
    chash = config_hash({"suite": "acceptance", "series": name, "seed": ctx.seed})
    rows_to_csv(ctx.out / f"{name}.csv", rows, chash)
    f = fit_exponent(SCHEDULE, values, 1 / 3, window=(SCHEDULE[0], SCHEDULE[-1]), predicted_constant=k_ref)
    write_json(ctx.out / f"{name}_fit.json", f.__dict__ | {"window": list(f.window)}, chash)
    ratio = f.constant / k_ref
    ok = 0.28 <= f.slope <= 0.39 and abs(ratio - 1) <= rel_tol
    return CriterionResult(cid, title, ok, {"slope": f.slope, "constant": f.constant, "k_ref": k_ref,
                                            "ratio": ratio, "values": values})


def c03_dv_exponent(ctx: Context) -> CriterionResult:
    law = sl.simple_random_walk(1)
    vals = [range_dp(law, n).laplace(1.0) for n in SCHEDULE]
    k = constant_dv_theta(1.0, 0.5, math.pi**2 / 2).k_value
    return _fit_series(ctx, "dv_range", vals, k, 0.30, 3, "range exponent and constant")


def c04_lamplighter_oracle(ctx: Context) -> CriterionResult:
    base = sl.simple_random_walk(1)
    Z2 = LampGroupModel.z2_uniform()
    worst = max(abs(wreath_exact_enum(b, Z2, n) - wreath_exact_z2z(b, n))
                for b in (base, sl.lazy_nearest_neighbor(0.5, 1)) for n in range(11))
    exact = wreath_exact_z2z(base, 8)
    enum8 = wreath_exact_enum(base, Z2, 8)
    mc = wreath_return_estimate(base, Z2, 8, (0,), 100_000, ctx.seed, workers=ctx.workers)
    z1, z2 = (mc.mean - exact) / mc.stderr, (mc.mean - enum8) / mc.stderr
    ok = worst <= 1e-12 and abs(z1) <= 3 and abs(z2) <= 3
    return CriterionResult(4, "lamplighter oracle", ok, {"max_diff": worst, "exact": exact,
                                                        "mc_mean": mc.mean, "mc_stderr": mc.stderr, "z": z1})


def c05_lamplighter_scaling(ctx: Context) -> CriterionResult:
    base = sl.simple_random_walk(1)
    vals = [wreath_exact_z2z(base, n) for n in SCHEDULE]
    k = constant_dv_theta(math.log(2), 0.5, math.pi**2 / 2).k_value
    return _fit_series(ctx, "z2z_return", vals, k, 0.35, 5, "lamplighter exponent and constant")


def c06_llt(ctx: Context) -> CriterionResult:
    rows, ok, m = [], True, {}
    for name, law, (n0, n1) in (("lazy", sl.lazy_nearest_neighbor(0.5, 1), (32, 256)),
                                ("radial1", sl.radial(1.0, 1), (64, 1024))):
        ll, ns = attracting_limit(law)
        e0, e1 = llt_error(law, ll, ns, n0).error, llt_error(law, ll, ns, n1).error
        rows += [(name, n0, e0), (name, n1, e1)]
        ok &= e1 < e0
        m[f"{name}_first"], m[f"{name}_last"] = e0, e1
    write_csv(ctx.out / "llt.csv", ["law", "n", "error"], rows, config_hash({"suite": "acceptance", "series": "llt"}))
    return CriterionResult(6, "local limit theorem trend", bool(ok), m)


def c07_density(ctx: Context) -> CriterionResult:
    x = np.linspace(-5, 5, 21)
    e_c = float(np.abs(density(LimitLaw.isotropic(1.0, 1), x) - 1 / (np.pi * (1 + x**2))).max())
    e_g = float(np.abs(density(LimitLaw.isotropic(2.0, 1, 0.5), x) - stats.norm.pdf(x)).max())
    return CriterionResult(7, "density inversion", e_c <= 1e-6 and e_g <= 1e-6, {"cauchy_err": e_c, "gauss_err": e_g})


def c08_eigen(ctx: Context) -> CriterionResult:
    lap = LimitLaw.isotropic(2.0, 1)
    cau = LimitLaw.isotropic(1.0, 1)
    U = Domain.interval(0.0, 1.0)
    lam64 = eigen_rayleigh(lap, U, 64).lam
    rel = abs(lam64 / math.pi**2 - 1)
    ladder_lap = [eigen_rayleigh(lap, U, N).lam for N in (16, 32, 64, 128)]
    ladder_cau = [eigen_rayleigh(cau, U, N).lam for N in (16, 32, 64, 128)]
    mono = (all(b <= a * (1 + 1e-9) for a, b in zip(ladder_lap, ladder_lap[1:]))
            and all(b < a for a, b in zip(ladder_cau, ladder_cau[1:])))
    nested = []
    for ll in (lap, cau):
        vals = [eigen_rayleigh(ll, Domain.interval(0.0, L), 64).lam for L in (0.5, 1.0, 2.0)]
        nested.append(vals[0] >= vals[1] >= vals[2])
    ok = rel <= 0.005 and mono and all(nested)
    return CriterionResult(8, "eigenvalue solver", ok, {"lambda64": lam64, "rel_err": rel,
                                                       "ladder_cauchy": ladder_cau, "monotone": mono,
                                                       "domain_monotone": all(nested)})


def c09_scaling(ctx: Context) -> CriterionResult:
    rows, ok = [], True
    n = 10**6
    for tau in (0.5, 1.0, 1.75):
        ns = NormalizationSequence(ExponentStructure.diagonal([1 / tau]))
        for g in (0.0, 0.25, 0.5, 0.75):
            F = ProfileF.indicator(1.0) if g == 0 else ProfileF.power(g)
            sol = solve_scaling(F, ns)
            kref = (1 - g) / (1 + tau * (1 - g))
            k_err = abs(sol.kappa - kref)
            a1, a2 = sol.a(n), sol.a(2 * n)
            rv = abs(a2 / a1 / 2**sol.kappa - 1)
            good = k_err <= 1e-9 and rv <= 0.01
            ok &= good
            rows.append((tau, g, sol.kappa, a1, a2, rv, int(good)))
    write_csv(ctx.out / "scaling.csv", ["tau", "gamma", "kappa", "a_n", "a_2n", "rel_dev", "pass"], rows,
              config_hash({"suite": "acceptance", "series": "scaling"}))
    failing = [f"tau={r[0]},gamma={r[1]}:{r[5]:.4f}" for r in rows if not r[6]]
    return CriterionResult(9, "scaling solver", bool(ok), {"failing": len(failing), "cases": failing})


def c10_schmidt(ctx: Context) -> CriterionResult:
    worst = 0.0
    for g in (0.3, 0.5, 0.7):
        for a, c in ((0.5, 1.0), (0.8, 2.5)):
            worst = max(worst, abs(constant_schmidt(g, a, c).k_value / schmidt_profile_minimum(g, a, c) - 1))
    return CriterionResult(10, "profile constant vs minimization", worst <= 0.005, {"max_rel_dev": worst})


def c11_homogeneity(ctx: Context) -> CriterionResult:
    dev = []
    for t in (0.5, 1.0, 1.75):
        for c in (0.3, 2.0, 7.0):
            dev.append(constant_dv_theta(c * 1.3, t, 4.0).k_value / constant_dv_theta(1.3, t, 4.0).k_value
                       / c ** (1 / (t + 1)) - 1)
    for alpha, d in ((2.0, 1), (1.0, 2), (0.5, 3)):
        for D in (1, 2, 5):
            base = constant_wreath_ZD(alpha, d, 3.0, D).k_value
            dev.append(constant_wreath_ZD(alpha, d, 3.0, 2 * D).k_value / base / 2 ** (alpha / (d + alpha)) - 1)
            dev.append(constant_dv_theta(D / 2, d / alpha, 3.0).k_value / base - 1)
    for g in (0.3, 0.5, 0.7):
        for c in (0.25, 3.0):
            dev.append(constant_schmidt(g, 0.7, c).k_value / constant_schmidt(g, 0.7, 1.0).k_value
                       / c ** (2 / (3 - g)) - 1)
    for r1, r2 in ((0.5, 0.5), (0.9, 0.2), (0.99, 0.7)):
        dev.append(constant_nonamenable(r1 * r2).k_value
                   / (constant_nonamenable(r1).k_value + constant_nonamenable(r2).k_value) - 1)
    worst = float(np.abs(dev).max())
    return CriterionResult(11, "homogeneity identities", worst <= 1e-12, {"checks": len(dev), "max_rel_dev": worst})


CRITERIA: list[Callable[[Context], CriterionResult]] = [
    c01_mass_identity, c02_oracle_triangle, c03_dv_exponent, c04_lamplighter_oracle,
    c05_lamplighter_scaling, c06_llt, c07_density, c08_eigen, c09_scaling, c10_schmidt, c11_homogeneity,
]


def _run_core(ctx: Context, echo: bool) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        t0 = time.perf_counter()
        r = fn(ctx)
        r.elapsed = time.perf_counter() - t0
        results.append(r)
        if echo:
            print(r.line(), flush=True)
    _write_summary(ctx, results)
    return results


def _write_summary(ctx: Context, results: list[CriterionResult]):
    chash = config_hash({"suite": "acceptance", "seed": ctx.seed})
    write_csv(ctx.out / "acceptance.csv", ["criterion", "title", "passed"],
              [(r.cid, r.title, int(r.passed)) for r in results], chash)
    write_json(ctx.out / "acceptance.json", {"seed": ctx.seed, "criteria": [
        {"id": r.cid, "title": r.title, "passed": r.passed, "metrics": r.metrics} for r in results]}, chash)


def _same_files(a: Path, b: Path) -> tuple[bool, list[str]]:
    names = sorted(p.name for p in b.iterdir() if p.is_file())
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    return not mismatch and not errors, names


def run_acceptance(seed: int = DEFAULT_SEED, out: Path | str = "results/acceptance", workers: int = 1,
                   echo: bool = False) -> list[CriterionResult]:
    """Run checks 1-11 into ``out``, then rerun them elsewhere and compare the files byte for byte (check 12)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(seed, out, workers)
    results = _run_core(ctx, echo)
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        _run_core(Context(seed, Path(tmp), workers), False)
        same, names = _same_files(out, Path(tmp))
    r12 = CriterionResult(12, "determinism", same, {"files": len(names)}, time.perf_counter() - t0)
    results.append(r12)
    _write_summary(ctx, results)
    if echo:
        print(r12.line(), flush=True)
    return results
