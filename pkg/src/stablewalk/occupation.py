"""Occupation times of walks on Z^d: simulation, Laplace functionals and exact oracles.

``l(n, x)`` counts the visits to ``x`` at times ``0..n`` (so the counts sum to
``n + 1``) and ``D_n`` is the number of distinct visited sites.
"""

from __future__ import annotations

import bisect
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dilation import NormalizationSequence, build_Bn
from .steplaw import StepLaw

PROFILE_KINDS = ("indicator", "power", "power_log", "linear", "log_profile", "table")


@dataclass(frozen=True)
class ProfileF:
    """Occupation profile ``F`` with ``F(0) = 0``, applied site by site to visit counts."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def indicator(cls, nu: float = 1.0) -> "ProfileF":
        return cls("indicator", {"nu": float(nu)})

    @classmethod
    def power(cls, gamma: float, nu: float = 1.0) -> "ProfileF":
        return cls("power", {"gamma": float(gamma), "nu": float(nu)})

    @classmethod
    def power_log(cls, gamma: float, beta: float, nu: float = 1.0) -> "ProfileF":
        return cls("power_log", {"gamma": float(gamma), "beta": float(beta), "nu": float(nu)})

    @classmethod
    def linear(cls, theta: float) -> "ProfileF":
        return cls("linear", {"theta": float(theta)})

    @classmethod
    def log_profile(cls, lam: float) -> "ProfileF":
        return cls("log_profile", {"lam": float(lam)})

    @classmethod
    def table(cls, values: Sequence[float]) -> "ProfileF":
        """``F(m) = values[m]`` for ``m <= cap``, constant beyond."""
        v = tuple(float(x) for x in values)
        if not v or v[0] != 0.0:
            raise ValueError("a table profile needs F(0) = 0")
        return cls("table", {"values": v})

    @property
    def gamma(self) -> float | None:
        """Homogeneity exponent of the scaling limit of ``F`` (None for tables)."""
        return {"indicator": 0.0, "linear": 1.0, "log_profile": 0.0}.get(
            self.kind, self.params.get("gamma"))

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        p = self.params
        if self.kind == "indicator":
            return p["nu"] * (m > 0)
        if self.kind == "power":
            return p["nu"] * np.where(m > 0, np.abs(m) ** p["gamma"], 0.0)
        if self.kind == "power_log":
            return p["nu"] * np.where(m > 0, np.abs(m) ** p["gamma"] * np.log(math.e + m) ** p["beta"], 0.0)
        if self.kind == "linear":
            return p["theta"] * m
        if self.kind == "log_profile":
            return p["lam"] * np.log1p(m)
        vals = np.asarray(p["values"])
        return vals[np.minimum(m.astype(np.int64), len(vals) - 1)]

    def validate(self, cap: int = 10_000, tol: float = 1e-12) -> dict[str, bool]:
        """Check ``F(0) = 0``, monotone, concave and subadditive on ``0..cap``."""
        m = np.arange(cap + 1)
        v = self(m)
        inc = np.diff(v)
        checks = {
            "zero_at_zero": abs(float(v[0])) <= tol,
            "nondecreasing": bool(np.all(inc >= -tol)),
            "concave": bool(np.all(np.diff(inc) <= tol)),
        }
        # concave with F(0) = 0 implies subadditive; sample the pairs directly anyway
        a = np.arange(1, min(cap, 200) + 1)
        A, B = np.meshgrid(a, a)
        ok = A + B <= cap
        checks["subadditive"] = bool(np.all(v[(A + B)[ok]] <= v[A[ok]] + v[B[ok]] + tol))
        return checks


@dataclass
class OccupationRecord:
    """Sparse visit counts of a path of length ``n`` started at the origin."""

    n: int
    counts: dict[tuple[int, ...], int]
    endpoint: tuple[int, ...]

    @property
    def range(self) -> int:
        """``D_n``, the number of distinct visited sites."""
        return len(self.counts)

    def count_values(self) -> np.ndarray:
        return np.fromiter(self.counts.values(), dtype=np.int64, count=len(self.counts))


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, replica)``; independent of scheduling."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, replica], dtype=np.uint64)))


def occupation_from_path(path: np.ndarray) -> OccupationRecord:
    """Record for positions ``path[0..n]`` (shape ``(n+1, d)``)."""
    uniq, cnt = np.unique(path, axis=0, return_counts=True)
    counts = {tuple(u): int(c) for u, c in zip(uniq.tolist(), cnt.tolist())}
    return OccupationRecord(len(path) - 1, counts, tuple(path[-1].tolist()))


def walk_path(law: StepLaw, n: int, rng: np.random.Generator) -> np.ndarray:
    steps = law.sample(rng, n) if n else np.zeros((0, law.d), dtype=np.int64)
    path = np.zeros((n + 1, law.d), dtype=np.int64)
    np.cumsum(steps, axis=0, out=path[1:])
    return path


def simulate(law: StepLaw, n: int, rng: np.random.Generator) -> OccupationRecord:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return occupation_from_path(walk_path(law, n, rng))


def functional(rec: OccupationRecord, F: ProfileF) -> float:
    """``sum_x F(l(n, x))``."""
    return math.fsum(F(rec.count_values()).tolist())


@dataclass(frozen=True)
class EstimatorResult:
    mean: float
    stderr: float
    replicas: int
    master_seed: int
    restricted_domain: float | None = None


@dataclass(frozen=True)
class Restriction:
    """Endpoint window ``|| B_{a_n}^{-1} X_n ||_2 <= R``."""

    radius: float
    normalization: NormalizationSequence
    a_n: int

    def inverse(self) -> np.ndarray:
        return build_Bn(self.normalization, self.a_n).inverse_float()


def summarize(values: Sequence[float], seed: int, restricted: float | None = None) -> EstimatorResult:
    """Mean and standard error with correctly rounded (order-free) summation."""
    vals = list(values)
    R = len(vals)
    mean = math.fsum(vals) / R
    var = math.fsum((v - mean) ** 2 for v in vals) / (R - 1) if R > 1 else 0.0
    return EstimatorResult(mean, math.sqrt(var / R), R, seed, restricted)


def _laplace_chunk(args) -> list[float]:
    law, n, F, seed, restrict, start, stop = args
    Binv = restrict.inverse() if restrict is not None else None
    out = []
    for r in range(start, stop):
        rec = simulate(law, n, replica_rng(seed, r))
        v = math.exp(-functional(rec, F))
        if Binv is not None and np.linalg.norm(Binv @ np.asarray(rec.endpoint, dtype=float)) > restrict.radius:
            v = 0.0
        out.append(v)
    return out


def run_replicas(chunk_fn: Callable, payload: tuple, replicas: int, chunk: int, workers: int) -> list[float]:
    """Evaluate replicas ``0..replicas-1`` in chunks; results come back in replica order."""
    bounds = [(s, min(s + chunk, replicas)) for s in range(0, replicas, chunk)]
    jobs = [payload + (s, e) for s, e in bounds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(chunk_fn, jobs))
    else:
        parts = [chunk_fn(j) for j in jobs]
    return [v for p in parts for v in p]


def estimate_laplace(law: StepLaw, n: int, F: ProfileF, replicas: int, seed: int,
                     restrict: Restriction | None = None, chunk: int = 4096,
                     workers: int = 1) -> EstimatorResult:
    """Monte Carlo estimate of ``E[exp(-sum_x F(l(n, x))) 1{endpoint window}]``."""
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    vals = run_replicas(_laplace_chunk, (law, n, F, seed, restrict), replicas, chunk, workers)
    return summarize(vals, seed, restrict.radius if restrict is not None else None)


# --- exact path enumeration ---------------------------------------------------------

class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class PathEnumeration:
    """Exact path statistics of a finite-support walk."""

    n: int
    value: float
    by_endpoint: dict[tuple[int, ...], float]
    range_distribution: dict[int, float]
    bridge_range_distribution: dict[int, float]
    states: int


def enumerate_states(law: StepLaw, n: int, cap: float = 1e8) -> dict:
    """Law of ``(X_n, occupation profile)`` by exhaustive forward expansion.

    Every path is expanded; paths with identical position and identical visit
    counts are merged, which keeps the exact law while bounding memory.
    """
    if not law.finite:
        raise ValueError("path enumeration needs a finite-support law")
    if float(len(law.probs)) ** n > cap:
        raise CapExceeded(f"{len(law.probs)}^{n} paths exceed the cap {cap:g}")
    steps = [(tuple(p), q) for p, q in zip(law.points.tolist(), law.probs.tolist())]
    origin = (0,) * law.d
    cur = {(origin, ((origin, 1),)): 1.0}
    for _ in range(n):
        nxt: dict = {}
        for (pos, occ), pr in cur.items():
            sites = [s for s, _ in occ]
            for dx, q in steps:
                y = tuple(a + b for a, b in zip(pos, dx))
                i = bisect.bisect_left(sites, y)
                if i < len(occ) and occ[i][0] == y:
                    new = occ[:i] + ((y, occ[i][1] + 1),) + occ[i + 1:]
                else:
                    new = occ[:i] + ((y, 1),) + occ[i:]
                key = (y, new)
                nxt[key] = nxt.get(key, 0.0) + pr * q
        cur = nxt
    return cur


def enumerate_paths(law: StepLaw, n: int, F: ProfileF, cap: float = 1e8) -> PathEnumeration:
    """Exact ``E[exp(-sum F(l))]``, its split by endpoint, and the law of ``D_n``."""
    states = enumerate_states(law, n, cap)
    origin = (0,) * law.d
    total: list[float] = []
    by_end: dict[tuple, list[float]] = {}
    rng_dist: dict[int, list[float]] = {}
    bridge: dict[int, list[float]] = {}
    for (pos, occ), pr in states.items():
        w = pr * math.exp(-math.fsum(F(np.array([c for _, c in occ])).tolist()))
        total.append(w)
        by_end.setdefault(pos, []).append(w)
        rng_dist.setdefault(len(occ), []).append(pr)
        if pos == origin:
            bridge.setdefault(len(occ), []).append(pr)
    fs = lambda d: {k: math.fsum(v) for k, v in sorted(d.items())}
    return PathEnumeration(n, math.fsum(total), fs(by_end), fs(rng_dist), fs(bridge), len(states))


# --- range dynamic program (nearest neighbour with holding on Z) ----------------------

def _nn_probs(law: StepLaw) -> tuple[float, float, float]:
    if law.d != 1 or not law.finite or np.abs(law.points).max() > 1:
        raise ValueError("range_dp supports laws on Z supported in {-1, 0, 1}")
    p = {int(x[0]): q for x, q in zip(law.points, law.probs)}
    return p.get(-1, 0.0), p.get(0, 0.0), p.get(1, 0.0)


@dataclass(frozen=True)
class RangeLaw:
    """Joint law ``P[w, i]`` of range width ``w = D_n - 1`` and offset ``i`` of ``X_n``
    from the left end of the range."""

    n: int
    joint: np.ndarray

    def d_distribution(self) -> np.ndarray:
        """``P(D_n = m)`` at index ``m`` (index 0 unused)."""
        out = np.zeros(self.n + 2)
        out[1:] = self.joint.sum(axis=1)
        return out

    def laplace(self, nu: float) -> float:
        """``E[exp(-nu D_n)]``."""
        dist = self.d_distribution()
        m = np.arange(len(dist))
        return float(np.sum(dist[1:] * np.exp(-nu * m[1:])))

    def expect(self, h: Callable[[np.ndarray], np.ndarray]) -> float:
        dist = self.d_distribution()
        m = np.arange(1, len(dist))
        return float(np.sum(dist[1:] * h(m)))


def range_dp(law: StepLaw, n: int) -> RangeLaw:
    """Exact law of the range of a ``{-1, 0, 1}`` walk via the (width, offset) chain."""
    if not 0 <= n <= 5000:
        raise ValueError("range_dp supports 0 <= n <= 5000")
    pl, ph, pr = _nn_probs(law)
    P = np.zeros((n + 2, n + 2))
    Q = np.zeros_like(P)
    T = np.zeros_like(P)
    P[0, 0] = 1.0
    for k in range(n):
        W = k + 2  # widths 0..k are live; this step can reach k + 1
        cur, new, tmp = P[:W, :W], Q[:W, :W], T[:W, : W - 1]
        idx = np.arange(W - 1)
        np.multiply(cur, ph, out=new)
        np.multiply(cur[:, :-1], pr, out=tmp)
        new[:, 1:] += tmp
        # a right step from offset i == w lands in (w, w + 1); it extends the range to (w + 1, w + 1)
        new[idx + 1, idx + 1] += new[idx, idx + 1]
        new[idx, idx + 1] = 0.0
        np.multiply(cur[:, 1:], pl, out=tmp)
        new[:, :-1] += tmp
        # a left step from offset 0 extends the range on the left
        new[1:, 0] += pl * cur[:-1, 0]
        P, Q = Q, P
    return RangeLaw(n, P[: n + 1, : n + 1])


def _killed_spectrum(pl: float, ph: float, pr: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the walk killed outside ``m`` consecutive sites."""
    if abs(pl - pr) > 1e-15:
        raise ValueError("range oracles need a symmetric law")
    k = np.arange(1, m + 1)
    lam = ph + 2 * pr * np.cos(np.pi * k / (m + 1))
    j = np.arange(1, m + 1)
    V = np.sqrt(2.0 / (m + 1)) * np.sin(np.pi * np.outer(j, k) / (m + 1))
    return lam, V


def confinement_table(law: StepLaw, n: int, wmax: int, bridge: bool) -> np.ndarray:
    """``N[a, b] = P(X_k in [-a, b] for k <= n [, X_n = 0])`` for ``a + b <= wmax``."""
    pl, ph, pr = _nn_probs(law)
    N = np.zeros((wmax + 1, wmax + 1))
    for w in range(wmax + 1):
        m = w + 1
        lam, V = _killed_spectrum(pl, ph, pr, m)
        lamn = lam**n
        if bridge:
            vals = (V**2) @ lamn  # start = end = site a
        else:
            vals = V @ (lamn * V.sum(axis=0))
        a = np.arange(m)
        N[a, w - a] = np.maximum(vals, 0.0)
    return N


def bridge_range_distribution(law: StepLaw, n: int) -> dict[int, float]:
    """``P(D_n = m, X_n = 0)`` by inclusion-exclusion over confinement intervals."""
    N = confinement_table(law, n, n + 1, bridge=True)
    Np = np.zeros((n + 3, n + 3))
    Np[1:, 1:] = N[: n + 2, : n + 2]
    out: dict[int, float] = {}
    for w in range(n + 1):
        a = np.arange(w + 1)
        b = w - a
        ex = Np[a + 1, b + 1] - Np[a, b + 1] - Np[a + 1, b] + Np[a, b]
        out[w + 1] = float(ex.sum())
    return out


def _range_weighted(law: StepLaw, n: int, nu: float, bridge: bool, rel_tol: float = 1e-16) -> float:
    """``E[exp(-nu D_n) (1{X_n = 0})]`` with positive weights only.

    Summation by parts turns the exact-range probabilities into confinement
    probabilities weighted by the second difference of ``exp(-nu m)``, which is
    ``exp(-nu m)(1 - exp(-nu))^2 > 0``; the sum over widths is truncated once
    the remaining tail is provably below ``rel_tol`` of the total.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    pl, ph, pr = _nn_probs(law)
    c2 = (1 - math.exp(-nu)) ** 2
    terms: list[float] = []
    p_end = 1.0
    if bridge:
        lam, V = _killed_spectrum(pl, ph, pr, 2 * n + 1)
        p_end = float((V[n] ** 2) @ lam**n)  # P(X_n = 0): interval wide enough never to bind
    for w in range(0, 10 * n + 200):
        m = w + 1
        lam, V = _killed_spectrum(pl, ph, pr, m)
        lamn = lam**n
        vals = (V**2) @ lamn if bridge else V @ (lamn * V.sum(axis=0))
        terms.append(float(np.maximum(vals, 0.0).sum()) * math.exp(-nu * m) * c2)
        # remaining widths contribute at most p_end * sum_{m' > m} m' e^{-nu m'} c2
        q = math.exp(-nu)
        tail = p_end * c2 * q ** (m + 1) * ((m + 1) - m * q) / (1 - q) ** 2
        total = math.fsum(terms)
        if tail <= rel_tol * total:
            break
    return math.fsum(terms)


def range_laplace_confinement(law: StepLaw, n: int, nu: float) -> float:
    """``E[exp(-nu D_n)]`` through confinement probabilities (independent of :func:`range_dp`)."""
    return _range_weighted(law, n, nu, bridge=False)


def bridge_laplace(law: StepLaw, n: int, nu: float) -> float:
    """``E[exp(-nu D_n) 1{X_n = 0}]`` for a ``{-1, 0, 1}`` walk."""
    pl, ph, pr = _nn_probs(law)
    if n == 0:
        return math.exp(-nu)
    if ph == 0 and n % 2:
        return 0.0
    return _range_weighted(law, n, nu, bridge=True)
