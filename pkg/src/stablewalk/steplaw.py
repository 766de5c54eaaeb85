"""Symmetric step distributions on Z^d: exact pmf, sampling, Fourier transform, diagnostics.

Heavy-tailed one-dimensional marginals have the form ``c (1+|k|)^(-1-alpha)``.
Their tail sums are Hurwitz zeta values, ``sum_{k>m} (1+k)^(-s) = zeta(s, m+2)``,
which gives exact normalizers and an exact inverse-CDF beyond the lookup table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, special

from .dilation import ExponentStructure, _snap_floor, matrix_power

KINDS = ("axis_product", "radial", "lazy_nearest_neighbor", "one_dim_general", "explicit_table")
TABLE_RADIUS = 1 << 18
MAX_JUMP = float(1 << 53)
# measured |lattice sum / integral - 1| over r > R is below 1e-3 for R >= 50
RADIAL_LATTICE_REL_ERR = 1e-3


def hurwitz_tail(s: float, m) -> np.ndarray:
    """``sum_{k>m} (1+k)^(-s)`` for integer ``m >= -1``."""
    return special.zeta(s, np.asarray(m, dtype=float) + 2.0)


def stable_integral(alpha: float) -> float:
    """``int_0^inf (1 - cos u) u^(-1-alpha) du = pi / (2 Gamma(1+alpha) sin(pi alpha/2))``."""
    return math.pi / (2.0 * math.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0))


def _scaled_tail_integrals(s: float, a: float, th: float) -> tuple[float, float]:
    """``int_a^inf w^-s (1 - cos th w) dw`` and ``int_a^inf w^-s sin(th w) dw`` for ``1 < s < 3``.

    Substituting ``v = th w`` keeps the oscillatory quadrature at unit frequency.
    """
    lo = a * th
    f = lambda v: v ** (-s)
    if lo >= 1.0:
        A = lo ** (1.0 - s) / (s - 1.0) - integrate.quad(f, lo, np.inf, weight="cos", wvar=1.0)[0]
        S = integrate.quad(f, lo, np.inf, weight="sin", wvar=1.0)[0]
    else:
        a0, a1, s0, s1 = _unit_frequency_pieces(s)
        if lo > 0.1:
            A = a1 + integrate.quad(lambda v: v ** (-s) * (1 - math.cos(v)), lo, 1.0)[0]
            S = s1 + integrate.quad(lambda v: v ** (-s) * math.sin(v), lo, 1.0)[0]
        else:
            A = a0 + a1 - _head_series(lo, 3.0 - s, (1 / 2, -1 / 24, 1 / 720, -1 / 40320))
            # sin v = v + (sin v - v); the first part integrates in closed form on (lo, 1)
            lin = -math.log(lo) if s == 2.0 else (1.0 - lo ** (2.0 - s)) / (2.0 - s)
            S = s0 + s1 + lin - _head_series(lo, 4.0 - s, (-1 / 6, 1 / 120, -1 / 5040, 1 / 362880))
    scale = th ** (s - 1.0)
    return scale * A, scale * S


def _head_series(x: float, p: float, coefs) -> float:
    """``int_0^x v^(p-1) sum_j coefs[j] v^(2j) dv``."""
    return sum(c * x ** (p + 2 * j) / (p + 2 * j) for j, c in enumerate(coefs))


_UNIT_PIECES: dict[float, tuple[float, float, float, float]] = {}


def _unit_frequency_pieces(s: float) -> tuple[float, float, float, float]:
    """``int_0^1 v^-s (1 - cos v)``, ``int_1^inf v^-s (1 - cos v)``,
    ``int_0^1 v^-s (sin v - v)`` and ``int_1^inf v^-s sin v``."""
    if s not in _UNIT_PIECES:
        def g_cos(v):
            return 2.0 * math.sin(v / 2) ** 2 / v**2 if v > 0 else 0.5

        def g_sin(v):
            if v < 1e-3:
                return -1 / 6 + v * v / 120
            return (math.sin(v) - v) / v**3

        a0 = integrate.quad(g_cos, 0.0, 1.0, weight="alg", wvar=(2.0 - s, 0.0), epsabs=0, epsrel=1e-13)[0]
        s0 = integrate.quad(g_sin, 0.0, 1.0, weight="alg", wvar=(3.0 - s, 0.0), epsabs=0, epsrel=1e-13)[0]
        f = lambda v: v ** (-s)
        a1 = 1.0 / (s - 1.0) - integrate.quad(f, 1.0, np.inf, weight="cos", wvar=1.0)[0]
        s1 = integrate.quad(f, 1.0, np.inf, weight="sin", wvar=1.0)[0]
        _UNIT_PIECES[s] = (a0, a1, s0, s1)
    return _UNIT_PIECES[s]

class PowerTail1D:
    """The law ``c (1+|k|)^(-s)`` on Z with ``s = 1 + alpha``."""

    def __init__(self, alpha: float, table_radius: int = TABLE_RADIUS):
        if not 0 < alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
        self.alpha = float(alpha)
        self.s = 1.0 + self.alpha
        self.c = 1.0 / (2.0 * special.zeta(self.s) - 1.0)
        self.table_radius = int(table_radius)
        self._cdf = None

    def pmf(self, k) -> np.ndarray:
        return self.c * (1.0 + np.abs(np.asarray(k, dtype=float))) ** (-self.s)

    def abs_survival(self, m) -> np.ndarray:
        """``P(|K| > m)``."""
        return 2.0 * self.c * hurwitz_tail(self.s, m)

    @property
    def tail_constant(self) -> float:
        """``C`` with ``pmf(k) ~ C |k|^(-1-alpha)``."""
        return self.c

    @property
    def symbol_scale(self) -> float:
        """Scale ``c'`` of the limit symbol ``c' |xi|^alpha`` under ``B_n = n^(1/alpha)``."""
        return 2.0 * self.c * stable_integral(self.alpha)

    def _table(self) -> np.ndarray:
        if self._cdf is None:
            m = np.arange(self.table_radius + 1, dtype=float)
            w = 2.0 * self.c * (1.0 + m) ** (-self.s)
            w[0] = self.c
            self._cdf = np.cumsum(w)
        return self._cdf

    def sample_abs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cdf = self._table()
        u = rng.random(size)
        out = np.searchsorted(cdf, u, side="right").astype(float)
        tail = out > self.table_radius
        if tail.any():
            # level uniform in (0, P(|K| > R)); |K| = m iff S(m) <= level < S(m-1)
            level = self.abs_survival(self.table_radius) * rng.random(int(tail.sum()))
            out[tail] = self._invert_survival(level)
        return out

    def _invert_survival(self, level: np.ndarray) -> np.ndarray:
        lo = np.full(level.shape, float(self.table_radius))  # S(lo) > level
        hi = np.minimum(MAX_JUMP, 2.0 * np.maximum(
            lo + 1, (level * self.alpha / (2 * self.c)) ** (-1.0 / self.alpha)))
        bad = self.abs_survival(hi) > level
        while bad.any():
            hi[bad] = np.minimum(MAX_JUMP, hi[bad] * 4.0)
            capped = hi >= MAX_JUMP
            bad = (self.abs_survival(hi) > level) & ~capped
        while True:
            gap = hi - lo > 1
            if not gap.any():
                return hi
            mid = np.floor((lo + hi) / 2)
            above = self.abs_survival(mid) > level
            lo = np.where(gap & above, mid, lo)
            hi = np.where(gap & ~above, mid, hi)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        a = self.sample_abs(rng, size)
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return (sign * a).astype(np.int64)

    def char_fn(self, theta, n_terms: int = 1 << 14) -> tuple[np.ndarray, float]:
        """``sum_k pmf(k) cos(k theta)`` and an error bound.

        Direct summation to ``n_terms`` plus the tail ``sum_{k>K} (1+k)^(-s)(1-cos k theta)``
        via the Hurwitz zeta (cosine-free part) and a midpoint integral (cosine part).
        """
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        K = int(n_terms)
        k = np.arange(1, K + 1, dtype=float)
        w = (1.0 + k) ** (-self.s)
        one_minus = np.empty_like(theta)
        err = 0.0
        for j, th in enumerate(theta):
            th = abs(math.remainder(th, 2 * math.pi))
            head = float(np.dot(w, 1.0 - np.cos(k * th)))
            tail = 0.0
            if th != 0.0:
                # midpoint integral of w^-s (1 - cos(th (w - 1))) over w > K + 1.5
                a = K + 1.5
                A, S = _scaled_tail_integrals(self.s, a, th)
                tail = (math.cos(th) * A + (1.0 - math.cos(th)) * a ** (1.0 - self.s) / (self.s - 1.0)
                        - math.sin(th) * S)
                err = max(err, 2 * self.c * (self.s * (K + 1.0) ** (-self.s - 1) + th * (K + 1.0) ** (-self.s)) / 24)
            one_minus[j] = 2.0 * self.c * (head + tail)
        return 1.0 - one_minus, err


@dataclass(frozen=True)
class StepLaw:
    """A symmetric probability measure on Z^d.

    Build instances with :func:`axis_product`, :func:`radial`,
    :func:`lazy_nearest_neighbor`, :func:`one_dim_general` or
    :func:`explicit_table` rather than directly.
    """

    d: int
    kind: str
    params: dict = field(default_factory=dict)
    truncation_radius: int = TABLE_RADIUS
    points: np.ndarray | None = field(default=None, repr=False)
    probs: np.ndarray | None = field(default=None, repr=False)
    _marginals: tuple = field(default=(), repr=False, compare=False)

    # --- structure -----------------------------------------------------
    @property
    def finite(self) -> bool:
        return self.points is not None

    @property
    def normalizer(self) -> float | tuple[float, ...]:
        if self.kind == "axis_product":
            return tuple(m.c for m in self._marginals)
        if self.kind == "radial":
            return self.params["c"]
        return 1.0

    @property
    def support_radius(self) -> int:
        """Largest ``|x|_inf`` in the support (finite laws only)."""
        if not self.finite:
            raise ValueError(f"{self.kind} law has unbounded support")
        return int(np.abs(self.points).max()) if len(self.points) else 0

    def tail_bound(self, R: int | None = None) -> float:
        """Mass outside the box ``|x|_inf <= R`` (the disc ``|x| <= R`` for 2-D radial laws)."""
        R = self.truncation_radius if R is None else R
        if self.finite:
            return float(self.probs[np.abs(self.points).max(axis=1) > R].sum())
        if self.kind == "axis_product":
            return float(np.mean([m.abs_survival(R) for m in self._marginals]))
        if self.kind == "radial" and self.d == 1:
            return float(self._marginals[0].abs_survival(R))
        return _radial_tail_mass(self.params["alpha"], self.d, self.params["c"], R)

    # --- evaluation ----------------------------------------------------
    def pmf(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=np.int64)
        scalar = x.ndim <= 1 and (self.d > 1 or x.ndim == 0)
        x = x.reshape(-1, self.d)
        if self.finite:
            lookup = {tuple(p): q for p, q in zip(self.points.tolist(), self.probs.tolist())}
            out = np.array([lookup.get(tuple(p), 0.0) for p in x.tolist()])
        elif self.kind == "axis_product":
            out = np.zeros(len(x))
            nz = (x != 0).sum(axis=1)
            out[nz == 0] = sum(m.c for m in self._marginals) / self.d
            one = nz == 1
            if one.any():
                axis = np.argmax(x[one] != 0, axis=1)
                vals = x[one][np.arange(one.sum()), axis]
                out[one] = [self._marginals[i].pmf(v) / self.d for i, v in zip(axis, vals)]
        else:
            r = np.linalg.norm(x.astype(float), axis=1)
            out = self.params["c"] * (1.0 + r) ** (-self.d - self.params["alpha"])
        return float(out[0]) if scalar else out

    def sample(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        """``size`` independent steps, shape ``(size, d)``."""
        if self.finite:
            cdf = np.cumsum(self.probs)
            idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
            return self.points[np.minimum(idx, len(cdf) - 1)]
        out = np.zeros((size, self.d), dtype=np.int64)
        if self.kind == "axis_product":
            axes = rng.integers(0, self.d, size) if self.d > 1 else np.zeros(size, dtype=int)
            for i, m in enumerate(self._marginals):
                sel = axes == i
                if sel.any():
                    out[sel, i] = m.sample(rng, int(sel.sum()))
            return out
        if self.d == 1:
            out[:, 0] = self._marginals[0].sample(rng, size)
            return out
        return _radial2d_sample(self, rng, size)

    def sampling_tv_bound(self) -> float:
        """Total-variation distance between :meth:`sample` and :meth:`pmf`."""
        if self.finite:
            return 0.0
        if self.kind == "radial" and self.d > 1:
            return self.tail_bound(self.params["table_radius"])
        # exact inversion up to MAX_JUMP
        return float(np.mean([m.abs_survival(MAX_JUMP) for m in self._marginals]))

    def char_fn(self, xi) -> tuple[np.ndarray, float]:
        """``mu_hat(xi) = sum_x pmf(x) cos<xi, x>`` and a truncation error bound."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if xi.shape[-1] != self.d:
            xi = xi.reshape(-1, self.d)
        if self.finite:
            return np.cos(xi @ self.points.T.astype(float)) @ self.probs, 0.0
        if self.kind == "axis_product" or self.d == 1:
            total = np.zeros(len(xi))
            err = 0.0
            for i, m in enumerate(self._marginals):
                v, e = m.char_fn(xi[:, i])
                total += v
                err = max(err, e)
            return total / self.d, err
        alpha, c, R = self.params["alpha"], self.params["c"], self.params["table_radius"]
        pts, w = _radial_box(alpha, self.d, c, R)
        outside = [_radial2d_outside_char(alpha, c, R, float(np.linalg.norm(v))) for v in xi]
        # outside the ball the lattice sum is replaced by its radial integral
        err = RADIAL_LATTICE_REL_ERR * self.tail_bound(R)
        return np.cos(xi @ pts.T) @ w + np.asarray(outside), err

    def one_dim_marginals(self) -> tuple[PowerTail1D, ...]:
        return self._marginals


# --- constructors -------------------------------------------------------------

def axis_product(alphas: Sequence[float], table_radius: int = TABLE_RADIUS) -> StepLaw:
    """``mu(x) = (1/d) sum_i c(alpha_i) (1+|n|)^(-1-alpha_i)`` for ``x = n e_i``."""
    margs = tuple(PowerTail1D(a, table_radius) for a in alphas)
    return StepLaw(d=len(margs), kind="axis_product", params={"alphas": tuple(float(a) for a in alphas)},
                   truncation_radius=table_radius, _marginals=margs)


def radial(alpha: float, d: int = 1, table_radius: int | None = None) -> StepLaw:
    """``mu(x) = c (1+||x||)^(-d-alpha)``; ``d`` is 1 or 2."""
    if d == 1:
        m = PowerTail1D(alpha, table_radius or TABLE_RADIUS)
        return StepLaw(d=1, kind="radial", params={"alpha": float(alpha), "c": m.c},
                       truncation_radius=m.table_radius, _marginals=(m,))
    if d != 2:
        raise ValueError("radial laws are supported for d = 1, 2")
    R = table_radius or 512
    c = 1.0 / _radial_mass(alpha, d, R)
    return StepLaw(d=2, kind="radial", params={"alpha": float(alpha), "c": c, "table_radius": R},
                   truncation_radius=R)


def lazy_nearest_neighbor(hold: float = 0.5, d: int = 1) -> StepLaw:
    """Stay put with probability ``hold``, else move to one of the ``2d`` neighbours."""
    if not 0 <= hold <= 1:
        raise ValueError(f"hold probability must lie in [0, 1], got {hold}")
    pts = [np.zeros(d, dtype=np.int64)]
    probs = [hold]
    for i in range(d):
        for s in (1, -1):
            e = np.zeros(d, dtype=np.int64)
            e[i] = s
            pts.append(e)
            probs.append((1 - hold) / (2 * d))
    return explicit_table(np.array(pts), np.array(probs), kind="lazy_nearest_neighbor",
                          params={"hold": float(hold)})


def simple_random_walk(d: int = 1) -> StepLaw:
    return lazy_nearest_neighbor(0.0, d)


def point_mass(d: int = 1) -> StepLaw:
    return explicit_table(np.zeros((1, d), dtype=np.int64), np.array([1.0]))


def one_dim_general(z: Sequence[int], p: Sequence[float], p0: float = 0.0) -> StepLaw:
    """``mu = p0 delta_0 + sum_k p_k (delta_{z_k} + delta_{-z_k})``, normalized."""
    z = [int(v) for v in z]
    if any(v <= 0 for v in z):
        raise ValueError("z_k must be positive; the negative half is added by symmetry")
    pts = np.array([0] + z + [-v for v in z], dtype=np.int64).reshape(-1, 1)
    probs = np.array([p0] + list(p) + list(p), dtype=float)
    return explicit_table(pts, probs / probs.sum(), kind="one_dim_general",
                          params={"z": tuple(z)})


def geometric_lacunary(alpha: float, beta: float, n_terms: int | None = None) -> StepLaw:
    """``z_k = floor(2^(beta k))``, ``p_k ∝ 2^(-alpha k)``, ``k >= 1``: never converges in DNOA."""
    n_terms = n_terms or int(60 / beta)
    k = np.arange(1, n_terms + 1)
    return one_dim_general([int(2 ** (beta * j)) for j in k], 2.0 ** (-alpha * k))


def power_lattice(alpha: float, beta: float, n_terms: int = 10_000) -> StepLaw:
    """``z_k = floor(k^beta)``, ``p_k ∝ (1+k)^(-alpha)`` truncated at ``n_terms``."""
    k = np.arange(1, n_terms + 1)
    z = np.floor(k.astype(float) ** beta).astype(np.int64)
    return one_dim_general(z, (1.0 + k) ** (-alpha), p0=1.0)


def explicit_table(points, probs, kind: str = "explicit_table", params: dict | None = None) -> StepLaw:
    points = np.asarray(points, dtype=np.int64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    # merge duplicates, drop zeros
    uniq, inv = np.unique(points, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv.ravel(), probs)
    keep = merged > 0
    uniq, merged = uniq[keep], merged[keep]
    lookup = {tuple(p): q for p, q in zip(uniq.tolist(), merged.tolist())}
    for p, q in lookup.items():
        if lookup.get(tuple(-v for v in p)) != q:
            raise ValueError(f"law is not symmetric at {p}")
    return StepLaw(d=points.shape[1], kind=kind, params=params or {}, truncation_radius=int(np.abs(uniq).max()),
                   points=uniq, probs=merged)


# --- radial d = 2 helpers -------------------------------------------------------

def _radial_box(alpha: float, d: int, c: float, R: int) -> tuple[np.ndarray, np.ndarray]:
    ax = np.arange(-R, R + 1)
    g = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    r = np.linalg.norm(g.astype(float), axis=1)
    keep = r <= R
    return g[keep].astype(float), c * (1.0 + r[keep]) ** (-d - alpha)


def _radial_tail_integral(alpha: float, d: int, R: float) -> float:
    # int_{r>R} (1+r)^(-d-alpha) |S^{d-1}| r^{d-1} dr
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    return area * integrate.quad(lambda r: (1 + r) ** (-d - alpha) * r ** (d - 1), R, np.inf)[0]


def _radial_mass(alpha: float, d: int, R: int) -> float:
    _, w = _radial_box(alpha, d, 1.0, R)
    # the ball r <= R holds about pi R^2 lattice points, so the tail integral starts at R
    return float(w.sum()) + _radial_tail_integral(alpha, d, R)


def _radial_tail_mass(alpha: float, d: int, c: float, R: int) -> float:
    return c * _radial_tail_integral(alpha, d, R)


def _radial2d_outside_char(alpha: float, c: float, R: int, rho: float) -> float:
    """``c 2 pi int_R^inf (1+r)^(-2-alpha) r J0(rho r) dr``: the part of ``mu_hat`` from ``|x| > R``.

    Beyond ``x = rho r = 1e4`` the two-term Hankel expansion of ``J0`` is integrated
    with a Fourier-weighted rule; below it Gauss-Legendre panels are at most a
    quarter period (or a tenth of the radius) long.
    """
    f = lambda r: (1.0 + r) ** (-2.0 - alpha) * r
    if rho == 0.0:
        return c * _radial_tail_integral(alpha, 2, R)
    r1 = max(float(R), 1e4 / rho)
    edges = [float(R)]
    while edges[-1] < r1:
        edges.append(min(r1, edges[-1] + min(0.1 * edges[-1], 0.5 * math.pi / rho)))
    edges = np.asarray(edges)
    x, w = np.polynomial.legendre.leggauss(16)
    mid, half = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    r = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ww = (half[:, None] * w[None, :]).ravel()
    head = float(np.dot(ww, f(r) * special.j0(rho * r)))
    # J0(x) ~ sqrt(2/(pi x)) [cos(x - pi/4) + sin(x - pi/4) / (8x)]
    amp = lambda r: f(r) * math.sqrt(2.0 / (math.pi * rho * r))
    g_cos = lambda r: amp(r) * (1.0 - 1.0 / (8 * rho * r))
    g_sin = lambda r: amp(r) * (1.0 + 1.0 / (8 * rho * r))
    q = 1.0 / math.sqrt(2.0)
    tail = q * (integrate.quad(g_cos, r1, np.inf, weight="cos", wvar=rho)[0]
                + integrate.quad(g_sin, r1, np.inf, weight="sin", wvar=rho)[0])
    return 2 * math.pi * c * (head + tail)


_RADIAL_CACHE: dict = {}


def _radial2d_sample(law: StepLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    alpha, c, R = law.params["alpha"], law.params["c"], law.params["table_radius"]
    key = (alpha, R)
    if key not in _RADIAL_CACHE:
        pts, w = _radial_box(alpha, 2, c, R)
        _RADIAL_CACHE[key] = (pts.astype(np.int64), np.cumsum(w))
    pts, cdf = _RADIAL_CACHE[key]
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    out = np.empty((size, 2), dtype=np.int64)
    inside = idx < len(pts)
    out[inside] = pts[idx[inside]]
    n_out = int((~inside).sum())
    if n_out:
        # continuous polar approximation beyond the table; its error is sampling_tv_bound()
        v = rng.random(n_out)
        r = (1 + R) * v ** (-1.0 / alpha) - 1
        phi = rng.random(n_out) * 2 * math.pi
        out[~inside] = np.rint(np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)).astype(np.int64)
    return out


# --- diagnostics ----------------------------------------------------------------

@dataclass(frozen=True)
class MomentReport:
    alpha: float
    weak_moment: float
    s_grid: np.ndarray
    values: np.ndarray
    tail_limit: float


def _l1_survival(law: StepLaw, m: np.ndarray) -> np.ndarray:
    """``mu(|x|_1 > m)``."""
    m = np.asarray(m, dtype=float)
    if law.finite:
        l1 = np.abs(law.points).sum(axis=1)
        return np.array([law.probs[l1 > v].sum() for v in m.ravel()]).reshape(m.shape)
    if law.kind == "axis_product" or law.d == 1:
        return np.mean([mg.abs_survival(np.floor(m)) for mg in law.one_dim_marginals()], axis=0)
    raise NotImplementedError("weak moments of radial laws are supported for d = 1")


def weak_moment(law: StepLaw, alpha: float, s_grid: Iterable[float] | None = None) -> MomentReport:
    """``W(rho_alpha, mu) = sup_s s mu(rho_alpha > s)`` with ``rho_alpha(x) = (1+|x|_1)^alpha``.

    The grid supremum is combined with the analytic ``s -> inf`` limit of
    ``s mu(rho_alpha > s)``; a tail heavier than the test function gives ``inf``.
    """
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    s = np.asarray(list(s_grid) if s_grid is not None else np.logspace(0, 12, 241), dtype=float)
    m = np.maximum(s ** (1.0 / alpha) - 1.0, -0.5)
    vals = s * _l1_survival(law, m)
    if law.finite:
        tail_limit = 0.0
    else:
        law_alphas = [mg.alpha for mg in law.one_dim_marginals()]
        worst = min(law_alphas)
        if alpha > worst + 1e-12:
            tail_limit = math.inf
        elif abs(alpha - worst) <= 1e-12:
            tail_limit = sum(2 * mg.c / mg.alpha for mg in law.one_dim_marginals()
                             if abs(mg.alpha - worst) <= 1e-12) / len(law_alphas)
        else:
            tail_limit = 0.0
    W = max(float(vals.max(initial=0.0)), tail_limit)
    return MomentReport(alpha=alpha, weak_moment=W, s_grid=s, values=vals, tail_limit=tail_limit)


@dataclass(frozen=True)
class DirectionSet:
    """Finite union of closed cones ``{theta: angle(theta, center) <= half_angle}``."""

    cones: tuple[tuple[tuple[float, ...], float], ...] = ()

    @classmethod
    def of(cls, *cones) -> "DirectionSet":
        out = []
        for center, half in cones:
            v = np.asarray(center, dtype=float)
            out.append((tuple(v / np.linalg.norm(v)), float(half)))
        return cls(tuple(out))

    def contains(self, theta: np.ndarray) -> np.ndarray:
        theta = np.atleast_2d(theta)
        hit = np.zeros(len(theta), dtype=bool)
        for center, half in self.cones:
            cosang = np.clip(theta @ np.asarray(center), -1.0, 1.0)
            hit |= cosang >= math.cos(half) - 1e-12
        return hit


@dataclass(frozen=True)
class DoaReport:
    t_grid: np.ndarray
    values: np.ndarray
    limit_estimate: float
    dispersion: float
    first_quartile_dispersion: float


def _polar_radius(es: ExponentStructure, x: np.ndarray) -> np.ndarray:
    """``s`` with ``|| s^(-E) x || = 1``."""
    w, V = es.eigen
    y = (x @ V) ** 2
    logs = np.zeros(len(x))
    lo, hi = np.full(len(x), -200.0), np.full(len(x), 200.0)
    for _ in range(200):
        logs = (lo + hi) / 2
        norm2 = (y * np.exp(-2 * np.outer(logs, w))).sum(axis=1)
        big = norm2 > 1
        lo = np.where(big, logs, lo)
        hi = np.where(big, hi, logs)
    return np.exp(logs)


def _spread(v: np.ndarray) -> float:
    m = float(np.mean(v))
    return float((v.max() - v.min()) / m) if m > 0 else 0.0


def doa_diagnostic(law: StepLaw, es: ExponentStructure, omega: DirectionSet,
                   t_grid: Sequence[float]) -> DoaReport:
    """``t mu({s^E x : x in omega, s > t})`` along ``t_grid``.

    In the domain of normal attraction these values converge to ``M(omega)``.
    ``dispersion`` is the relative spread over the last quartile of the grid.
    """
    t = np.asarray(t_grid, dtype=float)
    vals = np.zeros(len(t))
    if omega.cones:
        if law.finite:
            nz = np.any(law.points != 0, axis=1)
            x = law.points[nz].astype(float)
            p = law.probs[nz]
            s = _polar_radius(es, x)
            theta = np.stack([matrix_power(es, 1.0 / si) @ xi for si, xi in zip(s, x)])
            inside = omega.contains(theta)
            vals = np.array([tt * p[inside & (s > tt)].sum() for tt in t])
        elif law.kind == "axis_product" or law.d == 1:
            if not es.is_diagonal:
                raise NotImplementedError("axis laws require a diagonal exponent")
            e_diag = np.diag(es.E)
            for i, mg in enumerate(law.one_dim_marginals()):
                for sign in (1.0, -1.0):
                    e = np.zeros(law.d)
                    e[i] = sign
                    if omega.contains(e)[0]:
                        # |k| e_i = s^E e_i with s = |k|^(1/E_ii); s > t  <=>  |k| > t^E_ii
                        m = _snap_floor(t ** e_diag[i])
                        vals += t * mg.c * hurwitz_tail(mg.s, m) / law.d
        else:
            raise NotImplementedError("doa_diagnostic supports finite and axis laws")
    q = max(1, len(t) // 4)
    return DoaReport(t_grid=t, values=vals, limit_estimate=float(np.mean(vals[-q:])),
                     dispersion=_spread(vals[-q:]), first_quartile_dispersion=_spread(vals[:q]))
