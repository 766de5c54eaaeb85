"""Operator-stable limit laws: symbol, density, Dirichlet form, and the local limit check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special

from . import steplaw as sl
from .dilation import ExponentStructure, NormalizationSequence, build_Bn, matrix_power

TRUNC_LEVEL = 1e-12
QUAD_RTOL = 1e-8


class EnlargeFrequencyBox(RuntimeError):
    """``exp(-t Theta)`` does not decay below the target on the frequency box."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralMeasure:
    """Symmetric finite measure on the unit sphere: atoms, or uniform with total ``mass``."""

    d: int
    directions: np.ndarray | None = None
    weights: np.ndarray | None = None
    uniform_mass: float | None = None

    def __post_init__(self):
        if self.uniform_mass is not None:
            if self.uniform_mass <= 0:
                raise ValueError("uniform sphere mass must be positive")
            return
        Y = np.atleast_2d(np.asarray(self.directions, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if Y.shape != (len(w), self.d) or np.any(w < 0):
            raise ValueError("atoms need unit directions of dimension d and nonnegative weights")
        Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
        for y, lam in zip(Y, w):
            partner = np.all(np.isclose(Y, -y, atol=1e-12), axis=1)
            if not np.any(partner & np.isclose(w, lam, rtol=1e-12)):
                raise ValueError(f"spectral measure is not symmetric at direction {y}")
        object.__setattr__(self, "directions", Y)
        object.__setattr__(self, "weights", w)

    @classmethod
    def atoms(cls, directions, weights, symmetrize: bool = True) -> "SpectralMeasure":
        Y = np.atleast_2d(np.asarray(directions, dtype=float))
        w = np.asarray(weights, dtype=float)
        if symmetrize:
            Y, w = np.vstack([Y, -Y]), np.concatenate([w, w])
        return cls(d=Y.shape[1], directions=Y, weights=w)

    @classmethod
    def uniform_sphere(cls, d: int, mass: float) -> "SpectralMeasure":
        return cls(d=d, uniform_mass=float(mass))

    @property
    def spans(self) -> bool:
        if self.uniform_mass is not None:
            return True
        return np.linalg.matrix_rank(self.directions[self.weights > 0]) == self.d


def _abs_moment_sphere(alpha: float, d: int) -> float:
    """``E|y_1|^alpha`` for ``y`` uniform on the unit sphere of R^d."""
    return math.gamma((alpha + 1) / 2) * math.gamma(d / 2) / (math.sqrt(math.pi) * math.gamma((alpha + d) / 2))


@dataclass(frozen=True)
class LimitLaw:
    """Strictly operator-stable law with ``eta_hat = exp(-Theta)``.

    ``Theta(xi) = int_S int_0^inf (1 - cos<xi, r^E y>) dr/r^2 M(dy) + <Q xi, xi>/2``.
    """

    exponent: ExponentStructure
    M: SpectralMeasure | None = None
    gaussian_Q: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.M is None and self.gaussian_Q is None:
            raise ValueError("a limit law needs a spectral measure or a Gaussian part")
        if self.gaussian_Q is not None:
            Q = np.atleast_2d(np.asarray(self.gaussian_Q, dtype=float))
            if Q.shape != (self.d, self.d) or np.any(np.linalg.eigvalsh(Q) < -1e-14):
                raise ValueError("gaussian_Q must be a d x d PSD matrix")
            object.__setattr__(self, "gaussian_Q", Q)

    @property
    def d(self) -> int:
        return self.exponent.d

    # --- convenient families -----------------------------------------
    @classmethod
    def axis_stable(cls, alphas: Sequence[float], scales: Sequence[float]) -> "LimitLaw":
        """``Theta(xi) = sum_i scales[i] |xi_i|^alphas[i]``; ``alpha_i = 2`` goes to the Gaussian part."""
        d = len(alphas)
        es = ExponentStructure.diagonal(alphas)
        dirs, wts = [], []
        Q = np.zeros((d, d))
        for i, (a, c) in enumerate(zip(alphas, scales)):
            if a == 2:
                Q[i, i] = 2.0 * c
            else:
                e = np.zeros(d)
                e[i] = 1.0
                dirs.append(e)
                wts.append(c / (2.0 * a * sl.stable_integral(a)))
        M = SpectralMeasure.atoms(dirs, wts) if dirs else None
        return cls(es, M, Q if np.any(Q) else None)

    @classmethod
    def isotropic(cls, alpha: float, d: int, scale: float = 1.0) -> "LimitLaw":
        """``Theta(xi) = scale ||xi||^alpha``."""
        es = ExponentStructure.diagonal([alpha] * d)
        if alpha == 2:
            return cls(es, None, 2.0 * scale * np.eye(d))
        if d == 1:
            return cls.axis_stable([alpha], [scale])
        mass = scale / (alpha * sl.stable_integral(alpha) * _abs_moment_sphere(alpha, d))
        return cls(es, SpectralMeasure.uniform_sphere(d, mass))

    # --- structure used by the solvers -----------------------------------
    def axis_terms(self) -> list[list[tuple[float, float]]] | None:
        """Per-axis ``[(coef, power)]`` when ``Theta(xi) = sum_i sum coef |xi_i|^power``, else None."""
        if not self.exponent.is_diagonal:
            return None
        if self.gaussian_Q is not None and not np.allclose(self.gaussian_Q, np.diag(np.diag(self.gaussian_Q))):
            return None
        if self.M is not None and self.M.uniform_mass is not None and self.d > 1:
            return None
        terms = [[] for _ in range(self.d)]
        e_diag = np.diag(self.exponent.E)
        if self.M is not None:
            if self.M.uniform_mass is not None:
                a = 1.0 / e_diag[0]
                terms[0].append((self.M.uniform_mass * a * sl.stable_integral(a), a))
            else:
                for y, lam in zip(self.M.directions, self.M.weights):
                    nz = np.flatnonzero(np.abs(y) > 1e-14)
                    if len(nz) != 1:
                        return None
                    i = int(nz[0])
                    a = 1.0 / e_diag[i]
                    terms[i].append((lam * a * sl.stable_integral(a), a))
        if self.gaussian_Q is not None:
            for i in range(self.d):
                if self.gaussian_Q[i, i] > 0:
                    terms[i].append((self.gaussian_Q[i, i] / 2.0, 2.0))
        return [_merge_terms(t) for t in terms]

    def radial_terms(self) -> list[tuple[float, float]] | None:
        """``[(coef, power)]`` when ``Theta(xi) = sum coef ||xi||^power``, else None."""
        if self.d == 1:
            return self.axis_terms()[0]
        w = np.diag(self.exponent.E)
        if not (self.exponent.is_diagonal and np.allclose(w, w[0])):
            return None
        out = []
        if self.M is not None:
            if self.M.uniform_mass is None:
                return None
            a = 1.0 / w[0]
            out.append((self.M.uniform_mass * a * sl.stable_integral(a) * _abs_moment_sphere(a, self.d), a))
        if self.gaussian_Q is not None:
            q = self.gaussian_Q[0, 0]
            if not np.allclose(self.gaussian_Q, q * np.eye(self.d)):
                return None
            out.append((q / 2.0, 2.0))
        return _merge_terms(out)

    def is_isotropic(self) -> bool:
        return self.radial_terms() is not None


def _merge_terms(terms):
    merged: dict[float, float] = {}
    for c, p in terms:
        merged[p] = merged.get(p, 0.0) + c
    return [(c, p) for p, c in sorted(merged.items())]


# --- symbol ----------------------------------------------------------------------

def _atom_radial_integral(es: ExponentStructure, xi: np.ndarray, y: np.ndarray) -> float:
    """``int_0^inf (1 - cos phi(r)) r^(-2) dr`` with ``phi(r) = <xi, r^E y> = sum_j a_j r^(w_j)``.

    Three pieces: a smooth head where ``|phi| <= 1`` (quadrature in ``log r``),
    Gauss-Legendre panels spanning at most a quarter period up to ``R``, and the
    tail ``1/R + sin phi(R) / (phi'(R) R^2)`` from one integration by parts.
    """
    w, V = es.eigen
    a = (V.T @ xi) * (V.T @ y)
    keep = np.abs(a) > 0
    if not keep.any():
        return 0.0
    a, w = a[keep], w[keep]
    phi = lambda r: np.power.outer(r, w) @ a
    dphi = lambda r: np.power.outer(r, w - 1) @ (a * w)
    absum = lambda r: np.power.outer(r, w) @ np.abs(a)

    lo, hi = -800.0, 800.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if absum(math.exp(mid)) < 1 else (lo, mid)
    r0 = math.exp(hi)

    def head(u):
        r = math.exp(u)
        return 0.0 if r == 0.0 else 2.0 * math.sin(float(phi(r)) / 2) ** 2 / r
    val, err = integrate.quad(head, -np.inf, math.log(r0), limit=200, epsrel=QUAD_RTOL, epsabs=0.0)

    # R: the top power dominates phi' and the integration-by-parts remainder is negligible
    top = int(np.argmax(w))
    tol = QUAD_RTOL / r0
    R = 2.0 * r0
    for _ in range(400):
        d1 = float(dphi(R))
        lead = abs(a[top]) * w[top] * R ** (w[top] - 1)
        if abs(d1) >= 0.5 * lead and 4.0 * (1 + w[top]) / (d1 * d1 * R**3) <= tol:
            break
        R *= 1.25
    else:
        raise QuadratureError("no tail radius found for the spectral integral")
    bound_slope = lambda r: np.power.outer(r, w - 1) @ (np.abs(a) * w)
    edges = [r0]
    while edges[-1] < R:
        r = edges[-1]
        D = max(float(bound_slope(r)), float(bound_slope(1.25 * r)))
        edges.append(min(R, r + min(0.25 * r, 0.5 * math.pi / max(D, 1e-300))))
    edges = np.asarray(edges)
    x, wq = np.polynomial.legendre.leggauss(16)
    mid, half = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    rr = (mid[:, None] + half[:, None] * x).ravel()
    ww = (half[:, None] * wq).ravel()
    val += float(np.dot(ww, 2.0 * np.sin(phi(rr) / 2) ** 2 / rr**2))
    val += 1.0 / R + math.sin(float(phi(R))) / (float(dphi(R)) * R * R)
    if err > 1e-6 * max(val, 1e-300):
        raise QuadratureError(f"radial quadrature reached only {err:.2e} absolute error")
    return val


def symbol(ll: LimitLaw, xi) -> np.ndarray | float:
    """``Theta(xi)`` for one frequency (shape ``(d,)``) or many (shape ``(N, d)``)."""
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 0 or (ll.d > 1 and xi.ndim == 1)
    X = xi.reshape(-1, ll.d)
    out = np.zeros(len(X))
    terms = ll.axis_terms()
    rad = ll.radial_terms() if terms is None else None
    if terms is not None:
        for i, tl in enumerate(terms):
            ax = np.abs(X[:, i])
            for c, p in tl:
                out += c * ax**p
    elif rad is not None:
        nrm = np.linalg.norm(X, axis=1)
        for c, p in rad:
            out += c * nrm**p
    else:
        out = _symbol_general(ll, X)
    return float(out[0]) if single else out


def _theta_at(ll: LimitLaw, v) -> float:
    return float(np.ravel(symbol(ll, np.asarray(v, dtype=float).reshape(1, -1)))[0])


def _symbol_general(ll: LimitLaw, X: np.ndarray) -> np.ndarray:
    es = ll.exponent
    w, V = es.eigen
    out = np.zeros(len(X))
    if ll.M is not None:
        if ll.M.uniform_mass is not None:
            if ll.d != 2:
                raise NotImplementedError("non-isotropic uniform spectral measures are supported for d = 2")
            phi, wq = np.polynomial.legendre.leggauss(128)
            phi = math.pi * (phi + 1)
            wq = wq * math.pi
            Y = np.stack([np.cos(phi), np.sin(phi)], axis=1)
            dirs, wts = Y, wq * ll.M.uniform_mass / (2 * math.pi)
        else:
            dirs, wts = ll.M.directions, ll.M.weights
        for y, lam in zip(dirs, wts):
            if lam == 0:
                continue
            coords = V.T @ y
            nz = np.flatnonzero(np.abs(coords) > 1e-12)
            if len(np.unique(np.round(w[nz], 12))) == 1:
                # y lies in one eigenspace: r^E y = r^(1/a) y
                a = 1.0 / w[nz[0]]
                out += lam * a * sl.stable_integral(a) * np.abs(X @ y) ** a
            else:
                out += lam * np.array([_atom_radial_integral(es, x, y) for x in X])
    if ll.gaussian_Q is not None:
        out += 0.5 * np.einsum("ni,ij,nj->n", X, ll.gaussian_Q, X)
    return out


# --- density ----------------------------------------------------------------------

def _gl_panels(a: float, b: float, n_panels: int, order: int = 16, graded: bool = False):
    x0, w0 = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    if graded:
        # geometric refinement of the first panel toward a (kink of |xi|^alpha at 0)
        h = edges[1] - edges[0]
        extra = a + h * 2.0 ** -np.arange(30, 0, -1)
        edges = np.concatenate([[a], extra, edges[1:]])
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (lo + hi) / 2 + (hi - lo) / 2 * x0
    weights = (hi - lo) / 2 * w0
    return nodes.ravel(), weights.ravel()


def frequency_box(ll: LimitLaw, t: float = 1.0, level: float = TRUNC_LEVEL) -> np.ndarray:
    """Half-widths ``Xi_i`` with ``exp(-t Theta) < level`` on the box boundary."""
    target = -math.log(level)
    half = np.zeros(ll.d)
    for i in range(ll.d):
        e = np.zeros(ll.d)
        hi = 1.0
        for _ in range(200):
            e[i] = hi
            if t * _theta_at(ll, e) >= target:
                break
            hi *= 2
        else:
            raise EnlargeFrequencyBox(f"symbol does not grow along axis {i}")
        lo = hi / 2 if hi > 1 else 0.0
        for _ in range(60):
            mid = (lo + hi) / 2
            e[i] = mid
            if t * _theta_at(ll, e) >= target:
                hi = mid
            else:
                lo = mid
        half[i] = hi
    if ll.d > 1:
        for _ in range(40):
            g = np.linspace(-1, 1, 41)
            faces = []
            for i in range(ll.d):
                pts = np.stack(np.meshgrid(*([g] * ll.d), indexing="ij"), -1).reshape(-1, ll.d)
                for s in (-1, 1):
                    p = pts.copy()
                    p[:, i] = s
                    faces.append(p * half)
            bmax = np.exp(-t * symbol(ll, np.vstack(faces))).max()
            if bmax < level:
                break
            half *= 1.5
        else:
            raise EnlargeFrequencyBox("exp(-Theta) does not decay on the frequency box boundary")
    return half


def density(ll: LimitLaw, x, t: float = 1.0, return_error: bool = False):
    """``g_t(x) = (2 pi)^-d int cos<xi, x> exp(-t Theta(xi)) d xi`` on a truncated box."""
    if t <= 0:
        raise ValueError("density requires t > 0")
    x = np.asarray(x, dtype=float)
    X = x.reshape(-1, ll.d)
    half = frequency_box(ll, t)
    xmax = float(np.abs(X).max(initial=0.0))
    nodes_1d = []
    for i in range(ll.d):
        n_panels = int(max(8, math.ceil(half[i] * (1.0 + xmax) / 2.0)))
        if ll.d > 1:
            n_panels = min(n_panels, 64)
        pos, wpos = _gl_panels(0.0, half[i], n_panels, graded=True)
        nodes_1d.append((np.concatenate([-pos[::-1], pos]), np.concatenate([wpos[::-1], wpos])))
    if ll.d == 1:
        xi, w = nodes_1d[0]
        f = np.exp(-t * symbol(ll, xi[:, None]))
        vals = (np.cos(np.outer(X[:, 0], xi)) * f) @ w / (2 * math.pi)
    else:
        grids = np.meshgrid(*[n for n, _ in nodes_1d], indexing="ij")
        W = np.ones_like(grids[0])
        for i, (_, w1) in enumerate(nodes_1d):
            shape = [1] * ll.d
            shape[i] = -1
            W = W * w1.reshape(shape)
        XI = np.stack([g.ravel() for g in grids], axis=1)
        fw = np.exp(-t * symbol(ll, XI)) * W.ravel()
        vals = np.array([np.cos(XI @ xx) @ fw for xx in X]) / (2 * math.pi) ** ll.d
    vals = np.maximum(vals, 0.0)
    point_axis = ll.d > 1 or (x.ndim >= 2 and x.shape[-1] == 1)
    out = vals.reshape(x.shape[:-1] if point_axis else x.shape) if x.ndim else float(vals[0])
    if return_error:
        vol = float(np.prod(2 * half))
        return out, TRUNC_LEVEL * vol / (2 * math.pi) ** ll.d
    return out


# --- exact convolution powers ----------------------------------------------------

@dataclass(frozen=True)
class ConvolutionTable:
    """``mu^(n)`` on the box ``[-half, half]^d``; ``values[x + half]``.

    With ``wrapped`` set the table is the law of the walk on the torus
    ``(Z / L)^d`` with ``L = 2 half + 1`` (mass that left the box is folded back).
    """

    n: int
    half: int
    values: np.ndarray
    wrapped: bool
    escape_estimate: float

    def at(self, x) -> float:
        idx = tuple(np.asarray(x, dtype=int).reshape(-1) + self.half)
        return float(self.values[idx])

    @property
    def mass(self) -> float:
        return float(self.values.sum())


def periodized_pmf(law: sl.StepLaw, half: int) -> np.ndarray:
    """``sum_k mu(x + k L)`` on the centered box, ``L = 2 half + 1``."""
    L = 2 * half + 1
    d = law.d
    out = np.zeros((L,) * d)
    if law.finite:
        idx = np.mod(law.points + half, L)
        np.add.at(out, tuple(idx.T), law.probs)
        return out
    if law.kind == "axis_product" or d == 1:
        r = np.arange(L, dtype=float)
        for i, mg in enumerate(law.one_dim_marginals()):
            s = mg.s
            wrapped = mg.c * L ** (-s) * (special.zeta(s, (1 + r) / L) + special.zeta(s, (1 + L - r) / L))
            line = np.roll(wrapped, half)  # residue 0 -> centered index half
            sl_ = [half] * d
            sl_[i] = slice(None)
            out[tuple(sl_)] += line / d
        return out
    pts, w = sl._radial_box(law.params["alpha"], d, law.params["c"], law.params["table_radius"])
    idx = np.mod(pts.astype(np.int64) + half, L)
    np.add.at(out, tuple(idx.T), w)
    return out


def _flip(v: np.ndarray) -> np.ndarray:
    return v[(slice(None, None, -1),) * v.ndim]


def convolution_power(law: sl.StepLaw, n: int, half: int) -> ConvolutionTable:
    """``mu^(n)`` by DFT on the box of half-width ``half``; wrap-around is flagged."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    L = 2 * half + 1
    p = periodized_pmf(law, half)
    if n == 0:
        v = np.zeros_like(p)
        v[(half,) * law.d] = 1.0
        return ConvolutionTable(0, half, v, False, 0.0)
    if law.finite:
        reach = law.support_radius * n
        if reach <= half:
            escape = 0.0
        else:
            var = float((law.probs[:, None] * law.points.astype(float) ** 2).sum(axis=0).max())
            escape = min(1.0, law.d * n * var / half**2) if var > 0 else 0.0
    else:
        escape = min(1.0, n * law.tail_bound(half))
    P = np.fft.fftn(np.fft.ifftshift(p)).real
    v = np.fft.fftshift(np.fft.ifftn(P**n).real)
    v = (v + _flip(v)) / 2
    return ConvolutionTable(n, half, v, escape > 1e-9, escape)


def direct_convolution(law: sl.StepLaw, n: int) -> dict[tuple, float]:
    """``mu^(n)`` by repeated sparse convolution (finite laws; brute-force oracle)."""
    cur = {(0,) * law.d: 1.0}
    steps = [(tuple(p), q) for p, q in zip(law.points.tolist(), law.probs.tolist())]
    for _ in range(n):
        nxt: dict[tuple, float] = {}
        for x, px in cur.items():
            for s, q in steps:
                y = tuple(a + b for a, b in zip(x, s))
                nxt[y] = nxt.get(y, 0.0) + px * q
        cur = nxt
    return cur


# --- local limit theorem -------------------------------------------------------------

@dataclass(frozen=True)
class LltResult:
    n: int
    error: float
    half: int
    det_Bn: int
    wrapped: bool
    alias_bound: float


def attracting_limit(law: sl.StepLaw) -> tuple[LimitLaw, NormalizationSequence]:
    """The limit law and ``B_n = floor(n^E)`` for the shipped step-law families."""
    if law.kind == "lazy_nearest_neighbor":
        var = (1 - law.params["hold"]) / law.d
        ll = LimitLaw.axis_stable([2.0] * law.d, [var / 2] * law.d)
    elif law.kind in ("axis_product",) or (law.kind == "radial" and law.d == 1):
        margs = law.one_dim_marginals()
        ll = LimitLaw.axis_stable([m.alpha for m in margs], [m.symbol_scale / law.d for m in margs])
    else:
        raise NotImplementedError(f"no shipped limit for {law.kind} in d={law.d}")
    return ll, NormalizationSequence(ll.exponent)


def llt_error(law: sl.StepLaw, ll: LimitLaw, ns: NormalizationSequence, n: int,
              box_factor: float = 8.0) -> LltResult:
    """``sup_x | det(B_n) mu^(n)(x) - g(B_n^-1 x) |`` on a torus box.

    Both terms are periodized over the same box of half-width about
    ``box_factor`` typical displacements, so folded-back mass cancels to
    leading order; the limit density is periodized exactly by Poisson
    summation over the box frequencies.
    """
    if n < 8:
        raise ValueError("llt_error requires n >= 8")
    Bn = build_Bn(ns, n)
    B = Bn.matrix.astype(float)
    spread = []
    for i in range(ll.d):
        e = np.zeros(ll.d)
        e[i] = 1.0
        spread.append(np.abs(B[:, i]).sum() * max(1.0, _theta_at(ll, e) ** ll.exponent.E[i, i]))
    half = int(math.ceil(box_factor * max(spread)))
    if law.finite:
        half = max(half, law.support_radius)
    table = convolution_power(law, n, half)
    L = 2 * half + 1
    freqs = 2 * math.pi * np.fft.fftfreq(L)
    grids = np.meshgrid(*([freqs] * ll.d), indexing="ij")
    omega = np.stack([g.ravel() for g in grids], axis=1)
    ghat = np.exp(-symbol(ll, omega @ B)).reshape((L,) * ll.d)
    g_per = np.fft.fftshift(np.fft.ifftn(ghat).real)
    err = float(np.abs(abs(Bn.det) * (table.values - g_per)).max())
    edge = np.full(ll.d, math.pi)
    alias = float(np.exp(-symbol(ll, (edge @ B)[None, :]))[0]) * abs(Bn.det)
    return LltResult(n=n, error=err, half=half, det_Bn=Bn.det, wrapped=table.wrapped, alias_bound=alias)


# --- Dirichlet form ----------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Quadrature nodes ``(N, d)`` and weights ``(N,)`` on frequency space."""

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def tensor(cls, half_widths: Sequence[float], panels_per_unit: float = 2.0, order: int = 16) -> "FrequencyGrid":
        axes = []
        for h in half_widths:
            npan = max(4, int(math.ceil(2 * h * panels_per_unit)))
            axes.append(_gl_panels(-h, h, npan, order))
        grids = np.meshgrid(*[a for a, _ in axes], indexing="ij")
        wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
        return cls(nodes, weights)


def dirichlet_form(ll: LimitLaw, fhat: np.ndarray, grid: FrequencyGrid) -> float:
    """``E(f, f) = (2 pi)^-d int |f_hat|^2 Theta`` (Plancherel form of the jump-kernel energy)."""
    fhat = np.asarray(fhat)
    if not np.any(fhat):
        return 0.0
    th = symbol(ll, grid.nodes)
    return float(np.sum(grid.weights * np.abs(fhat) ** 2 * th) / (2 * math.pi) ** ll.d)
