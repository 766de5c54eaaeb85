"""Scaling sequences, principal Dirichlet eigenvalues of stable generators and limit constants."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, linalg, optimize, special

from .dilation import NormalizationSequence, build_Bn
from .occupation import ProfileF
from .stablelaw import LimitLaw, _gl_panels, symbol

# --- scaling sequence a_n -------------------------------------------------------------


class OutsideGammaClass(ValueError):
    pass


@dataclass(frozen=True)
class ScalingSolution:
    """``a_n``: largest integer ``a`` in ``[1, n]`` with ``a det(B_a) F(n / det(B_a)) / n <= 1``.

    ``Ftilde_at_1`` is 1 by construction of the normalization.  ``a_real`` solves
    the same equation with ``det(B_a)`` replaced by ``a**tau``.
    """

    F: ProfileF
    ns: NormalizationSequence
    gamma: float
    kappa: float
    tau: float
    Ftilde_at_1: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def det(self, a: int) -> int:
        if a not in self._cache:
            self._cache[a] = abs(build_Bn(self.ns, a).det)
        return self._cache[a]

    def lhs(self, a: int, n: int) -> float:
        D = self.det(a)
        return a * D * float(self.F(n / D)) / n

    def a(self, n: int) -> int:
        if n < 1:
            raise ValueError("n must be >= 1")
        if self.lhs(1, n) > 1:
            raise OutsideGammaClass("F outside gamma-class for this B_n: no root in [1, n]")
        if self.lhs(n, n) <= 1:
            if self.gamma < 1:
                raise OutsideGammaClass("F outside gamma-class for this B_n: no root in [1, n]")
            return n
        lo, hi = 1, n  # lhs(lo) <= 1 < lhs(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.lhs(mid, n) <= 1:
                lo = mid
            else:
                hi = mid
        return lo

    def lhs_real(self, a: float, n: float) -> float:
        D = a**self.tau
        return a * D * float(self.F(n / D)) / n

    def a_real(self, n: float) -> float:
        if self.F.kind in ("power", "indicator"):
            nu = self.F.params["nu"]
            return (n ** (1 - self.gamma) / nu) ** (1 / (1 + self.tau * (1 - self.gamma)))
        f = lambda u: math.log(self.lhs_real(math.exp(u), n))
        return math.exp(optimize.brentq(f, 0.0, math.log(n), xtol=1e-14, rtol=1e-15))

    def log_ratio(self, n: int) -> float:
        """``log a_n / log n``."""
        return math.log(self.a(n)) / math.log(n)


def solve_scaling(F: ProfileF, ns: NormalizationSequence) -> ScalingSolution:
    if F.kind not in ("power", "power_log", "indicator", "linear"):
        raise OutsideGammaClass(f"profile kind {F.kind!r} has no gamma-class scaling")
    gamma = float(F.gamma)
    tau = ns.exponent.trace
    kappa = (1 - gamma) / (1 + tau * (1 - gamma))
    return ScalingSolution(F, ns, gamma, kappa, tau)


def regular_variation_a(sol: ScalingSolution, lam: float, n_grid: Sequence[int]) -> list[float]:
    """``|a_{floor(lam n)} / a_n - lam**kappa|`` along ``n_grid``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    target = lam**sol.kappa
    return [abs(sol.a(int(math.floor(lam * n))) / sol.a(n) - target) for n in n_grid]


# --- Dirichlet eigenvalues ---------------------------------------------------------------


class IllConditionedGram(RuntimeError):
    pass


@dataclass(frozen=True)
class Domain:
    kind: str
    d: int
    sides: tuple[float, ...] = ()
    radius: float = 0.0

    @classmethod
    def interval(cls, a: float, b: float) -> "Domain":
        if not b > a:
            raise ValueError("empty interval")
        return cls("interval", 1, (float(b - a),))

    @classmethod
    def box(cls, sides: Sequence[float]) -> "Domain":
        sides = tuple(float(s) for s in sides)
        if any(s <= 0 for s in sides):
            raise ValueError("box sides must be positive")
        return cls("box" if len(sides) > 1 else "interval", len(sides), sides)

    @classmethod
    def ball(cls, radius: float, d: int) -> "Domain":
        if radius <= 0 or d not in (1, 2, 3):
            raise ValueError("balls need a positive radius and d <= 3")
        if d == 1:
            return cls.interval(-radius, radius)
        return cls("ball", d, (), float(radius))

    @classmethod
    def unit_volume_ball(cls, d: int) -> "Domain":
        r = (math.gamma(d / 2 + 1) / math.pi ** (d / 2)) ** (1 / d)
        return cls.ball(r, d)

    @property
    def volume(self) -> float:
        if self.kind == "ball":
            return math.pi ** (self.d / 2) * self.radius**self.d / math.gamma(self.d / 2 + 1)
        return float(np.prod(self.sides))


@dataclass(frozen=True)
class EigenResult:
    """Rayleigh-Ritz upper bound; ``residual`` is the quadrature defect ``max |M - I|``
    of the (analytically orthonormal) trial basis."""

    lam: float
    domain: Domain
    ritz_dimension: int
    residual: float
    details: dict = field(default_factory=dict)


def _split_terms(terms):
    gauss = sum(c for c, p in terms if p == 2.0)
    frac = [(c, p) for c, p in terms if p != 2.0]
    return gauss, frac


def _interval_profiles(ell: float, N: int, xi: np.ndarray) -> np.ndarray:
    """Real envelopes ``h_j(xi)``, ``|f_hat_j| = |h_j|`` for ``sqrt(2/ell) sin(j pi x / ell)`` on ``(0, ell)``."""
    k = np.pi * np.arange(1, N + 1) / ell
    delta = xi[:, None] - k[None, :]
    return math.sqrt(2 * ell) * k * np.sinc(delta * ell / (2 * np.pi)) / (k + xi[:, None])


def _interval_gram(terms, ell: float, N: int, quad_factor: float = 32.0):
    """Stiffness and mass matrices of the sine basis for ``Theta(xi) = sum c |xi|^p``."""
    k = np.pi * np.arange(1, N + 1) / ell
    j = np.arange(1, N + 1)
    par = np.cos((j[:, None] - j[None, :]) * np.pi / 2)
    par = np.rint(par)  # 0 for odd j - k, +-1 for even
    gauss, frac = _split_terms(terms)
    G = np.diag(gauss * k**2)
    Xi = quad_factor * max(k[-1], 2 * np.pi / ell)
    n_pan = int(math.ceil(Xi * ell / np.pi))
    xi, w = _gl_panels(0.0, Xi, n_pan, order=16, graded=True)
    H = _interval_profiles(ell, N, xi)
    M = par * ((H * w[:, None]).T @ H) / np.pi
    M += par**2 * 4 * np.outer(k, k) / ell * Xi**-3 / 3 / np.pi
    for c, p in frac:
        Hw = H * (w * c * xi**p)[:, None]
        G = G + par * (Hw.T @ H) / np.pi
        G = G + par**2 * 4 * np.outer(k, k) * c / ell * Xi ** (p - 3) / (3 - p) / np.pi
    return G, M


def _radial_profiles(d: int, R: float, N: int, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fourier transforms of the normalized radial Dirichlet Laplacian eigenfunctions of the ball,
    their Laplacian eigenvalues, and the tail amplitudes ``A`` with ``f_hat ~ A * oscillation``."""
    if d == 2:
        z = special.jn_zeros(0, N)
        J1 = special.j1(z)
        norm = math.sqrt(math.pi) * R * np.abs(J1)
        b = rho[:, None] * R
        den = z**2 - b**2
        near = np.abs(den) < 1e-9
        F = np.where(near, J1**2 / 2, z * J1 * special.j0(b) / np.where(near, 1.0, den))
        F = 2 * math.pi * R**2 * F / norm
        amp = 2 * math.pi * R**2 * z * J1 / norm
        return F, (z / R) ** 2, amp
    k = np.pi * np.arange(1, N + 1) / R
    delta = rho[:, None] - k
    F = 4 * math.pi * k * R * np.sinc(delta * R / np.pi) / (rho[:, None] * (rho[:, None] + k))
    sign = (-1.0) ** np.arange(1, N + 1)
    F = F * sign / math.sqrt(2 * math.pi * R)
    return F, k**2, 4 * math.pi * k / math.sqrt(2 * math.pi * R)


def _ball_gram(terms, d: int, R: float, N: int, quad_factor: float = 32.0):
    F0, lap, amp = _radial_profiles(d, R, N, np.array([1.0]))
    gauss, frac = _split_terms(terms)
    G = np.diag(gauss * lap)
    kmax = math.sqrt(lap[-1])
    Xi = quad_factor * max(kmax, 2 * np.pi / R)
    n_pan = int(math.ceil(Xi * R / np.pi))
    rho, w = _gl_panels(0.0, Xi, n_pan, order=16, graded=True)
    F, _, _ = _radial_profiles(d, R, N, rho)
    surf = 2 * math.pi if d == 2 else 4 * math.pi
    cst = surf / (2 * math.pi) ** d
    M = cst * ((F * (w * rho ** (d - 1))[:, None]).T @ F)
    # oscillation-averaged tails: d = 2 uses J0(x)^2 ~ 1/(pi x), d = 3 uses sin^2 ~ 1/2
    if d == 2:
        A = np.outer(amp, amp) * cst / (math.pi * R**5)
    else:
        A = np.outer(amp, amp) * cst / 2 * np.outer((-1.0) ** np.arange(1, N + 1), (-1.0) ** np.arange(1, N + 1))
    M += A * Xi**-3 / 3
    for c, p in frac:
        G = G + cst * ((F * (w * c * rho**p * rho ** (d - 1))[:, None]).T @ F)
        G = G + A * c * Xi ** (p - 3) / (3 - p)
    return G, M


def _box_gram_2d(ll: LimitLaw, sides: Sequence[float], N: int, quad_factor: float = 16.0):
    """Tensor sine basis on a rectangle for a symbol that is even in each coordinate."""
    ax = []
    for ell in sides:
        k = np.pi * np.arange(1, N + 1) / ell
        Xi = quad_factor * max(k[-1], 2 * np.pi / ell)
        xi, w = _gl_panels(0.0, Xi, int(math.ceil(Xi * ell / np.pi)), order=8, graded=True)
        j = np.arange(1, N + 1)
        par = np.rint(np.cos((j[:, None] - j[None, :]) * np.pi / 2))
        H = _interval_profiles(ell, N, xi)
        ax.append((xi, w, H, par))
    (x1, w1, H1, p1), (x2, w2, H2, p2) = ax
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    TH = symbol(ll, np.stack([X1.ravel(), X2.ravel()], axis=1)).reshape(X1.shape)
    P1 = (H1[:, :, None] * H1[:, None, :]).reshape(len(x1), N * N) * w1[:, None]
    P2 = (H2[:, :, None] * H2[:, None, :]).reshape(len(x2), N * N) * w2[:, None]
    Gq = (P1.T @ TH @ P2).reshape(N, N, N, N)
    G = Gq * p1[:, :, None, None] * p2[None, None, :, :] / math.pi**2
    G = G.transpose(0, 2, 1, 3).reshape(N * N, N * N)
    M1 = p1 * (P1.sum(axis=0).reshape(N, N)) / math.pi
    M2 = p2 * (P2.sum(axis=0).reshape(N, N)) / math.pi
    return (G + G.T) / 2, np.kron(M1, M2)


def _ritz(G: np.ndarray, M: np.ndarray, cond_limit: float = 1e10) -> tuple[float, float]:
    Ms = (M + M.T) / 2
    ev = np.linalg.eigvalsh(Ms)
    if ev[0] <= 0 or ev[-1] / ev[0] > cond_limit:
        raise IllConditionedGram(f"Gram matrix condition number {ev[-1] / max(ev[0], 1e-300):.2e}")
    lam = linalg.eigh((G + G.T) / 2, Ms, eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(lam), float(np.abs(Ms - np.eye(len(Ms))).max())


def eigen_rayleigh(ll: LimitLaw, U: Domain, basis_size: int = 64) -> EigenResult:
    """Rayleigh-Ritz upper bound for ``lambda_1(Theta, U)`` with the zero-extension form
    ``(2 pi)^-d int Theta |f_hat|^2``.

    Intervals and boxes use (tensor) sine bases; separable symbols reduce a box
    to its edges exactly.  Balls in ``d = 2, 3`` use the radial Dirichlet
    eigenfunctions of the Laplacian, which suffices for radial symbols.
    """
    if U.d != ll.d:
        raise ValueError("domain and law dimensions differ")
    if U.volume <= 0:
        raise ValueError("domain must have positive volume")
    N = int(basis_size)
    if U.kind in ("interval", "box"):
        terms = ll.axis_terms()
        if terms is not None:
            lam, res = 0.0, 0.0
            for tl, ell in zip(terms, U.sides):
                G, M = _interval_gram(tl, ell, N)
                l1, r1 = _ritz(G, M)
                lam += l1
                res = max(res, r1)
            return EigenResult(lam, U, N**U.d, res, {"basis": "tensor-sine", "separable": True})
        if U.d != 2:
            raise NotImplementedError("non-separable symbols on boxes are supported for d = 2")
        G, M = _box_gram_2d(ll, U.sides, N)
        lam, res = _ritz(G, M)
        return EigenResult(lam, U, N * N, res, {"basis": "tensor-sine", "separable": False})
    terms = ll.radial_terms()
    if terms is None:
        raise NotImplementedError("ball domains need a radial symbol")
    G, M = _ball_gram(terms, U.d, U.radius, N)
    lam, res = _ritz(G, M)
    return EigenResult(lam, U, N, res, {"basis": "radial-dirichlet"})


def lambda_theta(ll: LimitLaw, aspects: Sequence[float] | None = None, basis_size: int | None = None) -> EigenResult:
    """``inf`` of ``lambda_1`` over unit-volume boxes (aspect grid) and, for radial symbols, the unit-volume ball."""
    d = ll.d
    if d == 1:
        return eigen_rayleigh(ll, Domain.interval(0.0, 1.0), basis_size or 64)
    if d > 3:
        raise ValueError("lambda_theta supports d <= 3")
    if aspects is None:
        aspects = np.geomspace(0.25, 4.0, 17)
    sep = ll.axis_terms() is not None
    nb = basis_size or (64 if sep else 8)
    boxes = []
    if d == 2:
        shapes = [(r, 1 / r) for r in aspects]
    else:
        shapes = [(r1, r2, 1 / (r1 * r2)) for r1 in aspects for r2 in aspects]
    for s in shapes:
        boxes.append(eigen_rayleigh(ll, Domain.box(s), nb))
    best = min(boxes, key=lambda r: r.lam)
    grid = [(list(r.domain.sides), r.lam) for r in boxes]
    if ll.is_isotropic():
        ball = eigen_rayleigh(ll, Domain.unit_volume_ball(d), basis_size or 32)
        if ball.lam > best.lam * (1 + 1e-6):
            raise AssertionError(f"ball {ball.lam} does not beat the best box {best.lam} for a radial symbol")
        return EigenResult(ball.lam, ball.domain, ball.ritz_dimension, ball.residual,
                           {"family": "ball+boxes", "box_grid": grid, "best_box": best.lam})
    return EigenResult(best.lam, best.domain, best.ritz_dimension, best.residual,
                       {"family": "boxes", "box_grid": grid})


# --- closed-form constants ---------------------------------------------------------------

CONSTANT_FORMULAS = ("dv_theta", "wreath_ZD", "schmidt_gamma", "nonamenable", "custom_rayleigh")


@dataclass(frozen=True)
class ConstantReport:
    k_value: float
    formula: str
    inputs: dict
    residuals: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.formula not in CONSTANT_FORMULAS:
            raise ValueError(f"unknown formula {self.formula!r}")
        if not 0 < self.k_value < math.inf:
            raise ValueError(f"constant must be positive and finite, got {self.k_value}")

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps({"formula": d["formula"], "inputs": d["inputs"], "value": d["k_value"],
                           "residuals": d["residuals"]}, sort_keys=True)


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def constant_dv_theta(theta: float, trE: float, lambda1: float) -> ConstantReport:
    _positive(theta=theta, trE=trE, lambda1=lambda1)
    t = trE
    k = theta ** (1 / (t + 1)) * (t + 1) * (lambda1 / t) ** (t / (t + 1))
    return ConstantReport(k, "dv_theta", {"theta": theta, "trE": trE, "lambda1": lambda1})


def constant_wreath_ZD(alpha: float, d: int, lambda_theta: float, D: int) -> ConstantReport:
    if not 0 < alpha <= 2 or d < 1 or D < 1:
        raise ValueError("need alpha in (0, 2], d >= 1 and D >= 1")
    _positive(lambda_theta=lambda_theta)
    k = (D / 2) ** (alpha / (d + alpha)) * (1 + d / alpha) * (alpha * lambda_theta / d) ** (d / (d + alpha))
    return ConstantReport(k, "wreath_ZD", {"alpha": alpha, "d": d, "lambda_theta": lambda_theta, "D": D})


def constant_schmidt(gamma: float, a: float, c: float) -> ConstantReport:
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    _positive(a=a, c=c)
    g = gamma
    inner = math.sqrt(math.pi) * special.gamma((3 - g) / (2 - 2 * g)) / special.gamma(1 / (1 - g))
    k = (c ** (2 / (3 - g)) * (2 * a) ** ((1 - g) / (3 - g)) * ((3 - g) / (1 + g))
         * inner ** ((2 - 2 * g) / (3 - g)))
    return ConstantReport(k, "schmidt_gamma", {"gamma": gamma, "a": a, "c": c})


def schmidt_profile_minimum(gamma: float, a: float, c: float) -> float:
    """``min_s 2a int |psi_s'|^2 + c int psi_s^(2 gamma)`` over unit-L2 dilations of
    ``psi = cos(x)^(1/(1-gamma))`` on ``|x| < pi/2`` (direct quadrature, no Gamma identities)."""
    p = 1 / (1 - gamma)
    dens = lambda x: math.cos(x) ** (2 * p)
    norm = 2 * integrate.quad(dens, 0, math.pi / 2, epsabs=0, epsrel=1e-13)[0]
    dpsi = lambda x: (p * math.cos(x) ** (p - 1) * math.sin(x)) ** 2
    A = 2 * integrate.quad(dpsi, 0, math.pi / 2, epsabs=0, epsrel=1e-13)[0] / norm
    B = 2 * integrate.quad(lambda x: math.cos(x) ** (2 * gamma * p), 0, math.pi / 2,
                           epsabs=0, epsrel=1e-13)[0] / norm**gamma
    # unit-L2 dilation psi_s(x) = sqrt(s) psi(s x): gradient term s^2 A, power term s^(gamma-1) B
    J = lambda u: 2 * a * math.exp(2 * u) * A + c * math.exp((gamma - 1) * u) * B
    res = optimize.minimize_scalar(J, bracket=(-5.0, 5.0), tol=1e-14)
    return float(res.fun)


def constant_nonamenable(rho: float) -> ConstantReport:
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    return ConstantReport(2 * math.log(1 / rho), "nonamenable", {"rho": rho})


def constant_custom_rayleigh(ll: LimitLaw, theta: float, basis_size: int | None = None) -> ConstantReport:
    """``dv_theta`` constant with ``lambda_1`` supplied by :func:`lambda_theta`."""
    ev = lambda_theta(ll, basis_size=basis_size)
    base = constant_dv_theta(theta, ll.exponent.trace, ev.lam)
    return ConstantReport(base.k_value, "custom_rayleigh",
                          {"theta": theta, "trE": ll.exponent.trace, "lambda1": ev.lam},
                          {"ritz_dimension": ev.ritz_dimension, "gram_defect": ev.residual})


@dataclass(frozen=True)
class IteratedExponents:
    gammas: tuple[float, ...]
    exponent: float
    log_correction: bool
    log_power: float | None


def iterated_exponents(alphas: Sequence[float], dims: Sequence[int], lattice_lamps: bool = False) -> IteratedExponents:
    """Partial sums ``gamma_i = sum_{j <= i} d_j / alpha_j`` and the return exponent ``gamma_k / (1 + gamma_k)``."""
    if len(alphas) != len(dims) or not alphas:
        raise ValueError("alphas and dims must be nonempty lists of equal length")
    if any(not 0 < a <= 2 for a in alphas) or any(d < 1 for d in dims):
        raise ValueError("need alpha_i in (0, 2] and d_i >= 1")
    g = tuple(np.cumsum([d / a for a, d in zip(alphas, dims)]).tolist())
    gk = g[-1]
    return IteratedExponents(g, gk / (1 + gk), lattice_lamps, 1 / (1 + gk) if lattice_lamps else None)
