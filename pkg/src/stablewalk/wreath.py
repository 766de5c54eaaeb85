"""Switch-walk-switch walks on lamplighter groups ``K wr Z^d``.

The walk has step law ``q = nu * mu * nu``: toggle the lamp at the current base
point by ``nu``, move the base point by ``mu``, toggle again.  Conditioning on the
base path leaves independent products of ``nu``-steps at each visited site, which
turns return probabilities into occupation-time functionals of the base walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .occupation import (EstimatorResult, OccupationRecord, bridge_laplace, replica_rng,
                         run_replicas, simulate, summarize)
from .stablelaw import convolution_power
from .steplaw import StepLaw

LAMP_KINDS = ("finite_table", "lattice_ZD", "parametric")


@dataclass(frozen=True, eq=False)
class LampGroupModel:
    """Lamp group ``K`` with its switching law ``nu``.

    ``finite_table``: ``cayley[a, b]`` is the index of ``a b``, index 0 is the
    identity and ``nu`` is a probability vector.  ``lattice_ZD``: ``K = Z^D`` with
    ``nu`` a :class:`StepLaw`.  ``parametric``: only ``F_K(m) = -log nu^(2m)(e)``
    is known, as a closed form in ``m``.
    """

    kind: str
    nu: np.ndarray | StepLaw | None = None
    cayley: np.ndarray | None = None
    profile: Callable[[float], float] | None = None
    epsilon_value: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in LAMP_KINDS:
            raise ValueError(f"unknown lamp model kind {self.kind!r}")
        if self.kind == "finite_table":
            nu = np.asarray(self.nu, dtype=float)
            C = np.asarray(self.cayley, dtype=np.int64)
            g = len(nu)
            if C.shape != (g, g) or abs(nu.sum() - 1) > 1e-12 or np.any(nu < 0):
                raise ValueError("finite_table needs a g x g Cayley table and a probability vector")
            if not (np.all(C[0] == np.arange(g)) and np.all(C[:, 0] == np.arange(g))):
                raise ValueError("index 0 must be the identity of the Cayley table")
            for row in C:
                if sorted(row) != list(range(g)):
                    raise ValueError("Cayley table rows must be permutations")
            inv = np.argmax(C == 0, axis=1)
            if not np.allclose(nu, nu[inv], atol=1e-15):
                raise ValueError("nu must be symmetric")
            object.__setattr__(self, "nu", nu)
            object.__setattr__(self, "cayley", C)
        elif self.kind == "lattice_ZD":
            if not isinstance(self.nu, StepLaw):
                raise ValueError("lattice_ZD needs a StepLaw")
        elif self.profile is None:
            raise ValueError("parametric model needs a profile F_K(m)")
        if not self.epsilon > 0:
            raise ValueError("nu(e_K) must be positive")

    @classmethod
    def cyclic(cls, order: int, nu) -> "LampGroupModel":
        i = np.arange(order)
        return cls("finite_table", np.asarray(nu, dtype=float), (i[:, None] + i[None, :]) % order,
                   name=f"Z_{order}")

    @classmethod
    def z2_uniform(cls) -> "LampGroupModel":
        return cls.cyclic(2, [0.5, 0.5])

    @classmethod
    def lattice(cls, law: StepLaw) -> "LampGroupModel":
        return cls("lattice_ZD", law, name=f"Z^{law.d}")

    @classmethod
    def parametric(cls, profile: Callable[[float], float], epsilon: float, name: str = "") -> "LampGroupModel":
        return cls("parametric", profile=profile, epsilon_value=float(epsilon), name=name)

    @property
    def epsilon(self) -> float:
        if self.kind == "finite_table":
            return float(self.nu[0])
        if self.kind == "lattice_ZD":
            return float(np.ravel(self.nu.pmf(np.zeros((1, self.nu.d), dtype=np.int64)))[0])
        return float(self.epsilon_value)

    @property
    def order(self) -> int | None:
        return len(self.nu) if self.kind == "finite_table" else None

    def convolve(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Convolution of two measures on a finite ``K``."""
        out = np.zeros_like(p)
        np.add.at(out, self.cayley.ravel(), np.outer(p, q).ravel())
        return out


def _finite_power(model: LampGroupModel, k: int) -> np.ndarray:
    cache = model.__dict__.setdefault("_powers", [np.eye(len(model.nu))[0]])
    while len(cache) <= k:
        cache.append(model.convolve(cache[-1], model.nu))
    return cache[k]


def lamp_power_at_identity(model: LampGroupModel, k: int) -> float:
    """``nu^(k)(e_K)`` for any ``k >= 0``, odd powers included."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    if model.kind == "finite_table":
        return float(_finite_power(model, k)[0])
    if model.kind == "lattice_ZD":
        cache = model.__dict__.setdefault("_lattice", {})
        if k not in cache:
            cache[k] = _lattice_at_origin(model.nu, k)
        return cache[k]
    # a closed-form profile is read at half-integer arguments for odd powers
    return math.exp(-model.profile(k / 2))


def _lattice_at_origin(law: StepLaw, k: int) -> float:
    if law.finite:
        half = law.support_radius * k
    else:
        alpha = min(np.atleast_1d(law.params.get("alphas", law.params.get("alpha"))))
        half = int(min(4096 if law.d == 1 else 256, max(64, 16 * math.ceil(k ** (1 / alpha)))))
    return float(convolution_power(law, k, half).at((0,) * law.d))


def lamp_return(model: LampGroupModel, m: int) -> float:
    """``nu^(2m)(e_K)``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return lamp_power_at_identity(model, 2 * m)


@dataclass(frozen=True)
class ReturnProfile:
    """``F_K(m) = -log nu^(2m)(e_K)``: exact on a grid, interpolated in ``log m`` in between,
    and extended past ``cap`` by ``F(cap) + ell (m^gamma - cap^gamma)`` (``ell log(m/cap)`` if ``gamma = 0``)."""

    grid: np.ndarray
    values: np.ndarray
    cap: int
    gamma: float
    ell: float

    @classmethod
    def build(cls, model: LampGroupModel, cap: int = 1024, gamma: float | None = None,
              doubling: bool | None = None) -> "ReturnProfile":
        if doubling is None:
            doubling = model.kind == "lattice_ZD"
        if doubling:
            grid = sorted({0, *range(1, 9), *(2**j for j in range(3, int(math.log2(cap)) + 1)), cap})
        else:
            grid = list(range(cap + 1))
        grid = np.array(grid)
        vals = np.array([-math.log(lamp_return(model, int(m))) for m in grid])
        if gamma is None:
            gamma = 0.0 if model.kind != "parametric" else 1 / 3
        m1, m2 = grid[-2], grid[-1]
        if gamma == 0:
            ell = (vals[-1] - vals[-2]) / math.log(m2 / m1)
        else:
            ell = (vals[-1] - vals[-2]) / (m2**gamma - m1**gamma)
        return cls(grid, vals, int(cap), float(gamma), float(ell))

    def __call__(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        out = np.empty_like(m)
        low = m <= 1
        out[low] = np.interp(m[low], self.grid[:2], self.values[:2])
        mid = (m > 1) & (m <= self.cap)
        pos = self.grid >= 1
        out[mid] = np.interp(np.log(m[mid]), np.log(self.grid[pos]), self.values[pos])
        hi = m > self.cap
        if self.gamma == 0:
            out[hi] = self.values[-1] + self.ell * np.log(m[hi] / self.cap)
        else:
            out[hi] = self.values[-1] + self.ell * (m[hi] ** self.gamma - self.cap**self.gamma)
        return out

    def monotone_within(self, slack: float) -> bool:
        return bool(np.all(np.diff(self.values) >= -slack))


def lstar_counts(rec: OccupationRecord, g: tuple[int, ...]) -> dict[tuple[int, ...], float]:
    """Numbers of lamp switches at each site, halved: ``2 l*`` is the count of ``nu``-factors.

    Every visit contributes two switches (one on arrival, one on departure)
    except that the start has no arrival switch and the end has no departure
    switch; so ``2 l*(h) = 2 l(h) - 1{h = e} - 1{h = g}``.
    """
    g = tuple(g)
    if tuple(rec.endpoint) != g:
        raise ValueError(f"record ends at {rec.endpoint}, not at {g}")
    origin = (0,) * len(g)
    out = {h: float(c) for h, c in rec.counts.items()}
    out[origin] -= 0.5
    out[g] -= 0.5
    return out


def lamp_factor(model: LampGroupModel, lstar: dict[tuple[int, ...], float]) -> float:
    """``prod_h nu^(2 l*(h))(e_K)``."""
    return math.prod(lamp_power_at_identity(model, int(round(2 * v))) for v in lstar.values())


def surrogate_factor(model: LampGroupModel, rec: OccupationRecord) -> float:
    """``exp(-sum_h F_K(l(n, h)))``."""
    return math.exp(-math.fsum(-math.log(lamp_return(model, int(c))) for c in rec.counts.values()))


def _wreath_chunk(args) -> list[float]:
    base, model, n, g, exact, seed, start, stop = args
    out = []
    for r in range(start, stop):
        rec = simulate(base, n, replica_rng(seed, r))
        if rec.endpoint != g:
            out.append(0.0)
        elif exact:
            out.append(lamp_factor(model, lstar_counts(rec, g)))
        else:
            out.append(surrogate_factor(model, rec))
    return out


def wreath_return_estimate(base: StepLaw, model: LampGroupModel, n: int, g, replicas: int, seed: int,
                           exact_lstar: bool = True, chunk: int = 4096, workers: int = 1) -> EstimatorResult:
    """Monte Carlo estimate of ``q^(n)((e, g))`` (all lamps at the identity, base point ``g``)."""
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    g = tuple(int(v) for v in np.atleast_1d(g))
    if len(g) != base.d:
        raise ValueError("endpoint dimension does not match the base law")
    vals = run_replicas(_wreath_chunk, (base, model, n, g, exact_lstar, seed), replicas, chunk, workers)
    return summarize(vals, seed)


class EnumerationCap(ValueError):
    pass


def wreath_exact_enum(base: StepLaw, model: LampGroupModel, n: int, g=None,
                      max_states: int = 5_000_000) -> float:
    """Exact ``q^(n)((e, g))`` by propagating the law of (lamp configuration, base point)."""
    if model.kind != "finite_table":
        raise ValueError("exact enumeration needs a finite lamp group")
    if not base.finite or base.d != 1:
        raise ValueError("exact enumeration needs a finite-support base law on Z")
    g = 0 if g is None else int(np.atleast_1d(g)[0])
    nu = [(k, p) for k, p in enumerate(model.nu.tolist()) if p > 0]
    steps = [(int(s[0]), p) for s, p in zip(base.points.tolist(), base.probs.tolist())]
    C = model.cayley

    def toggle(states: dict) -> dict:
        out: dict = {}
        for (conf, pos), pr in states.items():
            cur = dict(conf)
            a = cur.get(pos, 0)
            for k, p in nu:
                b = int(C[a, k])
                new = dict(cur)
                if b:
                    new[pos] = b
                else:
                    new.pop(pos, None)
                key = (tuple(sorted(new.items())), pos)
                out[key] = out.get(key, 0.0) + pr * p
        return out

    states = {((), 0): 1.0}
    for _ in range(n):
        states = toggle(states)
        moved: dict = {}
        for (conf, pos), pr in states.items():
            for s, p in steps:
                key = (conf, pos + s)
                moved[key] = moved.get(key, 0.0) + pr * p
        states = toggle(moved)
        if len(states) > max_states:
            raise EnumerationCap(f"{len(states)} states exceed the cap {max_states}")
    return math.fsum(pr for (conf, pos), pr in states.items() if not conf and pos == g)


def wreath_exact_z2z(base: StepLaw, n: int) -> float:
    """Exact ``q^(n)(e)`` on ``Z_2 wr Z`` with uniform switching and a ``{-1, 0, 1}`` base.

    Uniform switching is idempotent, so a site contributes ``1/2`` as soon as
    it receives one switch.  On a return path every visited site does, hence
    ``q^(n)(e) = E[2^{-D_n} 1{X_n = 0}]`` for ``n >= 1``.
    """
    if n < 0 or n > 5000:
        raise ValueError("wreath_exact_z2z supports 0 <= n <= 5000")
    if n == 0:
        return 1.0
    return bridge_laplace(base, n, math.log(2))
