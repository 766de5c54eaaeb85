"""Exponent matrices, dilation groups ``t**E`` and integer normalizations ``B_n``."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

MATRIX_TOL = 1e-10


class DegenerateNormalization(ValueError):
    """Raised when ``floor(n**E)`` is singular at the requested ``n``."""


@dataclass(frozen=True)
class ExponentStructure:
    """Exponent matrix ``E`` of an operator-stable law.

    Only matrices that are orthogonally conjugate to a diagonal matrix are
    supported, i.e. ``E = P diag(1/alpha_i) P^T`` with ``P`` orthogonal.
    Use :meth:`diagonal` or :meth:`rotated` rather than the raw constructor
    when the exponents are known.
    """

    E: np.ndarray
    basis_rotation: np.ndarray | None = None
    diagonal_exponents: tuple[float, ...] | None = None
    tol: float = MATRIX_TOL
    _eigvals: np.ndarray = field(init=False, repr=False, compare=False)
    _eigvecs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        E = np.atleast_2d(np.asarray(self.E, dtype=float))
        if E.shape[0] != E.shape[1]:
            raise ValueError(f"E must be square, got shape {E.shape}")
        if not np.allclose(E, E.T, atol=self.tol):
            raise ValueError("only E orthogonally conjugate to a diagonal matrix is supported")
        w, V = np.linalg.eigh((E + E.T) / 2)
        if np.any(w < 0.5 - self.tol):
            raise ValueError(f"eigenvalues of E must lie in [1/2, inf), got {w}")
        if self.diagonal_exponents is not None:
            alphas = tuple(float(a) for a in self.diagonal_exponents)
            if any(not 0 < a <= 2 for a in alphas):
                raise ValueError(f"alpha_i must lie in (0, 2], got {alphas}")
            if abs(np.trace(E) - sum(1 / a for a in alphas)) > 1e-12:
                raise ValueError("trace(E) does not match sum(1/alpha_i)")
            object.__setattr__(self, "diagonal_exponents", alphas)
        E.setflags(write=False)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "_eigvals", w)
        object.__setattr__(self, "_eigvecs", V)

    @classmethod
    def diagonal(cls, alphas: Sequence[float], **kw) -> "ExponentStructure":
        alphas = [float(a) for a in alphas]
        return cls(np.diag([1 / a for a in alphas]), diagonal_exponents=tuple(alphas), **kw)

    @classmethod
    def rotated(cls, alphas: Sequence[float], P: np.ndarray, **kw) -> "ExponentStructure":
        P = np.asarray(P, dtype=float)
        if not np.allclose(P @ P.T, np.eye(len(P)), atol=MATRIX_TOL):
            raise ValueError("basis_rotation must be orthogonal")
        E = P @ np.diag([1 / a for a in alphas]) @ P.T
        return cls(E, basis_rotation=P, diagonal_exponents=tuple(float(a) for a in alphas), **kw)

    @property
    def d(self) -> int:
        return self.E.shape[0]

    @property
    def trace(self) -> float:
        """``tau = tr(E)``; ``det(t**E) = t**tau``."""
        return float(np.trace(self.E))

    @property
    def harmonic_alpha(self) -> float:
        """``alpha`` with ``1/alpha = (1/d) sum 1/alpha_i``."""
        return self.d / self.trace

    @property
    def is_diagonal(self) -> bool:
        return bool(np.allclose(self.E, np.diag(np.diag(self.E)), atol=self.tol))

    @property
    def eigen(self) -> tuple[np.ndarray, np.ndarray]:
        return self._eigvals, self._eigvecs


def matrix_power(es: ExponentStructure, t: float) -> np.ndarray:
    """Return ``t**E = sum (log t)^k E^k / k!``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    w, V = es.eigen
    if es.is_diagonal:
        return np.diag(t ** np.diag(es.E))
    return (V * t**w) @ V.T


def _snap_floor(x: np.ndarray) -> np.ndarray:
    # n**E is computed in floating point; 4**0.5 may land a hair below 2
    r = np.rint(x)
    close = np.abs(x - r) <= 1e-9 * np.maximum(1.0, np.abs(x))
    return np.where(close, r, np.floor(x)).astype(np.int64)


def rational_inverse(M: np.ndarray) -> list[list[Fraction]]:
    """Exact inverse of an integer matrix by Gauss-Jordan over the rationals."""
    n = len(M)
    A = [[Fraction(int(v)) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


@dataclass(frozen=True)
class Normalization:
    """One term ``B_n`` of a normalization sequence."""

    n: int
    matrix: np.ndarray
    det: int
    inverse: list[list[Fraction]]

    def inverse_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.inverse])


@dataclass(frozen=True)
class NormalizationSequence:
    """``B_n = floor(n**E)`` (``rule="floor_power"``) or an explicit table."""

    exponent: ExponentStructure
    rule: str = "floor_power"
    table: dict[int, np.ndarray] | None = None

    def __post_init__(self):
        if self.rule not in ("floor_power", "explicit_table"):
            raise ValueError(f"unknown normalization rule {self.rule!r}")
        if self.rule == "explicit_table" and not self.table:
            raise ValueError("explicit_table rule requires a table")


def build_Bn(ns: NormalizationSequence, n: int) -> Normalization:
    """Integer normalization matrix at ``n`` with its determinant and exact inverse."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if ns.rule == "floor_power":
        B = _snap_floor(matrix_power(ns.exponent, float(n)))
    else:
        B = np.asarray(ns.table[n], dtype=np.int64)
    det = int(round(np.linalg.det(B))) if len(B) > 3 else _int_det(B)
    if det == 0:
        raise DegenerateNormalization(f"degenerate normalization at n={n}: {B.tolist()}")
    return Normalization(n=n, matrix=B, det=det, inverse=rational_inverse(B))


def _int_det(B: np.ndarray) -> int:
    b = [[int(v) for v in row] for row in B]
    if len(b) == 1:
        return b[0][0]
    if len(b) == 2:
        return b[0][0] * b[1][1] - b[0][1] * b[1][0]
    return (b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]))


def regular_variation_check(ns: NormalizationSequence, t: float, n_grid: Sequence[int]) -> list[float]:
    """Spectral-norm deviations ``|| B_n B_{floor(nt)}^{-1} - t**(-E) ||`` along ``n_grid``."""
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be increasing")
    target = matrix_power(ns.exponent, 1.0 / t)
    out = []
    for n in n_grid:
        Bn = build_Bn(ns, n).matrix.astype(float)
        Bnt = build_Bn(ns, int(np.floor(n * t))).inverse_float()
        out.append(float(np.linalg.norm(Bn @ Bnt - target, 2)))
    return out
