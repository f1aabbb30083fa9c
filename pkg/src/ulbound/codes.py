"""Spherical codes: energies, inner-product spectra, moments and design strength.

Energies sum ``h(<x, y>)`` over *ordered* pairs of distinct points, so every
unordered pair contributes twice.  Some references halve this; this package
does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .orthopoly import gegenbauer_table
from .potentials import Potential
from .ulb import ulb

UNIT_TOL = 1e-10
FILE_UNIT_TOL = 1e-6
CLUSTER_TOL = 1e-9
DUPLICATE_TOL = 1e-12
MOMENT_TOL = 1e-8
DEFAULT_K_MAX = 40


class CodeError(ValueError):
    pass


class DuplicatePointError(CodeError):
    pass


class CodeFormatError(CodeError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ConfigurationRule:
    """Distance distribution of a code viewed as a 1/N-quadrature.

    ``weights[l]`` is the fraction of the ``N^2`` ordered pairs (diagonal
    included) whose inner product is ``nodes[l]``; the diagonal accounts for
    the missing ``1/N`` at ``t = 1``.
    """

    n: int
    N: int
    nodes: np.ndarray
    weights: np.ndarray

    def residual(self, j: int) -> float:
        """``1/N + sum_l q_l P_j(alpha_l) - delta_{j0}``, which equals ``M_j / N^2`` for ``j >= 1``."""
        tab = gegenbauer_table(self.n, j, self.nodes)
        return 1.0 / self.N + float(tab[j] @ self.weights) - (1.0 if j == 0 else 0.0)


@dataclass(frozen=True)
class SphericalCode:
    points: np.ndarray
    name: str = "code"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 2:
            raise CodeError(f"points must form an N x n matrix with n >= 2, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise CodeError("points contain non-finite coordinates")
        norms = np.linalg.norm(pts, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
        if bad.size:
            raise CodeError(f"row {bad[0]} has norm {norms[bad[0]]!r}, expected 1")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        off = self._off_diagonal()
        if off.size and off.max() > 1.0 - DUPLICATE_TOL:
            i, j = np.unravel_index(int(np.argmax(self.gram - 2 * np.eye(self.N))), self.gram.shape)
            raise DuplicatePointError(f"points {i} and {j} coincide")

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        g = np.clip(self.points @ self.points.T, -1.0, 1.0)
        np.fill_diagonal(g, 1.0)
        g.flags.writeable = False
        return g

    def _off_diagonal(self) -> np.ndarray:
        return self.gram[~np.eye(self.N, dtype=bool)]

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct inner products ``alpha_l`` (merged within 1e-9) and ``q_l = count / N^2``."""
        vals = np.sort(self._off_diagonal())
        if not vals.size:
            return np.array([]), np.array([])
        breaks = np.flatnonzero(np.diff(vals) > CLUSTER_TOL) + 1
        groups = np.split(vals, breaks)
        alphas = np.array([g.mean() for g in groups])
        q = np.array([len(g) for g in groups], dtype=float) / self.N**2
        return alphas, q

    @cached_property
    def _moments(self) -> np.ndarray:
        tab = gegenbauer_table(self.n, DEFAULT_K_MAX, self._off_diagonal())
        return self.N + tab.sum(axis=1)

    def moments(self, k_max: int = DEFAULT_K_MAX) -> dict:
        """``M_k = sum_{i,j} P_k^{(n)}(<x_i, x_j>)`` for ``k = 0..k_max``, diagonal included."""
        if k_max <= DEFAULT_K_MAX:
            vals = self._moments[: k_max + 1]
        else:
            vals = self.N + gegenbauer_table(self.n, k_max, self._off_diagonal()).sum(axis=1)
        return {k: float(v) for k, v in enumerate(vals)}

    def vanishing_moments(self, k_max: int = DEFAULT_K_MAX, tol: float = MOMENT_TOL) -> list:
        """Index set ``I(C)``: degrees ``1 <= j <= k_max`` with ``M_j`` numerically zero."""
        m = self.moments(k_max)
        return [k for k in range(1, k_max + 1) if abs(m[k]) < tol * self.N**2]

    def design_strength(self, k_max: int = DEFAULT_K_MAX, tol: float = MOMENT_TOL) -> int:
        """Largest ``t`` with ``M_1 = ... = M_t = 0``; 0 if ``M_1`` is not zero."""
        m = self.moments(k_max)
        t = 0
        while t < k_max and abs(m[t + 1]) < tol * self.N**2:
            t += 1
        return t


def energy(code: SphericalCode, h: Potential) -> float:
    """``E(C; h) = sum_{x != y} h(<x, y>)`` over ordered pairs."""
    vals = np.asarray(h.eval(code._off_diagonal()), dtype=float)
    return math.fsum(vals.tolist())


def configuration_quadrature(code: SphericalCode) -> ConfigurationRule:
    alphas, q = code.spectrum
    return ConfigurationRule(code.n, code.N, alphas, q)


def simplex(n: int) -> SphericalCode:
    """Regular simplex with ``n + 1`` vertices and inner product ``-1/n``."""
    a = (1.0 - math.sqrt(n + 1)) / n
    pts = np.vstack((np.eye(n), np.full((1, n), a)))
    pts -= pts.mean(axis=0)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return SphericalCode(pts, f"simplex{n}")


def cross_polytope(n: int) -> SphericalCode:
    """``{+-e_i}``, ``2n`` points."""
    eye = np.eye(n)
    return SphericalCode(np.vstack((eye, -eye)), f"cross{n}")


def d4_roots() -> SphericalCode:
    """The 24 minimal vectors of ``D_4`` (all ``(+-1, +-1, 0, 0)`` permutations) scaled to unit length."""
    pts = []
    for i in range(4):
        for j in range(i + 1, 4):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    v = [0.0] * 4
                    v[i], v[j] = si, sj
                    pts.append(v)
    return SphericalCode(np.array(pts) / math.sqrt(2.0), "d4")


BUILTIN = ("simplex", "cross", "d4")


def builtin_code(name: str, n: Optional[int] = None) -> SphericalCode:
    name = name.lower()
    if name == "d4":
        if n not in (None, 4):
            raise CodeError("the D4 root system lives in dimension 4")
        return d4_roots()
    if name not in BUILTIN:
        raise CodeError(f"unknown code {name!r}; choose from {', '.join(BUILTIN)}")
    if n is None or n < 2:
        raise CodeError(f"{name} needs a dimension n >= 2")
    return simplex(n) if name == "simplex" else cross_polytope(n)


def load_code(path, n: Optional[int] = None) -> SphericalCode:
    """Read one point per line (whitespace-separated coordinates, ``#`` comments).

    Rows within 1e-6 of unit norm are renormalized; anything further off is rejected.
    """
    rows, lines = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                row = [float(tok) for tok in text.split()]
            except ValueError:
                raise CodeFormatError(f"cannot parse coordinates {text!r}", lineno) from None
            width = n if n is not None else (len(rows[0]) if rows else len(row))
            if len(row) != width:
                raise CodeFormatError(f"expected {width} coordinates, found {len(row)}", lineno)
            rows.append(row)
            lines.append(lineno)
    if not rows:
        raise CodeFormatError(f"{path}: no points found")
    pts = np.array(rows)
    norms = np.linalg.norm(pts, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > FILE_UNIT_TOL)
    if bad.size:
        r = int(bad[0])
        raise CodeFormatError(f"row {r} has norm {norms[r]:.9g}, not within {FILE_UNIT_TOL} of 1", lines[r])
    return SphericalCode(pts / norms[:, None], Path(path).stem)


def parse_code(spec: str, n: Optional[int] = None) -> SphericalCode:
    """``d4``, ``simplex``, ``cross`` or ``file:path``."""
    if spec.startswith("file:"):
        return load_code(spec[5:], n)
    return builtin_code(spec, n)


@dataclass
class EnergyComparison:
    code: str
    potential: str
    n: int
    N: int
    energy: float
    ulb: float
    gap: float
    relative_gap: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def compare_energy(code: SphericalCode, h: Potential) -> EnergyComparison:
    """Energy of ``code`` against the universal bound for its ``(n, N)``."""
    e = energy(code, h)
    bound = ulb(code.n, code.N, h).value if code.N >= 2 else 0.0
    gap = e - bound
    rel = gap / abs(bound) if bound else math.inf if gap else 0.0
    return EnergyComparison(code.name, h.label, code.n, code.N, e, bound, gap, rel)
