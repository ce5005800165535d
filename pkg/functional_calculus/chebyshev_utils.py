"""Tensor-product Chebyshev interpolation on a box, and its evaluation at commuting matrices."""
from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C

from core.exceptions import ApproximationError

# directions u + gamma v tried when the atoms are interpolated along a line
LINE_SLOPES = (0.0, 0.5, 1.0, -0.5, -1.0, 2.0, -2.0, 0.25, -0.25)


def is_degenerate(values: np.ndarray) -> bool:
    lo, hi = float(np.min(values)), float(np.max(values))
    return 0.5 * (hi - lo) <= 1e-12 * max(1.0, abs(lo), abs(hi))


def interval(values: np.ndarray) -> tuple[float, float]:
    """(center, half-width) of the smallest interval holding values; degenerate ones get width 2."""
    lo, hi = float(np.min(values)), float(np.max(values))
    half = 1.0 if is_degenerate(values) else 0.5 * (hi - lo)
    return 0.5 * (lo + hi), half


def to_unit(values, box: tuple[float, float]) -> np.ndarray:
    center, half = box
    return (np.asarray(values, dtype=float) - center) / half


def fit_tensor(
    func: Callable[[float, float], float],
    box_u: tuple[float, float],
    box_v: tuple[float, float],
    degree: int,
) -> np.ndarray:
    """Coefficients c[a, b] of sum c[a, b] T_a(x) T_b(y) interpolating func at Chebyshev points."""
    nodes = C.chebpts2(degree + 1)
    us = box_u[0] + box_u[1] * nodes
    vs = box_v[0] + box_v[1] * nodes
    grid = np.array([[func(u, v) for v in vs] for u in us], dtype=float)
    vander = C.chebvander(nodes, degree)
    coef = np.linalg.solve(vander, grid)
    return np.linalg.solve(vander, coef.T).T


def fit_line(
    func: Callable[[float, float], float],
    box_u: tuple[float, float],
    v: float,
    degree: int,
) -> np.ndarray:
    """Coefficients c[a, 0] interpolating u -> func(u, v) at Chebyshev points, v held fixed."""
    nodes = C.chebpts2(degree + 1)
    values = np.array([func(box_u[0] + box_u[1] * x, v) for x in nodes], dtype=float)
    return np.linalg.solve(C.chebvander(nodes, degree), values)[:, None]


def atom_line(x: np.ndarray, y: np.ndarray) -> tuple[float, tuple[float, float]]:
    """
    A slope gamma that separates the points x + gamma y, and the box of those values.

    The slope with the widest minimum spacing wins; coincident projections leave no usable line.
    """
    best, spacing = 0.0, -1.0
    for gamma in LINE_SLOPES:
        w = np.sort(x + gamma * y)
        gap = float(np.min(np.diff(w))) if w.size > 1 else 1.0
        if gap > spacing:
            best, spacing = gamma, gap
    if spacing <= 1e-12:
        raise ApproximationError("Atoms do not separate along any tried direction.")
    return best, interval(x + best * y)


def interpolate_points(w: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of the polynomial of degree len(w) - 1 through (w, values)."""
    return np.linalg.solve(C.chebvander(np.asarray(w, dtype=float), len(w) - 1), values)


def evaluate_tensor(coef: np.ndarray, box_u, box_v, u, v) -> np.ndarray:
    return C.chebval2d(to_unit(u, box_u), to_unit(v, box_v), coef)


def chebyshev_powers(x: np.ndarray, degree: int) -> list[np.ndarray]:
    """T_0(X), ..., T_degree(X) for a square matrix X by the three-term recurrence."""
    ident = np.eye(x.shape[0], dtype=x.dtype)
    out = [ident]
    if degree >= 1:
        out.append(x.copy())
    for _ in range(2, degree + 1):
        out.append(2.0 * x @ out[-1] - out[-2])
    return out


def evaluate_on_matrix(coef: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum c[a] T_a(W) for a square W already mapped to [-1, 1]."""
    powers = chebyshev_powers(w, len(coef) - 1)
    out = np.zeros_like(powers[0])
    for c, tw in zip(coef, powers):
        out = out + c * tw
    return out


def evaluate_on_matrices(coef: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """sum c[a, b] T_a(X) T_b(Y) for commuting X, Y already mapped to the unit box."""
    tx = chebyshev_powers(x, coef.shape[0] - 1)
    ty = chebyshev_powers(y, coef.shape[1] - 1)
    out = np.zeros_like(tx[0])
    for a in range(coef.shape[0]):
        inner = np.zeros_like(tx[0])
        for b in range(coef.shape[1]):
            if coef[a, b] != 0.0:
                inner = inner + coef[a, b] * ty[b]
        out = out + tx[a] @ inner
    return out
