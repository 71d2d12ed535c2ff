"""Extremization of the entanglement of projection over taggant bases.

The objective is vectorized: it takes a batch of taggant unitaries and
returns one value per unitary, so the coarse scan is a single numpy call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

GRID_2 = 64
N_STARTS = 3
XATOL = 1e-8
BOUND_SLACK = 1e-14
SCAN_4 = 4096
SCAN_SEED = 0

BatchObjective = Callable[[np.ndarray], np.ndarray]
ScalarObjective = Callable[[np.ndarray], float]

# Givens planes of the 4-dimensional parametrization, in application order
PLANES_4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class Extremum:
    value: float
    params: np.ndarray
    unitary: np.ndarray


def unitaries_2(params: np.ndarray) -> np.ndarray:
    """Batch of 2x2 bases from ``(theta, phi)`` rows."""
    params = np.atleast_2d(params)
    theta, phi = params[:, 0], params[:, 1]
    a = np.cos(theta).astype(np.complex128)
    b = np.exp(1j * phi) * np.sin(theta)
    u = np.empty((len(theta), 2, 2), dtype=np.complex128)
    u[:, 0, 0] = a
    u[:, 0, 1] = b
    u[:, 1, 0] = -b.conj()
    u[:, 1, 1] = a.conj()
    return u


def unitaries_4(params: np.ndarray) -> np.ndarray:
    """Batch of 4x4 bases: product of six complex Givens rotations (12 angles per row)."""
    params = np.atleast_2d(params)
    g = len(params)
    u = np.broadcast_to(np.eye(4, dtype=np.complex128), (g, 4, 4)).copy()
    for k, (i, j) in enumerate(PLANES_4):
        theta, phi = params[:, 2 * k], params[:, 2 * k + 1]
        c = np.cos(theta)
        s = np.exp(1j * phi) * np.sin(theta)
        ri, rj = u[:, i, :].copy(), u[:, j, :].copy()
        u[:, i, :] = c[:, None] * ri + s[:, None] * rj
        u[:, j, :] = -s.conj()[:, None] * ri + c[:, None] * rj
    return u


def _candidates(dim: int) -> tuple[np.ndarray, np.ndarray, Callable[[np.ndarray], np.ndarray]]:
    """Scan points, initial simplex step and the parameter->unitary map."""
    if dim == 2:
        theta = np.linspace(0.0, np.pi / 2, GRID_2)
        phi = np.linspace(0.0, 2 * np.pi, GRID_2, endpoint=False)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        pts = np.column_stack([tt.ravel(), pp.ravel()])
        step = np.array([theta[1] - theta[0], phi[1] - phi[0]])
        return pts, step, unitaries_2
    if dim == 4:
        rng = np.random.default_rng(SCAN_SEED)
        hi = np.tile([np.pi / 2, 2 * np.pi], 6)
        pts = rng.uniform(0.0, 1.0, size=(SCAN_4, 12)) * hi
        # include the identity basis so product taggants are scored exactly
        pts[0] = 0.0
        return pts, hi / 4, unitaries_4
    raise ValueError(f"taggant dimension {dim} is not supported (expected 2 or 4)")


def extremize(
    objective: BatchObjective,
    dim: int,
    maximize: bool,
    scalar: ScalarObjective | None = None,
    bound: float | None = None,
) -> Extremum:
    """Coarse scan followed by Nelder-Mead refinement from the best scan points.

    ``scalar`` is an optional fast single-point version of ``objective``
    taking the raw parameter vector. ``bound`` is a value the objective can
    never beat; a scan point reaching it (to rounding) is returned as is.
    Ties on the scan are broken by lowest scan index, so the result does not
    depend on evaluation order.
    """
    sign = -1.0 if maximize else 1.0
    pts, step, to_unitary = _candidates(dim)
    vals = sign * objective(to_unitary(pts))
    order = np.argsort(vals, kind="stable")

    best_x = pts[order[0]]
    best_f = float(vals[order[0]])
    if bound is not None and best_f <= sign * bound + BOUND_SLACK:
        return Extremum(sign * best_f, best_x, to_unitary(best_x[None, :])[0])

    if scalar is None:
        def signed(x: np.ndarray) -> float:
            return float(sign * objective(to_unitary(x[None, :]))[0])
    else:
        def signed(x: np.ndarray) -> float:
            return sign * scalar(x)

    n = pts.shape[1]
    for idx in order[:N_STARTS]:
        x0 = pts[idx]
        simplex = np.vstack([x0, x0 + np.diag(step)])
        res = minimize(
            signed,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": XATOL,
                "fatol": np.inf,
                "maxiter": 1000 * n,
                "maxfev": 2000 * n,
            },
        )
        if res.fun < best_f:
            best_f, best_x = float(res.fun), res.x
    return Extremum(sign * best_f, best_x, to_unitary(best_x[None, :])[0])
