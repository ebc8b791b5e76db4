"""Perimeter minimization under exact area constraints.

Each iteration solves the Newton-KKT system of the Lagrangian
L - sum_r lam_r (A_r - a_r) with the exact sparse Hessian, regularized by
``mu`` times the point-displacement metric when the step is not a
descent step.  Every trial point is projected back onto the area
constraints by a weighted minimal-norm Newton iteration (junctions move
freely, offsets are charged in chord units), and a step is accepted only
if the perimeter does not increase.  The multipliers of the area
constraints are the discrete pressures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .discrete import DiscreteGraph

AREA_TOL = 1e-9
_PROJ_TOL = 1e-11
# rounding allowance when comparing perimeters of accepted steps
_NONINCREASE_SLACK = 8 * np.finfo(float).eps


class TopologyEvent(RuntimeError):
    """An edge collapsed below the minimum length; no surgery is attempted."""

    def __init__(self, edge: int, length: float, graph: DiscreteGraph):
        super().__init__(f"edge {edge} collapsed to length {length:.3g} in template {graph.name or '?'}")
        self.edge = edge
        self.length = length
        self.graph = graph

    def to_dict(self) -> dict:
        return {"event": "edge-collapse", "edge": self.edge, "length": self.length, "template": self.graph.name}


class RelaxError(RuntimeError):
    pass


@dataclass
class RelaxResult:
    graph: DiscreteGraph
    perimeter: float
    multipliers: np.ndarray
    iterations: int
    converged: bool
    grad_norm: float
    area_residual: float
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "template": self.graph.name,
            "perimeter": self.perimeter,
            "multipliers": [float(p) for p in self.multipliers],
            "iterations": self.iterations,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
            "area_residual": self.area_residual,
        }


def _metric(jac: sp.csr_matrix, n: int) -> sp.csr_matrix:
    return (jac.T @ jac + 1e-12 * sp.identity(n)).tocsc()


def _projection_weights(g: DiscreteGraph, x: np.ndarray) -> np.ndarray:
    """Inverse metric for area projection: junctions move freely, offsets in chord units."""
    w = np.ones(g.n_dof)
    chord = g.chord_lengths(x)
    w[g.n_jdof :] = np.repeat(1.0 / np.maximum(chord, 1e-3) ** 2, g.n_pts - 2) / (g.n_pts - 1)
    return w


def _constraint_residual(g: DiscreteGraph, x: np.ndarray) -> np.ndarray:
    return (g.region_areas(x) - g.targets)[:-1]


def project_areas(g: DiscreteGraph, x: np.ndarray | None = None, tol: float = _PROJ_TOL, max_iter: int = 40):
    """Move ``x`` (default: the graph's own) onto the area constraints.

    Each Newton step is the minimal-norm correction in the metric of
    ``_projection_weights``, with step halving.
    Returns the projected vector, or None on failure.  When ``x`` is None
    the graph is updated in place and a boolean is returned.
    """
    inplace = x is None
    x = (g.x if inplace else x).copy()
    if g.n_regions == 1:
        if inplace:
            return True
        return x
    r = _constraint_residual(g, x)
    for _ in range(max_iter):
        err = float(np.abs(r).max())
        if err < tol:
            break
        jac = g.jacobian(x)
        C = g.area_jacobian(x, jac)[:-1]
        W = C.T * _projection_weights(g, x)[:, None]
        dx = -W @ np.linalg.solve(C @ W, r)
        alpha = 1.0
        for _ in range(30):
            x1 = x + alpha * dx
            if not g.validity_problems(x1):
                r1 = _constraint_residual(g, x1)
                if np.abs(r1).max() < err:
                    x, r = x1, r1
                    break
            alpha *= 0.5
        else:
            return False if inplace else None
    else:
        if float(np.abs(r).max()) >= tol:
            return False if inplace else None
    if inplace:
        g.x = x
        return True
    return x


def constrained_gradient(g: DiscreteGraph, x: np.ndarray | None = None):
    """(residual of grad L - C^T lam, lam) with least-squares multipliers."""
    x = g.x if x is None else x
    jac = g.jacobian(x)
    gl = g.length_gradient(x, jac)
    C = g.area_jacobian(x, jac)[:-1]
    if C.shape[0] == 0:
        return gl, np.zeros(0)
    lam, *_ = np.linalg.lstsq(C.T, gl, rcond=None)
    return gl - C.T @ lam, lam


def _gauge(lam: np.ndarray) -> np.ndarray:
    full = np.append(lam, 0.0)
    return full - full.mean()


def relax(
    g: DiscreteGraph,
    max_iters: int = 100,
    tol: float = 1e-9,
    min_length: float = 1e-3,
    step: float = 1.0,
) -> RelaxResult:
    """Minimize the perimeter of ``g`` in place, keeping the region areas at their targets."""
    if not g.edges or g.n_regions == 1:
        g.multipliers = np.zeros(g.n_regions)
        return RelaxResult(g, 0.0, g.multipliers, 0, True, 0.0, 0.0, [0.0])
    if not project_areas(g):
        raise RelaxError(f"{g.name}: initial area projection failed")
    L = g.perimeter()
    history = [L]
    mu = 0.0
    res, lam = constrained_gradient(g)
    grad_norm = float(np.abs(res).max())
    it = 0
    converged = grad_norm < tol
    while not converged and it < max_iters:
        it += 1
        x = g.x
        jac = g.jacobian(x)
        gl = g.length_gradient(x, jac)
        C = g.area_jacobian(x, jac)[:-1]
        H, _ = g.lagrangian_hessian(np.append(lam, 0.0), x, jac)
        G = _metric(jac, g.n_dof)
        r = _constraint_residual(g, x)
        Cs = sp.csr_matrix(C)
        accepted = False
        for _ in range(12):
            K = sp.bmat([[H + mu * G, Cs.T], [Cs, None]], format="csc")
            sol = spsolve(K, np.concatenate([-gl, -r]))
            dx, nu = sol[: g.n_dof], sol[g.n_dof :]
            if np.all(np.isfinite(sol)) and gl @ dx < 0:
                alpha = step
                for _ in range(12):
                    x1 = project_areas(g, x + alpha * dx)
                    if x1 is not None:
                        L1 = g.perimeter(x1)
                        if L1 <= L * (1 + _NONINCREASE_SLACK):
                            accepted = True
                            break
                    alpha *= 0.5
            if accepted:
                break
            mu = max(10.0 * mu, 1e-6)
        if not accepted:
            break
        assert L1 <= L * (1 + _NONINCREASE_SLACK)
        g.x = x1
        L = L1
        history.append(L)
        mu = mu / 10.0 if mu > 1e-9 else 0.0
        chords = g.chord_lengths()
        k = int(np.argmin(chords))
        if chords[k] < min_length:
            g.multipliers = _gauge(lam)
            raise TopologyEvent(k, float(chords[k]), g)
        res, lam = constrained_gradient(g)
        grad_norm = float(np.abs(res).max())
        converged = grad_norm < tol
    g.multipliers = _gauge(lam)
    area_res = float(np.abs(g.region_areas() - g.targets).max())
    return RelaxResult(g, L, g.multipliers, it, converged, grad_norm, area_res, history)
