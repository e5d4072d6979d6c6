"""Floating-point estimate of the Gaussian Brascamp-Lieb constant by fixed-point iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIVERGENCE_EIG = 1e-10


class BLConstError(ValueError):
    pass


@dataclass
class BLResult:
    status: str  # CONVERGED | MAXITER | DIVERGENT
    C: float | None
    iterations: int
    history: list = field(default_factory=list)
    X: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "CONVERGED"

    def to_json(self) -> dict:
        return {"C": self.C, "iterations": self.iterations, "converged": self.converged,
                "status": self.status}


def _objective(mats, p, xs):
    m = sum(pj * b.T @ x @ b for pj, b, x in zip(p, mats, xs))
    dets = [np.linalg.det(x) for x in xs]
    return float(np.prod([d ** pj for d, pj in zip(dets, p)]) / np.linalg.det(m)), m


def bl_constant(maps, p, epsilon: float = 1e-12, max_iters: int = 1000, init=None) -> BLResult:
    """X_j <- (B_j M^-1 B_j^T)^-1 with M = sum p_j B_j^T X_j B_j, starting from X_j = I."""
    mats = [np.atleast_2d(np.asarray(b, dtype=float)) for b in maps]
    p = [float(x) for x in p]
    if len(mats) != len(p):
        raise BLConstError("one exponent per map is required")
    if not mats:
        raise BLConstError("need at least one map")
    n = mats[0].shape[1]
    for b in mats:
        if b.shape[1] != n:
            raise BLConstError("all maps need the same domain dimension")
        if np.linalg.matrix_rank(b) < b.shape[0]:
            raise BLConstError("maps must be surjective")
    if any(x <= 0 for x in p):
        raise BLConstError("exponents must be positive")
    if init is None:
        xs = [np.eye(b.shape[0]) for b in mats]
    else:
        xs = [np.atleast_2d(np.asarray(x, dtype=float)) for x in init]
        for x, b in zip(xs, mats):
            if x.shape != (b.shape[0], b.shape[0]):
                raise BLConstError("initial matrix has the wrong dimension")
            if not np.allclose(x, x.T, atol=1e-12):
                raise BLConstError("initial matrices must be symmetric")
    obj, m = _objective(mats, p, xs)
    history = [obj]
    for it in range(1, max_iters + 1):
        if np.linalg.eigvalsh(m).min() < DIVERGENCE_EIG:
            return BLResult("DIVERGENT", None, it - 1, history, xs)
        minv = np.linalg.inv(m)
        xs = [np.linalg.inv(b @ minv @ b.T) for b in mats]
        xs = [(x + x.T) / 2 for x in xs]
        new, m = _objective(mats, p, xs)
        history.append(new)
        if abs(new - obj) <= epsilon * max(abs(obj), 1e-300):
            return BLResult("CONVERGED", float(np.sqrt(new)), it, history, xs)
        obj = new
    if np.linalg.eigvalsh(m).min() < DIVERGENCE_EIG:
        return BLResult("DIVERGENT", None, max_iters, history, xs)
    return BLResult("MAXITER", float(np.sqrt(obj)), max_iters, history, xs)
