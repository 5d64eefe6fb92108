"""Shared smooth-optimization machinery for the capacity engines.

Multistart local minimization over unit state vectors, line maximization of
concave objectives along density-matrix segments, and the step-to-boundary
computation that keeps iterates positive semidefinite.
"""

import numpy as np
from scipy.optimize import minimize

from .core import LN2, fix_phase, snap_vector

STEP_CAP = 1e6


def minimize_on_sphere(
    fun_grad,
    dim: int,
    start_vectors,
    gtol: float = 1e-10,
    maxiter: int = 400,
    distinct_tol: float = 1e-6,
):
    """Multistart local minimization of f(v) over complex unit vectors.

    fun_grad(v) -> (value, g) with g the complex gradient in the convention
    df = Re(g^dag dv).  The search runs L-BFGS on the real embedding of the
    normalized objective f(x/|x|).  Returns distinct local minima as
    (value, vector) pairs sorted by value (phase-gauge fixed, deterministic
    tie-break by amplitudes).
    """

    def wrapped(x):
        r = np.linalg.norm(x)
        v = (x[:dim] + 1j * x[dim:]) / r
        f, g = fun_grad(v)
        gp = (g - v * float(np.vdot(v, g).real)) / r
        return f, np.concatenate([gp.real, gp.imag])

    found = []
    for v0 in start_vectors:
        x0 = np.concatenate([np.asarray(v0).real, np.asarray(v0).imag])
        res = minimize(
            wrapped,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": maxiter, "gtol": gtol, "ftol": 1e-15},
        )
        x = res.x
        v = x[:dim] + 1j * x[dim:]
        v = snap_vector(fix_phase(v / np.linalg.norm(v)))
        f, _ = fun_grad(v)
        found.append((float(f), v))

    distinct = []
    for f, v in sorted(found, key=_sphere_sort_key):
        if all(np.abs(v - u).max() > distinct_tol for _, u in distinct):
            distinct.append((f, v))
    return distinct


def _sphere_sort_key(item):
    f, v = item
    return (f, tuple(np.round(v.real, 9)), tuple(np.round(v.imag, 9)))


def psd_boundary_step(rho: np.ndarray, direction: np.ndarray) -> float:
    """Largest t with rho + t*direction still positive semidefinite.

    Eigenvalues of rho below 1e-14 are floored, which maps a blocked
    boundary move to a vanishingly small step instead of an error.
    """
    eigs, vecs = np.linalg.eigh(rho)
    eigs = np.clip(eigs, 1e-14, None)
    inv_sqrt = 1.0 / np.sqrt(eigs)
    m = (vecs.conj().T @ direction @ vecs) * np.outer(inv_sqrt, inv_sqrt)
    mu = float(np.linalg.eigvalsh(m)[0])
    if mu > -1e-12:
        return STEP_CAP
    return min(1.0 / (-mu), STEP_CAP)


def line_max_concave(deriv, t_max: float, rounds: int = 12) -> float:
    """Maximize a concave function on [0, t_max] given its derivative.

    Bisects on the sign of the derivative; assumes deriv(0) >= 0.  The upper
    end is probed just inside t_max: on the PSD boundary itself the clipped
    matrix log would report 0 where the true derivative diverges to -inf.
    """
    if t_max <= 0.0:
        return 0.0
    probe = t_max * (1.0 - 1e-9)
    if deriv(probe) >= 0.0:
        return probe
    lo, hi = 0.0, probe
    for _ in range(rounds):
        mid = 0.5 * (lo + hi)
        if deriv(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def traceless_part(mat: np.ndarray) -> np.ndarray:
    d = mat.shape[0]
    return mat - (np.trace(mat) / d) * np.eye(d)


def ascend_density_step(
    grad_fn,
    rho: np.ndarray,
    min_direction_norm: float = 1e-9,
    bisect_rounds: int = 12,
):
    """One projected-gradient ascent step over the density-matrix set.

    grad_fn(rho) -> Hermitian gradient ndarray.  The move direction is the
    traceless projection of the gradient, clipped at the PSD boundary, with
    the step length fixed by derivative bisection (concave objectives).
    Returns (new_rho, moved: bool).
    """
    grad = grad_fn(rho)
    direction = traceless_part(grad)
    dnorm = np.linalg.norm(direction)
    if dnorm < min_direction_norm:
        return rho, False
    direction = direction / dnorm  # unit scale keeps the bisection resolution stable
    t_hi = psd_boundary_step(rho, direction)
    if t_hi <= 0.0:
        return rho, False

    def deriv(t):
        g = grad_fn(rho + t * direction)
        return float(np.trace(g @ direction).real)

    t = line_max_concave(deriv, t_hi, rounds=bisect_rounds)
    if t <= 0.0:
        return rho, False
    return rho + t * direction, True


def log2_safe(mat: np.ndarray, clip: float = 1e-12) -> np.ndarray:
    """log2 of a PSD matrix with sub-clip eigenvalues contributing nothing."""
    eigs, vecs = np.linalg.eigh(mat)
    keep = eigs > clip
    if not keep.any():
        return np.zeros_like(mat)
    v = vecs[:, keep]
    return (v * np.log2(eigs[keep])) @ v.conj().T


__all__ = [
    "LN2",
    "ascend_density_step",
    "line_max_concave",
    "log2_safe",
    "minimize_on_sphere",
    "psd_boundary_step",
    "traceless_part",
]
