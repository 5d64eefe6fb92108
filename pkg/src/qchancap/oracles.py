"""Brute-force grid oracles for desk-scale verification.

Slow, simple, and independent of the optimization engines: dense angle grids
for accessible information, a Bloch-ball sweep for density objectives, and a
probability-simplex enumeration for restricted Holevo chi.  Everything here
is limited to qubit inputs/outputs; grids blow up beyond d = 2.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    DimensionError,
    Ensemble,
    QuantumChannel,
    channel_apply_mat,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


@dataclass(frozen=True)
class GridSpec:
    resolution: float
    domain: str  # "bloch-ball" | "sphere-angles" | "simplex"

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("grid resolution must be positive")


def bloch_vector(mat: np.ndarray) -> np.ndarray:
    return np.array([float(np.trace(mat @ s).real) for s in PAULIS])


def _h2(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    m = p > 1e-12
    out[m] -= p[m] * np.log2(p[m])
    m = (1.0 - p) > 1e-12
    out[m] -= (1.0 - p[m]) * np.log2(1.0 - p[m])
    return out


def _xlog2x(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    m = p > 1e-12
    out[m] = p[m] * np.log2(p[m])
    return out


def grid_accessible_info_2d(ens: Ensemble, step: float) -> float:
    """Lower bound on I_acc of a qubit ensemble by measurement grids.

    Sweeps (a) every projective measurement, directions parameterized by two
    angles, and (b) a two-angle family of symmetric 3-outcome rank-one POVMs
    (planar trines: in-plane rotation plus a tilt of the plane).  Returns the
    best mutual information found.
    """
    if ens.dim != 2:
        raise DimensionError("the accessible-information grid handles qubits only")
    probs = np.asarray(ens.probs)
    blochs = np.stack([bloch_vector(m) for m in ens.density_mats()])  # (k, 3)
    best = 0.0

    # (a) projective measurements: outcome directions n and -n on the sphere
    polar = np.arange(0.0, np.pi / 2 + step, step)
    azim = np.arange(0.0, 2 * np.pi, step)
    for chunk in np.array_split(azim, max(1, azim.size // 512)):
        sa, ca = np.sin(polar)[:, None], np.cos(polar)[:, None]
        n = np.stack(
            [
                (sa * np.cos(chunk)[None, :]).ravel(),
                (sa * np.sin(chunk)[None, :]).ravel(),
                (ca * np.ones_like(chunk)[None, :]).ravel(),
            ]
        )  # (3, N)
        dots = blochs @ n  # (k, N)
        p_up = 0.5 * (1.0 + dots)
        avg_up = probs @ p_up
        cond = (probs[:, None] * _h2(p_up)).sum(axis=0)
        info = _h2(avg_up) - cond
        best = max(best, float(info.max()))

    # (b) symmetric planar trines: rotation gamma within a plane tilted by beta
    gammas = np.arange(0.0, 2 * np.pi / 3, step)
    betas = np.arange(0.0, np.pi, max(step, np.pi / max(1, int(np.pi / step))))
    for beta in betas:
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, np.sin(beta), np.cos(beta)])
        infos = np.zeros_like(gammas)
        avg_out = np.zeros((gammas.size, 3))
        cond = np.zeros((gammas.size, 3))
        for j in range(3):
            ang = gammas + 2 * np.pi * j / 3
            m = np.outer(np.cos(ang), e1) + np.outer(np.sin(ang), e2)  # (G, 3)
            pj = (1.0 + m @ blochs.T) / 3.0  # (G, k)
            avg_out[:, j] = pj @ probs
            cond[:, j] = _xlog2x(pj) @ probs
        infos = cond.sum(axis=1) - _xlog2x(avg_out).sum(axis=1)
        best = max(best, float(infos.max()))
    return best


def _qubit_channel_affine(ch: QuantumChannel):
    """Affine Bloch action of a qubit-to-qubit channel: n_out = M n + t."""
    if ch.dim_in != 2 or ch.dim_out != 2:
        raise DimensionError("Bloch affine form needs a qubit-to-qubit channel")
    t = bloch_vector(channel_apply_mat(ch, np.eye(2) / 2))
    m = np.zeros((3, 3))
    for a in range(3):
        m[:, a] = bloch_vector(channel_apply_mat(ch, PAULIS[a] / 2))
    return m, t


def _environment_affine(ch: QuantumChannel):
    """Environment matrix as an affine function of the Bloch vector."""
    k = len(ch.kraus)
    w0 = np.empty((k, k), dtype=complex)
    ws = [np.empty((k, k), dtype=complex) for _ in range(3)]
    for i in range(k):
        for j in range(k):
            prod = ch.kraus[j].conj().T @ ch.kraus[i]
            w0[i, j] = 0.5 * np.trace(prod)
            for a in range(3):
                ws[a][i, j] = 0.5 * np.trace(PAULIS[a] @ prod)
    return w0, ws


def _entropy_batch(mats: np.ndarray) -> np.ndarray:
    eigs = np.linalg.eigvalsh(mats)
    eigs = np.clip(eigs, 0.0, 1.0)
    mask = eigs > 1e-12
    terms = np.where(mask, eigs * np.log2(np.where(mask, eigs, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def grid_density_objective(
    ch: QuantumChannel, objective: str, step: float, tau: np.ndarray = None
):
    """Exhaustive Bloch-ball maximization of a named density functional.

    objective is one of "qmi" (quantum mutual information), "coherent"
    (coherent information), or "fixed-dual" (H(N(rho)) - Tr(tau rho), tau
    required).  Returns (value, maximizing DensityMatrix).
    """
    if objective not in ("qmi", "coherent", "fixed-dual"):
        raise ValueError(f"unknown objective {objective!r}")
    if objective == "fixed-dual" and tau is None:
        raise ValueError("fixed-dual needs tau")
    m, t = _qubit_channel_affine(ch)
    if objective != "fixed-dual":
        w0, ws = _environment_affine(ch)
    if tau is not None:
        tau_tr = float(np.trace(tau).real)
        tau_bloch = bloch_vector(tau)

    axis = np.arange(-1.0, 1.0 + step / 2, step)
    best_val, best_n = -np.inf, np.zeros(3)
    for z in axis:
        xs, ys = np.meshgrid(axis, axis, indexing="ij")
        keep = xs**2 + ys**2 + z**2 <= 1.0 + 1e-12
        if not keep.any():
            continue
        n = np.stack([xs[keep], ys[keep], np.full(keep.sum(), z)], axis=1)  # (N, 3)
        n_out = n @ m.T + t
        h_out = _h2(0.5 * (1.0 + np.linalg.norm(n_out, axis=1)))
        if objective == "fixed-dual":
            vals = h_out - 0.5 * (tau_tr + n @ tau_bloch)
        else:
            env = w0[None, :, :] + np.tensordot(n, np.stack(ws), axes=(1, 0))
            h_env = _entropy_batch(env)
            if objective == "coherent":
                vals = h_out - h_env
            else:
                h_in = _h2(0.5 * (1.0 + np.linalg.norm(n, axis=1)))
                vals = h_in + h_out - h_env
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_n = float(vals[k]), n[k]
    rho = 0.5 * (np.eye(2) + best_n[0] * SX + best_n[1] * SY + best_n[2] * SZ)
    return best_val, DensityMatrix(rho)


def simplex_enumerate_chi(ch: QuantumChannel, states: list, step: float):
    """Dense probability-simplex maximization of chi of the channel outputs.

    Restricted to at most 4 signal states and qubit outputs (closed-form
    two-level entropies keep the sweep vectorizable).  Returns (value, p).
    """
    k = len(states)
    if k > 4:
        raise DimensionError("simplex enumeration handles at most 4 states")
    if ch.dim_out != 2:
        raise DimensionError("simplex enumeration needs qubit outputs")
    outs = [channel_apply_mat(ch, v.projector()) for v in states]
    blochs = np.stack([bloch_vector(o) for o in outs])  # (k, 3)
    h_i = np.array([_entropy_batch(o[None, :, :])[0] for o in outs])

    n = int(round(1.0 / step))
    state = {"val": -np.inf, "p": None}

    def consider(probs):
        for chunk in np.array_split(probs, max(1, probs.shape[0] // 200_000)):
            avg = chunk @ blochs
            chi = _h2(0.5 * (1.0 + np.linalg.norm(avg, axis=1))) - chunk @ h_i
            j = int(np.argmax(chi))
            if chi[j] > state["val"]:
                state["val"], state["p"] = float(chi[j]), chunk[j].copy()

    if k == 1:
        consider(np.array([[1.0]]))
    elif k <= 3:
        consider(_compositions(n, k) / n)
    else:
        # stream the 4-state simplex one leading coordinate at a time
        for first in range(n + 1):
            rest = _compositions(n - first, 3)
            block = np.hstack([np.full((rest.shape[0], 1), first), rest]) / n
            consider(block)
    return state["val"], state["p"]


def _compositions(n: int, k: int) -> np.ndarray:
    """All k-part compositions of n as an integer array (rows sum to n)."""
    if k == 1:
        return np.array([[n]])
    rows = []
    for first in range(n + 1):
        rest = _compositions(n - first, k - 1)
        rows.append(np.hstack([np.full((rest.shape[0], 1), first), rest]))
    return np.vstack(rows)
