"""Entanglement-assisted capacity and related density-matrix ascents.

C_E is a concave maximization over input states, solved Frank-Wolfe style
(linearize, move toward the best vertex, exact line search) with projected
gradient refinement; the Frank-Wolfe gap at the returned iterate is a true
upper bound on suboptimality.  The single-letter coherent information gets a
multistart ascent with no global claim.  The limited-entanglement formula is
evaluated by a column-generation heuristic and flagged experimental.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import (
    LN2,
    DensityMatrix,
    Ensemble,
    QuantumChannel,
    adjoint_apply,
    channel_apply_mat,
    coords_to_mat,
    entropy_of_spectrum,
    environment_adjoint,
    environment_output,
    mat_to_coords,
    von_neumann_entropy,
)
from .c1inf import C1InfOptions, C1InfProblem, c1inf
from .info import limited_ea_objective, quantum_mutual_information
from .lp import LinearProgram, solve_lp
from .optim import ascend_density_step, line_max_concave, log2_safe


@dataclass
class CEResult:
    value: float
    rho_star: DensityMatrix
    gradient_residual: float  # Frank-Wolfe gap at termination
    iterations: int
    entanglement_rate: float  # H(rho_star), EPR pairs consumed per use


@dataclass
class QResult:
    value: float
    rho_star: DensityMatrix
    local_maxima: list  # (value, DensityMatrix), all distinct stationary points


def _entropy(mat: np.ndarray) -> float:
    return entropy_of_spectrum(np.linalg.eigvalsh(mat))


def _qmi_value(ch: QuantumChannel, mat: np.ndarray) -> float:
    return (
        _entropy(mat)
        + _entropy(channel_apply_mat(ch, mat))
        - _entropy(environment_output(ch, mat))
    )


def _qmi_grad(ch: QuantumChannel):
    eye = np.eye(ch.dim_in)

    def grad(mat):
        out = channel_apply_mat(ch, mat)
        env = environment_output(ch, mat)
        return (
            -log2_safe(mat)
            - adjoint_apply(ch, log2_safe(out))
            + environment_adjoint(ch, log2_safe(env))
            - eye / LN2
        )

    return grad


def _coherent_value(ch: QuantumChannel, mat: np.ndarray) -> float:
    return _entropy(channel_apply_mat(ch, mat)) - _entropy(environment_output(ch, mat))


def _coherent_grad(ch: QuantumChannel):
    def grad(mat):
        out = channel_apply_mat(ch, mat)
        env = environment_output(ch, mat)
        return -adjoint_apply(ch, log2_safe(out)) + environment_adjoint(ch, log2_safe(env))

    return grad


def _renormalize(mat: np.ndarray) -> np.ndarray:
    mat = (mat + mat.conj().T) / 2.0
    eigs, vecs = np.linalg.eigh(mat)
    eigs = np.clip(eigs, 0.0, None)
    mat = (vecs * eigs) @ vecs.conj().T
    return mat / mat.trace().real


def _fw_step(value_fn, grad_fn, mat):
    """One Frank-Wolfe step: gap, and the line-searched move toward the
    maximizing vertex (a pure state of the gradient's top eigenvector)."""
    g = grad_fn(mat)
    eigs, vecs = np.linalg.eigh(g)
    gap = float(eigs[-1] - np.trace(g @ mat).real)
    vertex = np.outer(vecs[:, -1], vecs[:, -1].conj())
    direction = vertex - mat

    def deriv(t):
        return float(np.trace(grad_fn(mat + t * direction) @ direction).real)

    t = line_max_concave(deriv, 1.0, rounds=40)
    nxt = mat + t * direction if t > 0 else mat
    if value_fn(nxt) < value_fn(mat):
        nxt = mat
    return gap, nxt


def c_ea(ch: QuantumChannel, tol: float = 1e-7, max_iter: int = 300) -> CEResult:
    """Entanglement-assisted capacity by certified concave maximization.

    Alternates Frank-Wolfe steps (which provide the duality-gap certificate)
    with projected-gradient refinement for fast interior convergence.
    Iterates are kept infinitesimally mixed so the matrix logs stay tame.
    """
    d = ch.dim_in
    mix = np.eye(d) / d
    mat = mix.copy()
    grad_fn = _qmi_grad(ch)
    value_fn = lambda m: _qmi_value(ch, m)
    gap = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        mat = (1.0 - 1e-9) * mat + 1e-9 * mix
        gap, mat = _fw_step(value_fn, grad_fn, mat)
        if gap < tol:
            break
        for _ in range(4):
            nxt, moved = ascend_density_step(grad_fn, mat, bisect_rounds=30)
            if not moved:
                break
            nxt = _renormalize(nxt)
            if value_fn(nxt) <= value_fn(mat):
                break
            mat = nxt
    rho_star = DensityMatrix(_renormalize(mat))
    return CEResult(
        value=quantum_mutual_information(ch, rho_star),
        rho_star=rho_star,
        gradient_residual=gap,
        iterations=iterations,
        entanglement_rate=von_neumann_entropy(rho_star),
    )


def coherent_info_max(ch: QuantumChannel, starts: int = 4, seed: int = 0) -> QResult:
    """Multistart ascent of the single-letter coherent information.

    There may be multiple local maxima; every distinct stationary point
    found is returned and the best is reported, with no global claim.
    Stationarity means a full Frank-Wolfe + projected-gradient pass stopped
    improving beyond tolerance.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    d = ch.dim_in
    rng = np.random.default_rng(seed)
    grad_fn = _coherent_grad(ch)
    value_fn = lambda m: _coherent_value(ch, m)

    start_mats = [np.eye(d) / d]
    for _ in range(max(starts, d)):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        start_mats.append(
            (1 - 1e-6) * np.outer(v, v.conj()) + 1e-6 * np.eye(d) / d
        )
    for _ in range(max(starts, d)):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        full = g @ g.conj().T
        start_mats.append(full / full.trace().real)

    locals_found = []
    for mat in start_mats:
        prev = value_fn(mat)
        for _ in range(200):
            _, mat = _fw_step(value_fn, grad_fn, mat)
            for _ in range(3):
                nxt, moved = ascend_density_step(grad_fn, mat, bisect_rounds=30)
                if not moved:
                    break
                nxt = _renormalize(nxt)
                if value_fn(nxt) <= value_fn(mat):
                    break
                mat = nxt
            cur = value_fn(mat)
            if cur - prev < 1e-9:
                break
            prev = cur
        locals_found.append((value_fn(mat), _renormalize(mat)))

    distinct = []
    for val, mat in sorted(locals_found, key=lambda t: -t[0]):
        if all(np.abs(mat - other.mat).max() > 1e-4 for _, other in distinct):
            distinct.append((val, DensityMatrix(mat)))
    best_val, best_rho = distinct[0]
    return QResult(value=best_val, rho_star=best_rho, local_maxima=distinct)


# ---------------------------------------------------------------------------
# Limited-entanglement capacity formula (experimental heuristic).
# ---------------------------------------------------------------------------

@dataclass
class LimitedEaOptions:
    seed: int = 0
    outer_rounds: int = 30
    pricing_starts: int = 6
    tol: float = 1e-6
    c1inf: C1InfOptions = field(default_factory=C1InfOptions)


@dataclass
class _DensityColumn:
    mat: np.ndarray
    coords: np.ndarray
    entropy: float
    gain: float  # H(rho) - H_env(rho), the p-linear objective piece


def _make_column(ch: QuantumChannel, mat: np.ndarray) -> _DensityColumn:
    h = _entropy(mat)
    return _DensityColumn(
        mat=mat,
        coords=mat_to_coords(mat),
        entropy=h,
        gain=h - _entropy(environment_output(ch, mat)),
    )


def _limited_master(columns, rho_bar, budget):
    d = rho_bar.shape[0]
    rows = d * d + 1
    a = np.zeros((rows, len(columns) + 1))
    c = np.zeros(len(columns) + 1)
    for j, col in enumerate(columns):
        a[: d * d, j] = col.coords
        a[d * d, j] = col.entropy
        c[j] = col.gain
    a[d * d, len(columns)] = 1.0  # slack for the entropy budget row
    b = np.concatenate([mat_to_coords(rho_bar), [budget]])
    return LinearProgram(c=c, A=a, b=b, sense="max")


def _limited_pricing(ch, tau, mu, columns, rho_bar, starts, rng, tol):
    """Ascend phi(rho) = (1-mu) H(rho) - H_env(rho) - Tr(tau rho) over densities
    parameterized as M M^dag / Tr(M M^dag)."""
    d = ch.dim_in
    eye = np.eye(d)

    def phi_grad(mat):
        env = environment_output(ch, mat)
        return (
            (1.0 - mu) * (-log2_safe(mat) - eye / LN2)
            + environment_adjoint(ch, log2_safe(env))
            + eye / LN2
            - tau
        )

    def phi(mat):
        return (
            (1.0 - mu) * _entropy(mat)
            - _entropy(environment_output(ch, mat))
            - float(np.trace(tau @ mat).real)
        )

    def fun_grad(x):
        m = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        t = float((m * m.conj()).sum().real)
        rho = (m @ m.conj().T) / t
        g = phi_grad(rho)
        p = g - float(np.trace(g @ rho).real) * eye
        gm = 2.0 * (p @ m) / t
        return -phi(rho), -np.concatenate([gm.real.ravel(), gm.imag.ravel()])

    start_mats = [np.linalg.cholesky(
        (1 - 1e-9) * col.mat + 1e-9 * eye / d) for col in columns[-3:]]
    start_mats.append(np.linalg.cholesky((1 - 1e-9) * rho_bar + 1e-9 * eye / d))
    for _ in range(starts):
        start_mats.append(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))

    found = []
    for m0 in start_mats:
        x0 = np.concatenate([np.asarray(m0, complex).real.ravel(),
                             np.asarray(m0, complex).imag.ravel()])
        x0 = x0 / np.linalg.norm(x0)
        res = minimize(fun_grad, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 300, "gtol": 1e-9, "ftol": 1e-14})
        m = (res.x[: d * d] + 1j * res.x[d * d:]).reshape(d, d)
        t = float((m * m.conj()).sum().real)
        if t < 1e-12:
            continue
        rho = _renormalize((m @ m.conj().T) / t)
        violation = phi(rho)
        if violation > tol:
            found.append((violation, rho))
    found.sort(key=lambda it: -it[0])
    return found


def limited_ea(ch: QuantumChannel, budget: float, opts: LimitedEaOptions = None):
    """EXPERIMENTAL: value of the limited-entanglement capacity formula.

    Maximizes over ensembles of density matrices whose average input entropy
    stays within `budget` bits, via a column-generation master over density
    columns, dual-guided pricing, and average-state moves accepted only on
    true-objective improvement.  Returns (value, Ensemble).  The endpoints
    reproduce the unassisted Holevo engine (budget 0) and c_ea (budget >=
    log2 d); in between the value is a heuristic lower evaluation of the
    formula with no capacity claim.
    """
    if budget < 0:
        raise ValueError("entanglement budget must be nonnegative")
    opts = opts or LimitedEaOptions()
    rng = np.random.default_rng(opts.seed)
    d = ch.dim_in
    eye = np.eye(d)

    base = c1inf(C1InfProblem(ch, options=opts.c1inf))
    top = c_ea(ch)

    columns = []
    coords_seen = []

    def add_column(mat):
        col = _make_column(ch, _renormalize(mat))
        if budget <= 1e-12 and col.entropy > 1e-12:
            return False  # a zero budget admits only pure columns
        if all(np.abs(col.coords - s).max() > 1e-9 for s in coords_seen):
            columns.append(col)
            coords_seen.append(col.coords)
            return True
        return False

    for p, s in base.ensemble.items():
        add_column(s.projector())
    add_column(top.rho_star.mat)
    add_column(eye / d)

    def anchor(mat):
        _, vecs = np.linalg.eigh(_renormalize(mat))
        for k in range(d):
            add_column(np.outer(vecs[:, k], vecs[:, k].conj()))

    def solve_at(rho_bar):
        lp = _limited_master(columns, rho_bar, budget)
        sol = solve_lp(lp)
        if sol.status != "optimal":
            return None
        total = _entropy(channel_apply_mat(ch, rho_bar)) + sol.objective
        return {"sol": sol, "rho": rho_bar, "total": total}

    # pick the best feasible starting average state
    candidates = [base.rho.mat, top.rho_star.mat, eye / d]
    cur = None
    for mat in candidates:
        mat = _renormalize(mat)
        anchor(mat)
        trial = solve_at(mat)
        if trial is not None and (cur is None or trial["total"] > cur["total"]):
            cur = trial
    if cur is None:
        raise RuntimeError("limited-entanglement master could not be seeded")

    for _ in range(opts.outer_rounds):
        total_before = cur["total"]
        duals = cur["sol"].duals
        tau = coords_to_mat(duals[: d * d], d)
        mu = max(float(duals[d * d]), 0.0)

        added = False
        for _violation, rho in _limited_pricing(
            ch, tau, mu, columns, cur["rho"], opts.pricing_starts, rng, opts.tol
        ):
            added = add_column(rho) or added
        if added:
            nxt = solve_at(cur["rho"])
            if nxt is not None:
                cur = nxt

        # dual-guided move of the average state, accepted on true improvement
        def u_grad(mat):
            out = channel_apply_mat(ch, mat)
            return -adjoint_apply(ch, log2_safe(out)) - eye / LN2 + tau

        cand, moved = ascend_density_step(u_grad, cur["rho"], bisect_rounds=30)
        if moved:
            cand = _renormalize(cand)
            delta = cand - cur["rho"]
            for frac in (1.0, 0.5, 0.25, 0.125):
                trial_mat = _renormalize(cur["rho"] + frac * delta)
                anchor(trial_mat)
                trial = solve_at(trial_mat)
                if trial is not None and trial["total"] > cur["total"] + opts.tol / 10.0:
                    cur = trial
                    break
        if not added and cur["total"] - total_before <= opts.tol:
            break

    sol = cur["sol"]
    probs = np.clip(sol.x[: len(columns)], 0.0, None)
    keep = probs > 1e-9
    probs = probs[keep] / probs[keep].sum()
    members = [DensityMatrix(c.mat) for c, k in zip(columns, keep) if k]
    ensemble = Ensemble(list(zip(probs, members)))
    value, _ = limited_ea_objective(ch, ensemble)
    return value, ensemble
