"""The C_{1,1} engine: alternate ensemble and measurement optimization.

The measurement half is an LP over rank-one POVM weights solved by column
generation (the POVM completeness constraint supplies the d^2 rows, mutual
information is linear in the weights).  The ensemble half fixes the
measurement, which turns the channel into a classical-output channel, and
reuses the C_{1,inf} engine on it unchanged.  Neither half is guaranteed to
find a global optimum, so runs are restarted and per-restart values kept.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .core import (
    DimensionError,
    Ensemble,
    HermitianCoords,
    HermitianMatrix,
    Povm,
    PureState,
    QuantumChannel,
    channel_ensemble,
    coords_to_hermitian,
    fix_phase,
    mat_to_coords,
    normalized_state,
    random_pure,
    square_root_measurement,
)
from .c1inf import C1InfOptions, C1InfProblem, c1inf
from .info import accessible_information_given, holevo_chi
from .lp import LinearProgram, PricingOutcome, column_generation
from .optim import minimize_on_sphere

ZERO_OUTCOME = 1e-14  # below this overlap an outcome never occurs


@dataclass
class C11Options:
    restarts: int = 8
    seed: int = 0
    alternations: int = 100
    alt_tol: float = 1e-7
    starts: int = 8
    pricing_tol: float = 1e-7
    measurement_rounds: int = 60
    c1inf: C1InfOptions = field(default_factory=C1InfOptions)


@dataclass
class C11Result:
    value: float
    ensemble: Ensemble  # input ensemble
    povm: Povm
    restarts_used: int
    restart_values: list
    status: str  # "converged" | "round-limit"
    trace: list  # per-iterate dicts with value and chi of the output ensemble


def _ensemble_arrays(out_ens: Ensemble):
    probs = np.asarray(out_ens.probs)
    mats = [np.asarray(m) for m in out_ens.density_mats()]
    avg = sum(p * m for p, m in zip(probs, mats))
    return probs, mats, avg


def info_coefficient(probs, mats, avg, w: np.ndarray) -> float:
    """Per-direction mutual-information coefficient c(w).

    c(w) = sum_i p_i (w^dag s_i w) log2[(w^dag s_i w) / (w^dag avg w)]; the
    weight q of an outcome multiplies this linearly.  Outcomes that never
    occur (w^dag avg w below 1e-14) contribute zero.
    """
    b = float(np.vdot(w, avg @ w).real)
    if b < ZERO_OUTCOME:
        return 0.0
    total = 0.0
    for p, m in zip(probs, mats):
        a = float(np.vdot(w, m @ w).real)
        if a > ZERO_OUTCOME and p > 0.0:
            total += p * a * np.log2(a / b)
    return total


def measurement_lp(out_ens: Ensemble, directions: list) -> LinearProgram:
    """Master LP: maximize sum_j q_j c(w_j) subject to the POVM completeness
    rows sum_j q_j w_j w_j^dag = I (d^2 Hermitian coordinates)."""
    probs, mats, avg = _ensemble_arrays(out_ens)
    d = out_ens.dim
    cols, coefs = [], []
    for w in directions:
        if w.dim != d:
            raise DimensionError("direction dimension does not match the ensemble")
        cols.append(mat_to_coords(w.projector()))
        coefs.append(info_coefficient(probs, mats, avg, w.vec))
    return LinearProgram(
        c=np.array(coefs),
        A=np.stack(cols, axis=1),
        b=mat_to_coords(np.eye(d)),
        sense="max",
        tags=list(directions),
    )


def _measurement_objective(probs, mats, avg, lam: np.ndarray):
    """Maximize c(w) - w^dag lam w; implemented as a minimization of its
    negative with the complex gradient."""

    def fun_grad(v):
        b = float(np.vdot(v, avg @ v).real)
        if b < ZERO_OUTCOME:
            return 0.0 + float(np.vdot(v, lam @ v).real), 2.0 * (lam @ v)
        value = 0.0
        grad = np.zeros_like(v)
        for p, m in zip(probs, mats):
            if p <= 0.0:
                continue
            a = float(np.vdot(v, m @ v).real)
            if a > ZERO_OUTCOME:
                ratio = np.log2(a / b)
                value += p * a * ratio
                grad = grad + p * ratio * (m @ v)
        f = -(value - float(np.vdot(v, lam @ v).real))
        g = -2.0 * (grad - lam @ v)
        return f, g

    return fun_grad


def measurement_pricing(
    out_ens: Ensemble,
    lam: HermitianMatrix,
    starts: int,
    rng,
    tol: float = 1e-7,
) -> PricingOutcome:
    """Search for directions whose coefficient beats the dual: c(w) > w^dag lam w.

    Returns a PricingOutcome whose columns carry the POVM coordinate vector,
    the coefficient c(w), and the direction itself as the tag.  Reduced costs
    use the minimization convention (negative improves).
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    probs, mats, avg = _ensemble_arrays(out_ens)
    d = out_ens.dim
    fun_grad = _measurement_objective(probs, mats, avg, lam.mat)
    start_vecs = [random_pure(rng, d).vec for _ in range(starts)]
    minima = minimize_on_sphere(fun_grad, d, start_vecs)
    columns = []
    best = 0.0
    for f, v in minima:
        violation = -f  # c(w) - w^dag lam w
        if violation > tol:
            w = PureState(v)
            columns.append((mat_to_coords(w.projector()), info_coefficient(probs, mats, avg, v), w))
            best = max(best, violation)
    return PricingOutcome(columns=columns, best_reduced_cost=-best)


def _seed_directions(out_ens: Ensemble) -> list:
    """Orthonormal basis, average-output eigenbasis, and (for pure outputs)
    the square-root-measurement directions.  Feasibility is guaranteed by the
    orthonormal block; the rest is warm-start material."""
    probs, mats, avg = _ensemble_arrays(out_ens)
    d = out_ens.dim
    dirs = [PureState(e) for e in np.eye(d)]
    _, vecs = np.linalg.eigh(avg)
    dirs.extend(PureState(fix_phase(vecs[:, k])) for k in range(d))
    pure_vecs = []
    for m in mats:
        eigs, v = np.linalg.eigh(m)
        if eigs[-1] > 1.0 - 1e-9:
            pure_vecs.append(normalized_state(fix_phase(v[:, -1])))
    if len(pure_vecs) == len(mats):
        srm = square_root_measurement(pure_vecs)
        dirs.extend(srm.directions)
    out, seen = [], []
    for w in dirs:
        col = mat_to_coords(w.projector())
        if all(np.abs(col - c).max() > 1e-9 for c in seen):
            out.append(w)
            seen.append(col)
    return out


def optimize_measurement(out_ens: Ensemble, opts: C11Options = None, rng=None):
    """Best rank-one POVM for a fixed output ensemble, by column generation.

    Returns (povm, accessible information).  The final weights are re-fit by
    nonnegative least squares on the selected directions so completeness
    holds to POVM tolerance despite LP roundoff.
    """
    opts = opts or C11Options()
    if rng is None:
        rng = np.random.default_rng(opts.seed)
    master = measurement_lp(out_ens, _seed_directions(out_ens))
    probs, mats, avg = _ensemble_arrays(out_ens)

    def pricing(duals):
        lam = coords_to_hermitian(HermitianCoords(out_ens.dim, duals))
        return measurement_pricing(out_ens, lam, opts.starts, rng, tol=opts.pricing_tol)

    sol, rounds, converged = column_generation(
        master, pricing, tol=opts.pricing_tol, max_rounds=opts.measurement_rounds
    )
    keep = sol.x > 1e-10
    directions = [w for w, k in zip(master.tags, keep) if k]
    # re-fit the weights on the selected directions only (an enlarged fit
    # would be degenerate and free to walk away from the optimized POVM)
    a = np.stack([mat_to_coords(w.projector()) for w in directions], axis=1)
    weights, _ = nnls(a, mat_to_coords(np.eye(out_ens.dim)))
    povm = _complete_povm(weights, directions, out_ens.dim)
    return povm, accessible_information_given(out_ens, povm)


def _complete_povm(weights, directions, dim: int) -> Povm:
    """Exact completeness: scale into the PSD cone, then add the remainder
    I - sum q w w^dag as (tiny) eigen rank-one elements."""
    total = np.zeros((dim, dim), dtype=complex)
    for q, w in zip(weights, directions):
        total += q * w.projector()
    top = float(np.linalg.eigvalsh(total)[-1])
    scale = 1.0 / top if top > 1.0 else 1.0
    items = [(q * scale, w) for q, w in zip(weights, directions) if q * scale > 1e-12]
    remainder = np.eye(dim) - scale * total
    eigs, vecs = np.linalg.eigh(remainder)
    for lam, k in zip(eigs, range(dim)):
        if lam > 1e-12:
            items.append((float(lam), PureState(fix_phase(vecs[:, k]))))
    return Povm(items, dim=dim)


def induced_classical_channel(ch: QuantumChannel, povm: Povm) -> QuantumChannel:
    """Fixing the measurement yields a channel whose outputs are classical:
    input v maps to the outcome distribution of measuring N(v v^dag).

    Built as the composition measurement-after-channel, with Kraus operators
    sqrt(q_j) |j><w_j| A_k, and flagged diagonal_output so the C_{1,inf}
    machinery can use the cheap entropy path.
    """
    if povm.dim != ch.dim_out:
        raise DimensionError(f"POVM dim {povm.dim} != channel output dim {ch.dim_out}")
    n = len(povm.weights)
    kraus = []
    for j, (q, w) in enumerate(zip(povm.weights, povm.directions)):
        bra = np.zeros((n, povm.dim), dtype=complex)
        bra[j, :] = np.sqrt(q) * w.vec.conj()
        for a in ch.kraus:
            kraus.append(bra @ a)
    return QuantumChannel(kraus, diagonal_output=True)


def _signal_weights(ens: Ensemble, signals: list) -> tuple:
    """Map an ensemble supported on a subset of `signals` back onto the full
    signal list (zero weight for unused signals)."""
    weights = np.zeros(len(signals))
    for p, s in ens.items():
        for i, sig in enumerate(signals):
            if abs(abs(np.vdot(s.vec, sig.vec)) - 1.0) < 1e-9:
                weights[i] += p
                break
    if weights.sum() <= 0.0:
        weights[:] = 1.0
    return tuple(weights / weights.sum())


def _initial_ensemble(ch, restricted_signals, restart_index, rng):
    if restricted_signals:
        k = len(restricted_signals)
        probs = np.full(k, 1.0 / k) if restart_index == 0 else rng.dirichlet(np.ones(k))
        return Ensemble(list(zip(probs, restricted_signals)))
    d = ch.dim_in
    if restart_index == 0:
        return Ensemble([(1.0 / d, PureState(e)) for e in np.eye(d)])
    states = [random_pure(rng, d) for _ in range(d + 1)]
    return Ensemble(list(zip(rng.dirichlet(np.ones(d + 1)), states)))


def c11(
    ch: QuantumChannel,
    restricted_signals: list = None,
    restarts: int = 8,
    seed: int = 0,
    opts: C11Options = None,
) -> C11Result:
    """Alternate measurement and ensemble optimization from several restarts.

    Restart 0 starts from the canonical uniform ensemble; the rest are
    random.  The landscape has stable non-global points, so all per-restart
    values are retained and the best pair is returned.  Every iterate's value
    and output-ensemble chi land on `trace` (the Holevo bound check).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    opts = opts or C11Options(restarts=restarts, seed=seed)
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    restart_values = []
    trace = []
    any_converged = False

    for r in range(restarts):
        rng = np.random.default_rng(seeds[r])
        ens = _initial_ensemble(ch, restricted_signals, r, rng)
        local_best = None
        prev_value = -np.inf
        converged = False
        for alt in range(opts.alternations):
            out_ens = channel_ensemble(ch, ens)
            povm, v_meas = optimize_measurement(out_ens, opts, rng)
            trace.append(
                {"restart": r, "alternation": alt, "step": "measurement",
                 "value": v_meas, "chi": holevo_chi(out_ens)}
            )
            if local_best is None or v_meas > local_best[0]:
                local_best = (v_meas, ens, povm)

            induced = induced_classical_channel(ch, povm)
            c1_opts = C1InfOptions(
                tol=opts.c1inf.tol,
                starts=opts.c1inf.starts,
                seed=int(rng.integers(2**31)),
                max_rounds=opts.c1inf.max_rounds,
                initial_weights=_signal_weights(ens, restricted_signals)
                if restricted_signals else None,
            )
            c1_res = c1inf(C1InfProblem(
                induced,
                restricted_signals=list(restricted_signals) if restricted_signals else None,
                options=c1_opts,
            ))
            ens = c1_res.ensemble
            v_ens = c1_res.value
            trace.append(
                {"restart": r, "alternation": alt, "step": "ensemble",
                 "value": v_ens, "chi": holevo_chi(channel_ensemble(ch, ens))}
            )
            if v_ens > local_best[0]:
                local_best = (v_ens, ens, povm)
            if local_best[0] - prev_value < opts.alt_tol:
                converged = True
                break
            prev_value = local_best[0]
        restart_values.append(local_best[0])
        any_converged = any_converged or converged
        if best is None or local_best[0] > best[0] + 1e-12:
            best = local_best

    value, ens, povm = best
    # re-evaluate so the reported value is exactly the accessible information
    # of the returned pair
    final_value = accessible_information_given(channel_ensemble(ch, ens), povm)
    return C11Result(
        value=final_value,
        ensemble=ens,
        povm=povm,
        restarts_used=restarts,
        restart_values=restart_values,
        status="converged" if any_converged else "round-limit",
        trace=trace,
    )
