"""Complex Hermitian linear algebra and quantum primitives.

States, channels, measurements, entropies, partial trace, purification,
and the real-coordinate encoding of Hermitian matrices used by the LP
layers.  All entropies are in bits (log base 2).  Values are immutable
after construction and every operation here is a pure function.
"""

import numpy as np

LN2 = np.log(2.0)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-10
CHANNEL_TOL = 1e-9
POVM_TOL = 1e-9
ENTROPY_CLIP = 1e-12


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class InvariantError(ValueError):
    """A quantum object failed one of its validity invariants."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class HermitianMatrix:
    """A d x d complex Hermitian matrix (max deviation from H^dag below 1e-10)."""

    __slots__ = ("mat", "dim")

    def __init__(self, mat):
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
        defect = float(np.abs(mat - mat.conj().T).max())
        if defect > HERMITIAN_TOL:
            raise InvariantError(f"matrix is not Hermitian: max deviation {defect:.3e}")
        # symmetrize away the sub-tolerance roundoff so eigh sees an exact Hermitian
        self.mat = _readonly((mat + mat.conj().T) / 2.0)
        self.dim = mat.shape[0]


class DensityMatrix(HermitianMatrix):
    """Hermitian, trace-one (1e-10), positive semidefinite (min eig >= -1e-10)."""

    def __init__(self, mat):
        super().__init__(mat)
        tr = float(self.mat.trace().real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantError(f"trace is {tr!r}, expected 1 within {TRACE_TOL}")
        lo = float(np.linalg.eigvalsh(self.mat)[0])
        if lo < -PSD_TOL:
            raise InvariantError(f"not positive semidefinite: min eigenvalue {lo:.3e}")

    @staticmethod
    def from_pure(state: "PureState") -> "DensityMatrix":
        return DensityMatrix(np.outer(state.vec, state.vec.conj()))

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(dim) / dim)


class PureState:
    """A unit vector in C^d (squared norm within 1e-10 of 1)."""

    __slots__ = ("vec", "dim")

    def __init__(self, vec):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        nrm2 = float(np.vdot(vec, vec).real)
        if abs(nrm2 - 1.0) > NORM_TOL:
            raise InvariantError(f"squared norm is {nrm2!r}, expected 1 within {NORM_TOL}")
        self.vec = _readonly(vec)
        self.dim = vec.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.vec, self.vec.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)


def normalized_state(vec) -> PureState:
    """Normalize a nonzero vector into a PureState."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    nrm = float(np.linalg.norm(vec))
    if nrm < 1e-14:
        raise InvariantError("cannot normalize the zero vector")
    return PureState(vec / nrm)


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Gauge-fix a state vector: largest-magnitude amplitude made real nonnegative."""
    k = int(np.argmax(np.abs(vec)))
    a = vec[k]
    if abs(a) < 1e-300:
        return vec
    return vec * (a.conjugate() / abs(a))


def snap_vector(vec: np.ndarray, rel_tol: float = 1e-8) -> np.ndarray:
    """Zero real/imaginary parts below rel_tol of the largest amplitude.

    Optimizer output carries component dust at the gradient-tolerance scale;
    snapping it keeps downstream coordinate rows exactly zero where they
    should be.  The result is renormalized and phase-fixed.
    """
    scale = float(np.abs(vec).max())
    if scale <= 0.0:
        return vec
    re = np.where(np.abs(vec.real) < rel_tol * scale, 0.0, vec.real)
    im = np.where(np.abs(vec.imag) < rel_tol * scale, 0.0, vec.imag)
    out = re + 1j * im
    return fix_phase(out / np.linalg.norm(out))


class QuantumChannel:
    """A channel in Kraus form {A_i}: rho -> sum_i A_i rho A_i^dag.

    Trace preservation (sum_i A_i^dag A_i = I) is enforced entrywise to 1e-9.
    `diagonal_output` marks channels whose outputs are diagonal in the
    computational basis (measurement-induced classical channels), enabling a
    cheap entropy path downstream.
    """

    __slots__ = ("kraus", "dim_in", "dim_out", "diagonal_output")

    def __init__(self, kraus, diagonal_output: bool = False):
        if not kraus:
            raise InvariantError("a channel needs at least one Kraus operator")
        ops = []
        shape = None
        for a in kraus:
            a = np.asarray(a, dtype=complex)
            if a.ndim != 2:
                raise DimensionError(f"Kraus operator has shape {a.shape}, expected a matrix")
            if shape is None:
                shape = a.shape
            elif a.shape != shape:
                raise DimensionError(f"inconsistent Kraus shapes {shape} and {a.shape}")
            ops.append(_readonly(a.copy()))
        dim_out, dim_in = shape
        ident = sum(a.conj().T @ a for a in ops)
        defect = float(np.abs(ident - np.eye(dim_in)).max())
        if defect > CHANNEL_TOL:
            raise InvariantError(
                f"channel is not trace-preserving: identity defect {defect:.6e}"
            )
        self.kraus = tuple(ops)
        self.dim_in = dim_in
        self.dim_out = dim_out
        self.diagonal_output = diagonal_output


def validate_channel(kraus) -> QuantumChannel:
    """Build a QuantumChannel, checking shapes and sum_i A_i^dag A_i = I (1e-9)."""
    return QuantumChannel(kraus)


def apply_channel(ch: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """Apply the Kraus sum to a density matrix."""
    if rho.dim != ch.dim_in:
        raise DimensionError(f"state dim {rho.dim} != channel input dim {ch.dim_in}")
    return DensityMatrix(channel_apply_mat(ch, rho.mat))


def channel_apply_mat(ch: QuantumChannel, mat: np.ndarray) -> np.ndarray:
    """Kraus sum on a raw matrix (no validity wrapping)."""
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=complex)
    for a in ch.kraus:
        out += a @ mat @ a.conj().T
    return out


def channel_output_pure(ch: QuantumChannel, vec: np.ndarray) -> np.ndarray:
    """Output matrix N(v v^dag) assembled from the image vectors A_i v."""
    imgs = [a @ vec for a in ch.kraus]
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=complex)
    for w in imgs:
        out += np.outer(w, w.conj())
    return out


def adjoint_apply(ch: QuantumChannel, mat: np.ndarray) -> np.ndarray:
    """Adjoint map N^dag(X) = sum_i A_i^dag X A_i (Heisenberg picture)."""
    out = np.zeros((ch.dim_in, ch.dim_in), dtype=complex)
    for a in ch.kraus:
        out += a.conj().T @ mat @ a
    return out


def environment_output(ch: QuantumChannel, mat: np.ndarray) -> np.ndarray:
    """Environment (complementary) view: the matrix with entries Tr(A_k rho A_j^dag).

    Its entropy equals the entropy of (N (x) I) applied to any purification of
    rho, since the system+reference+environment state is pure.
    """
    k = len(ch.kraus)
    imgs = [a @ mat for a in ch.kraus]
    out = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            out[i, j] = np.trace(imgs[i] @ ch.kraus[j].conj().T)
    return out


def environment_adjoint(ch: QuantumChannel, x: np.ndarray) -> np.ndarray:
    """Adjoint of environment_output: sum_{jk} X_jk A_j^dag A_k."""
    k = len(ch.kraus)
    out = np.zeros((ch.dim_in, ch.dim_in), dtype=complex)
    for i in range(k):
        for j in range(k):
            out += x[i, j] * (ch.kraus[i].conj().T @ ch.kraus[j])
    return out


def tensor(a, b):
    """Tensor product of two states or two channels (same kind only)."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.vec, b.vec))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.mat, b.mat))
    if isinstance(a, QuantumChannel) and isinstance(b, QuantumChannel):
        kraus = [np.kron(x, y) for x in a.kraus for y in b.kraus]
        return QuantumChannel(kraus)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel([np.eye(dim)])


def partial_trace(rho: DensityMatrix, dims: tuple, keep: str) -> DensityMatrix:
    """Trace out one factor of a bipartite state.

    dims = (dA, dB) with rho.dim == dA*dB; keep is "A" or "B".
    """
    da, db = dims
    if rho.dim != da * db:
        raise DimensionError(f"dim {rho.dim} does not factor as {da}*{db}")
    t = rho.mat.reshape(da, db, da, db)
    if keep == "A":
        red = np.einsum("ijkj->ik", t)
    elif keep == "B":
        red = np.einsum("ijil->jl", t)
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityMatrix(red)


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    if p.min() < -1e-12:
        raise InvariantError(f"negative probability {p.min():.3e}")
    s = float(p.sum())
    if abs(s - 1.0) > 1e-9:
        raise InvariantError(f"probabilities sum to {s!r}, expected 1 within 1e-9")
    q = p[p > ENTROPY_CLIP]
    return float(-(q * np.log2(q)).sum())


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy of the eigenvalue spectrum, eigenvalues clipped to [0, 1]."""
    return entropy_of_spectrum(np.linalg.eigvalsh(rho.mat))


def entropy_of_spectrum(eigs: np.ndarray) -> float:
    eigs = np.clip(eigs, 0.0, 1.0)
    nz = eigs[eigs > ENTROPY_CLIP]
    return float(-(nz * np.log2(nz)).sum())


def binary_entropy(p: float) -> float:
    """H2(p) in bits."""
    out = 0.0
    if p > ENTROPY_CLIP:
        out -= p * np.log2(p)
    if 1.0 - p > ENTROPY_CLIP:
        out -= (1.0 - p) * np.log2(1.0 - p)
    return float(out)


def matrix_log2_clipped(mat: np.ndarray, clip: float = ENTROPY_CLIP) -> np.ndarray:
    """log2 of a PSD matrix; eigenvalues below `clip` contribute nothing.

    This is the subgradient choice matching the entropy clipping: directions
    that grow a zero eigenvalue get derivative 0 rather than -inf.
    """
    eigs, vecs = np.linalg.eigh(mat)
    keep = eigs > clip
    if not keep.any():
        return np.zeros_like(mat)
    v = vecs[:, keep]
    return (v * np.log2(eigs[keep])) @ v.conj().T


def fidelity(rho_in: DensityMatrix, rho_out: DensityMatrix) -> float:
    """Tr sqrt(sqrt(rho_out) rho_in sqrt(rho_out)); symmetric in its arguments."""
    if rho_in.dim != rho_out.dim:
        raise DimensionError("fidelity requires equal dimensions")
    s = _psd_sqrt(rho_out.mat)
    inner = s @ rho_in.mat @ s
    eigs = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sqrt(eigs).sum())


def fidelity_pure_overlap(u: PureState, v: PureState) -> float:
    """Squared-overlap convention |u^dag v|^2 for pure states."""
    if u.dim != v.dim:
        raise DimensionError("overlap requires equal dimensions")
    return float(abs(np.vdot(u.vec, v.vec)) ** 2)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    eigs, vecs = np.linalg.eigh(mat)
    eigs = np.clip(eigs, 0.0, None)
    return (vecs * np.sqrt(eigs)) @ vecs.conj().T


class Ensemble:
    """Weighted states {(p_i, state_i)}: p_i >= 0, sum 1 (1e-10), one dimension."""

    __slots__ = ("probs", "states", "dim")

    def __init__(self, items):
        if not items:
            raise InvariantError("ensemble needs at least one item")
        probs = np.array([float(p) for p, _ in items])
        if probs.min() < -1e-12:
            raise InvariantError(f"negative probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > TRACE_TOL:
            raise InvariantError(
                f"probabilities sum to {probs.sum()!r}, expected 1 within {TRACE_TOL}"
            )
        states = tuple(s for _, s in items)
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise InvariantError(f"ensemble states span several dimensions: {sorted(dims)}")
        self.probs = _readonly(np.clip(probs, 0.0, None))
        self.states = states
        self.dim = dims.pop()

    def items(self):
        return list(zip(self.probs, self.states))

    def density_mats(self) -> list:
        return [s.projector() if isinstance(s, PureState) else s.mat for s in self.states]

    def average_density(self) -> DensityMatrix:
        avg = np.zeros((self.dim, self.dim), dtype=complex)
        for p, m in zip(self.probs, self.density_mats()):
            avg += p * m
        return DensityMatrix(avg)


def channel_ensemble(ch: QuantumChannel, ens: Ensemble) -> Ensemble:
    """Push an input ensemble through a channel (output states as densities)."""
    if ens.dim != ch.dim_in:
        raise DimensionError(f"ensemble dim {ens.dim} != channel input dim {ch.dim_in}")
    out = []
    for p, m in zip(ens.probs, ens.density_mats()):
        out.append((p, DensityMatrix(channel_apply_mat(ch, m))))
    return Ensemble(out)


class Povm:
    """Rank-one POVM {q_i w_i w_i^dag} with sum_i q_i w_i w_i^dag = I (1e-9).

    A `support` projector may be supplied for measurements that resolve the
    identity only on a subspace; completeness is then checked against it.
    """

    __slots__ = ("weights", "directions", "dim", "support")

    def __init__(self, items, dim: int = None, support: np.ndarray = None):
        if not items:
            raise InvariantError("POVM needs at least one element")
        weights = np.array([float(q) for q, _ in items])
        if weights.min() < -1e-12:
            raise InvariantError(f"negative POVM weight {weights.min():.3e}")
        directions = tuple(w for _, w in items)
        d = dim if dim is not None else directions[0].dim
        total = np.zeros((d, d), dtype=complex)
        for q, w in zip(weights, directions):
            if w.dim != d:
                raise DimensionError("POVM directions span several dimensions")
            total += q * w.projector()
        target = np.eye(d) if support is None else np.asarray(support, dtype=complex)
        defect = float(np.abs(total - target).max())
        if defect > POVM_TOL:
            raise InvariantError(f"POVM is not complete: identity defect {defect:.6e}")
        self.weights = _readonly(np.clip(weights, 0.0, None))
        self.directions = directions
        self.dim = d
        self.support = None if support is None else _readonly(target)

    def elements(self) -> list:
        return [q * w.projector() for q, w in zip(self.weights, self.directions)]

    @staticmethod
    def projective(basis_vectors) -> "Povm":
        return Povm([(1.0, PureState(v)) for v in basis_vectors])


def povm_probabilities(povm: Povm, rho: DensityMatrix) -> np.ndarray:
    """Outcome distribution q_i w_i^dag rho w_i; sums to 1 within 1e-9."""
    if povm.dim != rho.dim:
        raise DimensionError(f"POVM dim {povm.dim} != state dim {rho.dim}")
    probs = np.array(
        [q * float(np.vdot(w.vec, rho.mat @ w.vec).real)
         for q, w in zip(povm.weights, povm.directions)]
    )
    return np.clip(probs, 0.0, None)


def purify(rho: DensityMatrix, reference_unitary: np.ndarray = None) -> PureState:
    """A purification on system (x) reference, reference dimension = rank(rho).

    Phi = sum_k sqrt(l_k) e_k (x) f_k with {l_k, e_k} the nonzero eigenpairs
    and {f_k} the reference basis (optionally rotated by `reference_unitary`);
    the partial trace over the reference recovers rho.
    """
    eigs, vecs = np.linalg.eigh(rho.mat)
    order = np.argsort(eigs)[::-1]
    eigs, vecs = eigs[order], vecs[:, order]
    keep = eigs > 1e-12
    eigs, vecs = eigs[keep], vecs[:, keep]
    r = int(eigs.size)
    ref = np.eye(r, dtype=complex)
    if reference_unitary is not None:
        ref = np.asarray(reference_unitary, dtype=complex)
        if ref.shape != (r, r):
            raise DimensionError(f"reference unitary must be {r}x{r}, got {ref.shape}")
    phi = np.zeros(rho.dim * r, dtype=complex)
    for k in range(r):
        phi += np.sqrt(eigs[k]) * np.kron(vecs[:, k], ref[:, k])
    phi /= np.linalg.norm(phi)
    return PureState(phi)


def square_root_measurement(states, complete: bool = True) -> Povm:
    """POVM elements phi^{-1/2} w_i w_i^dag phi^{-1/2}, phi = sum_i w_i w_i^dag.

    The inverse square root is a pseudo-inverse (eigenvalues below 1e-10 are
    dropped), so the elements resolve the identity on the span of the states.
    With complete=True the orthocomplement is filled with projective elements,
    making the result a valid POVM on the whole space.
    """
    if not states:
        raise InvariantError("square-root measurement needs at least one state")
    d = states[0].dim
    phi = np.zeros((d, d), dtype=complex)
    for w in states:
        phi += w.projector()
    eigs, vecs = np.linalg.eigh(phi)
    keep = eigs > 1e-10
    inv_sqrt = (vecs[:, keep] / np.sqrt(eigs[keep])) @ vecs[:, keep].conj().T
    items = []
    for w in states:
        u = inv_sqrt @ w.vec
        q = float(np.vdot(u, u).real)
        items.append((q, normalized_state(fix_phase(u))))
    if complete:
        for k in np.flatnonzero(~keep):
            items.append((1.0, PureState(fix_phase(vecs[:, k]))))
        return Povm(items, dim=d)
    proj = vecs[:, keep] @ vecs[:, keep].conj().T
    return Povm(items, dim=d, support=proj)


# ---------------------------------------------------------------------------
# Real coordinates for Hermitian matrices.
#
# Basis order: the d diagonal units, then for each pair j < k (row-major) the
# symmetric element (e_jk + e_kj)/sqrt(2) followed by the antisymmetric one
# i(e_jk - e_kj)/sqrt(2).  The basis is orthonormal under Tr(AB), so the trace
# inner product of two Hermitian matrices equals the dot product of their
# coordinate vectors.
# ---------------------------------------------------------------------------

class HermitianCoords:
    """Real coordinates (length d^2) of a Hermitian matrix in the fixed basis."""

    __slots__ = ("dim", "coords")

    def __init__(self, dim: int, coords):
        coords = np.asarray(coords, dtype=float).reshape(-1)
        if coords.shape[0] != dim * dim:
            raise DimensionError(f"expected {dim * dim} coordinates, got {coords.shape[0]}")
        self.dim = dim
        self.coords = _readonly(coords.copy())


_SQRT2 = np.sqrt(2.0)


def mat_to_coords(mat: np.ndarray) -> np.ndarray:
    """Coordinate vector of a Hermitian ndarray (no wrapping)."""
    d = mat.shape[0]
    coords = np.empty(d * d)
    coords[:d] = mat.diagonal().real
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            coords[k] = _SQRT2 * mat[i, j].real
            coords[k + 1] = _SQRT2 * mat[i, j].imag
            k += 2
    return coords


def coords_to_mat(coords: np.ndarray, dim: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(m, coords[:dim])
    k = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            m[i, j] = (coords[k] + 1j * coords[k + 1]) / _SQRT2
            m[j, i] = m[i, j].conjugate()
            k += 2
    return m


def hermitian_to_coords(h: HermitianMatrix) -> HermitianCoords:
    return HermitianCoords(h.dim, mat_to_coords(h.mat))


def coords_to_hermitian(hc: HermitianCoords) -> HermitianMatrix:
    return HermitianMatrix(coords_to_mat(hc.coords, hc.dim))


# ---------------------------------------------------------------------------
# Seeded random objects, used by the multistart engines and the test suite.
# ---------------------------------------------------------------------------

def random_pure(rng: np.random.Generator, dim: int) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return normalized_state(fix_phase(v))


def random_density(rng: np.random.Generator, dim: int, rank: int = None) -> DensityMatrix:
    r = rank if rank is not None else dim
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = g @ g.conj().T
    return DensityMatrix(m / m.trace().real)


def random_channel(
    rng: np.random.Generator, dim_in: int, dim_out: int, kraus_count: int
) -> QuantumChannel:
    """Random channel from a Haar-ish Stinespring isometry (exactly trace-preserving)."""
    if dim_out * kraus_count < dim_in:
        raise DimensionError("need dim_out * kraus_count >= dim_in for an isometry")
    g = rng.normal(size=(dim_out * kraus_count, dim_in)) + 1j * rng.normal(
        size=(dim_out * kraus_count, dim_in)
    )
    q, _ = np.linalg.qr(g)
    return QuantumChannel([q[i * dim_out:(i + 1) * dim_out, :] for i in range(kraus_count)])


def random_rank_one_povm(rng: np.random.Generator, dim: int, outcomes: int) -> Povm:
    """Random rank-one POVM from the first dim columns of a Haar-ish unitary."""
    if outcomes < dim:
        raise DimensionError("need at least dim outcomes")
    g = rng.normal(size=(outcomes, outcomes)) + 1j * rng.normal(size=(outcomes, outcomes))
    q, _ = np.linalg.qr(g)
    iso = q[:, :dim]
    items = []
    for row in iso:
        v = row.conj()
        w = float(np.vdot(v, v).real)
        items.append((w, normalized_state(fix_phase(v))))
    return Povm(items, dim=dim)
