"""Second fundamental form algebra for submanifolds of round spheres.

Tensors h[alpha][i][j] live in an orthonormal adapted frame of an
n-dimensional submanifold with codimension q.  Everything here is pure
linear/multilinear algebra on such tensors: traceless parts, frame
adaptation, the reaction scalars R1/R2/R3, the P/Q splitting, and margin
checks for the quartic curvature inequalities (valid for n >= 6) and the
gradient inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IDENTITY_TOL = 1e-12
INEQ_SLACK = 1e-9

# Bulk sweeps draw one RNG stream per fixed-size batch so that results are
# reproducible independent of how a sweep is partitioned across workers.
SWEEP_BATCH = 4096


class DimensionError(ValueError):
    """Raised when a check requires a dimension the input does not have."""


class InfeasibleTargetError(ValueError):
    """Raised when requested (|H|, |hring|) targets cannot be realized."""


@dataclass(frozen=True)
class AmbientParams:
    """Dimension data of the immersion: intrinsic dim n, codim q, curvature c."""

    n: int
    q: int
    c: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise DimensionError(f"intrinsic dimension must be >= 2, got {self.n}")
        if self.q < 1:
            raise DimensionError(f"codimension must be >= 1, got {self.q}")
        if not self.c > 0:
            raise ValueError(f"ambient curvature must be positive, got {self.c}")


@dataclass(frozen=True, eq=False)
class SffTensor:
    """Second fundamental form components h[alpha][i][j], symmetric in (i, j)."""

    params: AmbientParams
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        n, q = self.params.n, self.params.q
        if h.shape != (q, n, n):
            raise ValueError(f"expected shape {(q, n, n)}, got {h.shape}")
        scale = np.abs(h).max(initial=0.0)
        if np.abs(h - h.transpose(0, 2, 1)).max(initial=0.0) > IDENTITY_TOL * (1 + scale):
            raise ValueError("h must be symmetric in its tangent indices")
        object.__setattr__(self, "h", 0.5 * (h + h.transpose(0, 2, 1)))

    def mean_curvature(self) -> np.ndarray:
        """Components H^alpha = sum_i h^alpha_ii."""
        return np.einsum("aii->a", self.h)

    def norm_h2(self) -> float:
        return float(np.einsum("aij,aij->", self.h, self.h))

    def norm_H2(self) -> float:
        Hv = self.mean_curvature()
        return float(Hv @ Hv)


@dataclass(frozen=True, eq=False)
class AdaptedSff:
    """An SffTensor rotated so the first normal direction is parallel to H
    and the first normal component is diagonal.

    lambda_ring holds the diagonal of the traceless first component; it sums
    to zero.  normal_rotation/tangent_rotation map original frame components
    to the adapted ones.
    """

    base: SffTensor
    lambda_ring: np.ndarray
    normal_rotation: np.ndarray
    tangent_rotation: np.ndarray


@dataclass(frozen=True)
class SffInvariants:
    """Scalar invariants of an SffTensor (adapted-frame splitting included)."""

    norm_H2: float
    norm_h2: float
    norm_hring2: float
    P1: float
    Q1: float
    Q2: float
    P2: float
    R1: float
    R2: float
    R3: float


@dataclass(frozen=True)
class SimonsMargins:
    """Slack of the quartic curvature bounds at one sample.

    r1_margin and r3_margin are (bound - value) in the inequality direction;
    identity_residual is the absolute defect of the exact R2 identity.
    The bounds require n >= 6.
    """

    r1_margin: float
    r3_margin: float
    identity_residual: float


@dataclass(frozen=True)
class GradMargins:
    """Slack of the two gradient inequalities at one symmetric sample."""

    trace_margin: float
    cauchy_schwarz_margin: float


@dataclass(frozen=True, eq=False)
class SymmetricGradSample:
    """A totally symmetric 3-tensor T[alpha][i][j][k] modelling nabla h,
    with optional mean curvature vector for the |grad |H|^2| bound."""

    params: AmbientParams
    T: np.ndarray
    Hvec: np.ndarray | None = None

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        n, q = self.params.n, self.params.q
        if T.shape != (q, n, n, n):
            raise ValueError(f"expected shape {(q, n, n, n)}, got {T.shape}")
        scale = 1.0 + np.abs(T).max(initial=0.0)
        for perm in ((0, 1, 3, 2), (0, 2, 1, 3), (0, 3, 2, 1)):
            if np.abs(T - T.transpose(perm)).max(initial=0.0) > IDENTITY_TOL * scale:
                raise ValueError("T must be totally symmetric in (i, j, k)")
        if self.Hvec is not None:
            Hv = np.asarray(self.Hvec, dtype=float)
            if Hv.shape != (q,):
                raise ValueError(f"Hvec must have shape {(q,)}, got {Hv.shape}")
            object.__setattr__(self, "Hvec", Hv)


def traceless_part(t: SffTensor) -> SffTensor:
    """Remove the trace part: hring = h - (H/n) * identity, per normal direction."""
    n = t.params.n
    Hv = t.mean_curvature()
    hring = t.h - Hv[:, None, None] * np.eye(n) / n
    return SffTensor(t.params, hring)


def _householder_to_e1(u: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is the unit vector u (deterministic)."""
    q = u.shape[0]
    v = u.copy()
    v[0] -= 1.0
    vv = v @ v
    if vv < 1e-30:
        return np.eye(q)
    return np.eye(q) - 2.0 * np.outer(v, v) / vv


def _sorted_eigh(mat: np.ndarray):
    """Symmetric eigendecomposition, eigenvalues descending, signs fixed so the
    largest-magnitude entry of each eigenvector is positive."""
    vals, vecs = np.linalg.eigh(mat)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        j = np.argmax(np.abs(vecs[:, k]))
        if vecs[j, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return vals, vecs


def adapt_frame(t: SffTensor) -> AdaptedSff:
    """Rotate frames so H = |H| nu_1 and the first normal component is diagonal.

    For H = 0 the normal rotation is the identity and only the tangent frame
    is rotated.  All scalar invariants are unchanged by construction.
    """
    n = t.params.n
    Hv = t.mean_curvature()
    normH = np.sqrt(Hv @ Hv)
    if normH > 0:
        Q = _householder_to_e1(Hv / normH)
        # new components: h'_a = sum_b Q[b, a] h_b  (columns of Q are the new frame)
        h_rot = np.einsum("ba,bij->aij", Q, t.h)
    else:
        Q = np.eye(t.params.q)
        h_rot = t.h.copy()
    _, R = _sorted_eigh(h_rot[0])
    h_adapted = np.einsum("ki,akl,lj->aij", R, h_rot, R)
    lam_ring = np.diag(h_adapted[0]) - normH / n
    return AdaptedSff(
        base=SffTensor(t.params, h_adapted),
        lambda_ring=lam_ring,
        normal_rotation=Q,
        tangent_rotation=R,
    )


def _reaction_scalars(h: np.ndarray, Hv: np.ndarray):
    """Frame-free R1, R2, R3 from components (q, n, n) and H vector (q,)."""
    q = h.shape[0]
    gram = np.einsum("aij,bij->ab", h, h)
    r1 = float(np.sum(gram**2))
    for a in range(q):
        for b in range(a + 1, q):
            m = h[a] @ h[b]
            comm = m - m.T
            r1 += 2.0 * float(np.sum(comm**2))
    hH = np.einsum("a,aij->ij", Hv, h)
    r2 = float(np.sum(hH**2))
    sq = np.einsum("bij,bjk->ik", h, h)
    r3 = float(np.einsum("a,aij,ij->", Hv, h, sq))
    return r1, r2, r3


def invariants(t: SffTensor) -> SffInvariants:
    """All scalar invariants, including the adapted-frame P/Q splitting.

    P1 is the squared norm of the diagonalized traceless first component,
    Q1/Q2 the diagonal/off-diagonal energy of the remaining components.
    """
    n = t.params.n
    adapted = adapt_frame(t)
    h = adapted.base.h
    Hv = adapted.base.mean_curvature()
    norm_H2 = float(Hv @ Hv)
    norm_h2 = float(np.einsum("aij,aij->", h, h))
    norm_hring2 = norm_h2 - norm_H2 / n
    P1 = float(adapted.lambda_ring @ adapted.lambda_ring)
    if t.params.q > 1:
        rest = h[1:]
        diag = np.einsum("aii->ai", rest)
        Q1 = float(np.sum(diag**2))
        Q2 = float(np.sum(rest**2)) - Q1
    else:
        Q1 = 0.0
        Q2 = 0.0
    R1, R2, R3 = _reaction_scalars(h, Hv)
    return SffInvariants(
        norm_H2=norm_H2,
        norm_h2=norm_h2,
        norm_hring2=norm_hring2,
        P1=P1,
        Q1=Q1,
        Q2=Q2,
        P2=Q1 + Q2,
        R1=R1,
        R2=R2,
        R3=R3,
    )


def _simons_margins_from_scalars(n, H2, hring2, P2, R1, R2, R3):
    """Margins of the three n>=6 curvature bounds, vectorized over samples."""
    cn = (n - 2) / np.sqrt(n * (n - 1))
    normH = np.sqrt(H2)
    normhr = np.sqrt(hring2)
    lhs1 = R1 - R2 / n
    rhs1 = hring2**2 + hring2 * H2 / n + 2 * P2 * hring2 - 1.5 * P2**2 - P2 * H2 / n
    m1 = rhs1 - lhs1
    resid = np.abs(R2 - (hring2 * H2 + H2**2 / n - P2 * H2))
    rhs3 = (
        cn * normH * normhr * (P2 / 2 - hring2)
        - hring2**2
        + hring2 * H2 / n
        - 2 * hring2 * P2
        + 1.5 * P2**2
    )
    m3 = (R3 - R1) - rhs3
    return m1, m3, resid


def check_simons_bounds(t: SffTensor) -> SimonsMargins:
    """Evaluate the quartic curvature bounds at one tensor.

    Non-negative margins and a near-zero residual mean the bounds hold at
    this sample.  Requires n >= 6.
    """
    if t.params.n < 6:
        raise DimensionError("curvature bounds require n >= 6")
    inv = invariants(t)
    m1, m3, resid = _simons_margins_from_scalars(
        t.params.n, inv.norm_H2, inv.norm_hring2, inv.P2, inv.R1, inv.R2, inv.R3
    )
    return SimonsMargins(float(m1), float(m3), float(resid))


def check_grad_bounds(s: SymmetricGradSample) -> GradMargins:
    """Evaluate the gradient inequalities at one totally symmetric sample.

    trace_margin:          |grad h|^2 - 3/(n+2) |grad H|^2
    cauchy_schwarz_margin: 2 |H| |grad H| - |grad |H|^2|
    """
    n = s.params.n
    grad_h2 = float(np.sum(s.T**2))
    gradH = np.einsum("aiik->ak", s.T)
    grad_H2 = float(np.sum(gradH**2))
    m1 = grad_h2 - 3.0 / (n + 2) * grad_H2
    if s.Hvec is None:
        m2 = 0.0
    else:
        normH = float(np.sqrt(s.Hvec @ s.Hvec))
        grad_normH2 = 2.0 * np.einsum("a,ak->k", s.Hvec, gradH)
        m2 = 2.0 * normH * np.sqrt(grad_H2) - float(np.linalg.norm(grad_normH2))
    return GradMargins(m1, m2)


def _random_symmetric(rng, q, n, count=None):
    shape = (q, n, n) if count is None else (count, q, n, n)
    raw = rng.standard_normal(shape)
    return 0.5 * (raw + raw.swapaxes(-1, -2))


def sample_random_sff(params: AmbientParams, targets=None, seed=0) -> SffTensor:
    """Draw a random symmetric tensor, each independent component standard normal.

    If targets = (normH, normhring) is given, the trace and traceless parts
    are rescaled independently to match exactly.
    """
    n, q = params.n, params.q
    rng = np.random.default_rng(seed)
    h = _random_symmetric(rng, q, n)
    if targets is None:
        return SffTensor(params, h)
    target_H, target_hr = targets
    if target_H < 0 or target_hr < 0:
        raise InfeasibleTargetError(f"targets must be non-negative, got {targets}")
    Hv = np.einsum("aii->a", h)
    hring = h - Hv[:, None, None] * np.eye(n) / n
    normH = np.sqrt(Hv @ Hv)
    normhr = np.sqrt(np.einsum("aij,aij->", hring, hring))
    if target_H > 0 and normH == 0:
        raise InfeasibleTargetError("sampled trace part vanished; cannot rescale")
    if target_hr > 0 and normhr == 0:
        raise InfeasibleTargetError("sampled traceless part vanished; cannot rescale")
    trace_part = 0.0 if target_H == 0 else (target_H / normH) * (Hv[:, None, None] * np.eye(n) / n)
    ring_part = 0.0 if target_hr == 0 else (target_hr / normhr) * hring
    return SffTensor(params, trace_part + ring_part)


def sample_random_grad(params: AmbientParams, seed=0, with_H=True) -> SymmetricGradSample:
    """Random totally symmetric gradient sample (symmetrized normal draw)."""
    n, q = params.n, params.q
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((q, n, n, n))
    T = _symmetrize3(T)
    Hv = rng.standard_normal(q) if with_H else None
    return SymmetricGradSample(params, T, Hv)


def _symmetrize3(T):
    """Average over the six permutations of the last three axes."""
    return (
        T
        + T.swapaxes(-1, -2)
        + T.swapaxes(-2, -3)
        + T.swapaxes(-1, -3)
        + T.swapaxes(-2, -3).swapaxes(-1, -2)
        + T.swapaxes(-1, -2).swapaxes(-2, -3)
    ) / 6.0


def diagonal_hypersurface_sff(n: int, principal_curvatures, c: float = 1.0) -> SffTensor:
    """Codimension-one tensor with the given principal curvatures on the diagonal."""
    pc = np.asarray(principal_curvatures, dtype=float)
    if pc.shape != (n,):
        raise ValueError(f"need {n} principal curvatures, got shape {pc.shape}")
    return SffTensor(AmbientParams(n, 1, c), np.diag(pc)[None, :, :])


@dataclass(frozen=True)
class SweepResult:
    """Extremes of a margin sweep: worst margins, largest identity residual."""

    samples: int
    min_margin_1: float
    min_margin_2: float
    max_identity_residual: float


def simons_margin_sweep(params: AmbientParams, count: int, master_seed: int = 0) -> SweepResult:
    """Vectorized sweep of the curvature-bound margins over random tensors.

    Batches of SWEEP_BATCH samples are drawn from per-batch streams seeded by
    (master_seed, batch_index); the result is deterministic in (params, count,
    master_seed).  The identity residual is reported relative to 1 + R2.
    """
    if params.n < 6:
        raise DimensionError("curvature bounds require n >= 6")
    n, q = params.n, params.q
    eye = np.eye(n)
    worst1 = np.inf
    worst3 = np.inf
    worst_resid = 0.0
    done = 0
    batch_index = 0
    while done < count:
        rng = np.random.default_rng((master_seed, n, q, batch_index))
        take = min(SWEEP_BATCH, count - done)
        h = _random_symmetric(rng, q, n, count=SWEEP_BATCH)[:take]
        Hv = np.einsum("baii->ba", h)
        H2 = np.einsum("ba,ba->b", Hv, Hv)
        h2 = np.einsum("baij,baij->b", h, h)
        hring2 = h2 - H2 / n
        # P1 = |projection of hring onto the H direction|^2 (frame free)
        normH = np.sqrt(H2)
        u = np.where(normH[:, None] > 0, Hv / np.where(normH[:, None] > 0, normH[:, None], 1.0), 0.0)
        u[normH == 0, 0] = 1.0
        hring = h - (Hv / n)[:, :, None, None] * eye
        k = np.einsum("ba,baij->bij", u, hring)
        P1 = np.einsum("bij,bij->b", k, k)
        P2 = hring2 - P1
        hH = np.einsum("ba,baij->bij", Hv, h)
        R2 = np.einsum("bij,bij->b", hH, hH)
        gram = np.einsum("baij,bcij->bac", h, h)
        R1 = np.einsum("bac,bac->b", gram, gram)
        for a in range(q):
            for bidx in range(a + 1, q):
                m = np.matmul(h[:, a], h[:, bidx])
                comm = m - m.transpose(0, 2, 1)
                R1 = R1 + 2.0 * np.einsum("bij,bij->b", comm, comm)
        sq = np.einsum("baij,bajk->bik", h, h)
        R3 = np.einsum("ba,baij,bij->b", Hv, h, sq)
        m1, m3, resid = _simons_margins_from_scalars(n, H2, hring2, P2, R1, R2, R3)
        worst1 = min(worst1, float(m1.min()))
        worst3 = min(worst3, float(m3.min()))
        worst_resid = max(worst_resid, float((resid / (1.0 + R2)).max()))
        done += take
        batch_index += 1
    return SweepResult(done, worst1, worst3, worst_resid)


def grad_margin_sweep(params: AmbientParams, count: int, master_seed: int = 0) -> SweepResult:
    """Vectorized sweep of the gradient-inequality margins (batch = 1024)."""
    n, q = params.n, params.q
    batch = 1024
    worst1 = np.inf
    worst2 = np.inf
    done = 0
    batch_index = 0
    while done < count:
        rng = np.random.default_rng((master_seed, n, q, batch_index))
        take = min(batch, count - done)
        T = _symmetrize3(rng.standard_normal((batch, q, n, n, n)))[:take]
        Hv = rng.standard_normal((batch, q))[:take]
        grad_h2 = np.einsum("baijk,baijk->b", T, T)
        gradH = np.einsum("baiik->bak", T)
        grad_H2 = np.einsum("bak,bak->b", gradH, gradH)
        m1 = grad_h2 - 3.0 / (n + 2) * grad_H2
        normH = np.sqrt(np.einsum("ba,ba->b", Hv, Hv))
        gn = 2.0 * np.einsum("ba,bak->bk", Hv, gradH)
        m2 = 2.0 * normH * np.sqrt(grad_H2) - np.sqrt(np.einsum("bk,bk->b", gn, gn))
        worst1 = min(worst1, float(m1.min()))
        worst2 = min(worst2, float(m2.min()))
        done += take
        batch_index += 1
    return SweepResult(done, worst1, worst2, 0.0)
