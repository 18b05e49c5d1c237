"""Mean curvature flow at desk scale.

Exact homogeneous solutions (product tori and shrinking geodesic caps in the
unit sphere), a scalar ODE oracle for them, and a method-of-lines solver for
rotationally symmetric hypersurfaces of S^(n+1).

A rotational profile is a curve (w, rho) on the unit 2-sphere of the orbit
plane coordinates (w1, w2, rho >= 0); the hypersurface is its orbit under
rotations of the remaining n-1 ambient directions.  Only c = 1 is simulated;
other curvatures follow from the exact scaling (lengths by 1/sqrt(c), time
by 1/c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .diagnostics import ricci_lower_bound
from .pinching import PinchingProfile, gamma_ring, gamma_ring_eps

AXIS = "axis-closed"
PERIODIC = "periodic"


class CflError(ValueError):
    """Requested time step exceeds the stability bound."""


class PinchedProfileError(RuntimeError):
    """The rotational radius vanished at an interior node."""


class FlowDomainError(ValueError):
    """Parameter outside the admissible range of an exact solution."""


@dataclass(frozen=True)
class CliffordState:
    """Product hypersurface S^(n-1)(r1) x S^1(r2) parametrized by lambda.

    lam is the (n-1)-fold principal curvature, -1/lam the remaining one;
    normH is the signed scalar (n-1) lam - 1/lam (non-negative above the
    minimal torus lam = 1/sqrt(n-1)).
    """

    n: int
    lam: float
    r1: float
    r2: float
    normH: float
    normh2: float


def clifford_from_lambda(n: int, lam: float) -> CliffordState:
    if lam <= 0:
        raise FlowDomainError(f"lambda must be positive, got {lam}")
    r1 = 1.0 / math.sqrt(1.0 + lam**2)
    return CliffordState(
        n=n,
        lam=lam,
        r1=r1,
        r2=lam * r1,
        normH=(n - 1) * lam - 1.0 / lam,
        normh2=(n - 1) * lam**2 + 1.0 / lam**2,
    )


def clifford_extinction_time(n: int, r1sq0: float) -> float:
    d = 1.0 - n * r1sq0 / (n - 1)
    if not 0.0 < d < 1.0:
        raise FlowDomainError(
            f"initial r1^2 must lie in (0, (n-1)/n); got {r1sq0} (stationary or "
            "expanding branch rejected)"
        )
    return -math.log(d) / (2 * n)


def clifford_flow_exact(n: int, r1sq0: float, t: float):
    """Exact torus flow: r1^2(t) = ((n-1)/n)(1 - d e^(2nt)).

    Returns (state at time t, extinction time).  Rejects t past extinction
    and the stationary/expanding branch r1^2 >= (n-1)/n.
    """
    T = clifford_extinction_time(n, r1sq0)
    if t >= T:
        raise FlowDomainError(f"t = {t} is past the extinction time {T}")
    if t < 0:
        raise FlowDomainError("t must be non-negative")
    d = 1.0 - n * r1sq0 / (n - 1)
    r1sq = (n - 1) / n * (1.0 - d * math.exp(2 * n * t))
    lam = math.sqrt((1.0 - r1sq) / r1sq)
    return clifford_from_lambda(n, lam), T


@dataclass(frozen=True)
class CapState:
    """Geodesic sphere of radius rho in S^(n+1); umbilic with |hring|^2 = 0."""

    n: int
    rho: float
    normH: float
    normh2: float


def cap_extinction_time(n: int, rho0: float) -> float:
    if not 0.0 < rho0 <= math.pi / 2:
        raise FlowDomainError(f"initial radius must lie in (0, pi/2], got {rho0}")
    if rho0 == math.pi / 2:
        return math.inf
    return -math.log(math.cos(rho0)) / n


def cap_flow_exact(n: int, rho0: float, t: float):
    """Exact shrinking cap: cos rho(t) = cos rho0 * e^(nt); stationary at pi/2."""
    T = cap_extinction_time(n, rho0)
    if t >= T:
        raise FlowDomainError(f"t = {t} is past the extinction time {T}")
    if t < 0:
        raise FlowDomainError("t must be non-negative")
    rho = math.acos(math.cos(rho0) * math.exp(n * t))
    cot = math.cos(rho) / math.sin(rho)
    return CapState(n=n, rho=rho, normH=n * cot, normh2=n * cot**2), T


@dataclass(frozen=True, eq=False)
class RotationalProfile:
    """Discrete rotational profile: nodes (w in R^2, rho >= 0) on the unit
    sphere of the orbit slice, uniformly spaced in arclength.

    Axis-closed profiles carry rho = 0 exactly at both endpoints; periodic
    profiles omit the wraparound duplicate node.
    """

    w: np.ndarray
    rho: np.ndarray
    topology: str

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        rho = np.asarray(self.rho, dtype=float)
        if self.topology not in (AXIS, PERIODIC):
            raise ValueError(f"unknown topology {self.topology!r}")
        if w.ndim != 2 or w.shape[1] != 2 or rho.shape != (w.shape[0],):
            raise ValueError("w must be (m, 2) and rho (m,)")
        if w.shape[0] < 8:
            raise ValueError("need at least 8 nodes")
        norms = w[:, 0] ** 2 + w[:, 1] ** 2 + rho**2
        if np.abs(norms - 1.0).max() > 1e-10:
            raise ValueError("nodes must lie on the unit sphere of the orbit slice")
        if self.topology == AXIS and (rho[0] != 0.0 or rho[-1] != 0.0):
            raise ValueError("axis-closed profiles need rho = 0 exactly at both ends")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "rho", rho)

    @property
    def m(self) -> int:
        return self.rho.shape[0]

    def positions(self) -> np.ndarray:
        return np.column_stack([self.w, self.rho])

    def spacing(self) -> float:
        """Mean node spacing as great-circle arc on the slice sphere."""
        X = self.positions()
        if self.topology == PERIODIC:
            seg = np.linalg.norm(np.roll(X, -1, axis=0) - X, axis=1)
        else:
            seg = np.linalg.norm(X[1:] - X[:-1], axis=1)
        return float((2.0 * np.arcsin(np.clip(seg / 2.0, 0.0, 1.0))).mean())


def _stencil_neighbors(profile: RotationalProfile):
    """(plus, minus) neighbor arrays with reflection ghosts at the axis:
    w extends evenly, rho oddly."""
    X = profile.positions()
    if profile.topology == PERIODIC:
        return np.roll(X, -1, axis=0), np.roll(X, 1, axis=0)
    Xp = np.empty_like(X)
    Xm = np.empty_like(X)
    Xp[:-1] = X[1:]
    Xm[1:] = X[:-1]
    Xp[-1, :2] = X[-2, :2]
    Xp[-1, 2] = -X[-2, 2]
    Xm[0, :2] = X[1, :2]
    Xm[0, 2] = -X[1, 2]
    return Xp, Xm


def _curvature_arrays(profile: RotationalProfile, n: int):
    """Per-node (kappa, mu, unit normal (m, 3)) of the rotational hypersurface.

    The in-slice normal is X x X' normalized, giving a consistent global
    orientation; mu = -b/rho with b its rho-component, and mu = kappa at the
    axis where the hypersurface is umbilic.
    """
    X = profile.positions()
    rho = profile.rho
    ds = profile.spacing()
    Xp, Xm = _stencil_neighbors(profile)
    d1 = (Xp - Xm) / (2 * ds)
    d2 = (Xp - 2 * X + Xm) / ds**2
    normal = np.cross(X, d1)
    nn = np.linalg.norm(normal, axis=1)
    if np.any(nn < 1e-13):
        raise PinchedProfileError("degenerate tangent; profile collapsed")
    normal /= nn[:, None]
    kappa = np.einsum("ij,ij->i", d2, normal)
    if profile.topology == AXIS:
        interior = rho[1:-1]
        if np.any(interior <= 0.0):
            raise PinchedProfileError("rotational radius vanished at an interior node")
        mu = np.empty_like(rho)
        mu[1:-1] = -normal[1:-1, 2] / rho[1:-1]
        mu[0] = kappa[0]
        mu[-1] = kappa[-1]
    else:
        if np.any(rho <= 0.0):
            raise PinchedProfileError("rotational radius vanished on a periodic profile")
        mu = -normal[:, 2] / rho
    return kappa, mu, normal


def principal_curvatures(profile: RotationalProfile, node: int | None = None, n: int = 6):
    """Principal curvatures (kappa, mu) at one node, or arrays for node=None.

    kappa is the profile curvature, mu the rotational one with multiplicity
    n-1 (n only matters for bookkeeping; the curvatures are n-free).
    """
    kappa, mu, _ = _curvature_arrays(profile, n)
    if node is None:
        return kappa, mu
    return float(kappa[node]), float(mu[node])


def _velocity(X, rho_is, topology, n):
    """Mean curvature velocity (m, 3) for raw position arrays (internal)."""
    prof = object.__new__(RotationalProfile)
    object.__setattr__(prof, "w", X[:, :2])
    object.__setattr__(prof, "rho", X[:, 2])
    object.__setattr__(prof, "topology", topology)
    kappa, mu, normal = _curvature_arrays(prof, n)
    Hs = kappa + (n - 1) * mu
    return Hs[:, None] * normal


def _resample(X, topology, m):
    """Cubic resampling to uniform arclength, then reprojection to the sphere.

    Axis-closed profiles keep their endpoints exactly on the axis and use the
    exact axis slopes (w' = 0, |rho'| = 1) as boundary data.
    """
    if topology == PERIODIC:
        Xc = np.vstack([X, X[:1]])
        seg = np.linalg.norm(Xc[1:] - Xc[:-1], axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        snew = np.linspace(0.0, s[-1], m + 1)[:-1]
        out = CubicSpline(s, Xc, bc_type="periodic")(snew)
    else:
        seg = np.linalg.norm(X[1:] - X[:-1], axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        snew = np.linspace(0.0, s[-1], m)
        # exact axis slopes: w' = 0, rho' = +-1 at the interpolation ends
        lo = np.array([0.0, 0.0, 1.0])
        hi = np.array([0.0, 0.0, -1.0])
        out = CubicSpline(s, X, bc_type=((1, lo), (1, hi)))(snew)
        out[0, 2] = 0.0
        out[-1, 2] = 0.0
        out[1:-1, 2] = np.maximum(out[1:-1, 2], 1e-300)
    out /= np.linalg.norm(out, axis=1)[:, None]
    return out


def stable_dt(profile: RotationalProfile, n: int) -> float:
    """Parabolic stability bound dt <= 0.2 ds^2 / (1 + max|h|^2 ds^2).

    The reaction term enters through max|h|^2 ds^2 so that the bound follows
    the blow-up timescale instead of freezing the flow near extinction.
    """
    kappa, mu, _ = _curvature_arrays(profile, n)
    maxh2 = float((kappa**2 + (n - 1) * mu**2).max())
    ds = profile.spacing()
    return 0.2 * ds**2 / (1.0 + maxh2 * ds**2)


class FlowState:
    """One time slice of a rotational flow.

    Geometry and pinching diagnostics are computed lazily and cached, so
    time stepping does not pay for threshold evaluations between records.
    """

    def __init__(self, profile: RotationalProfile, pinch: PinchingProfile, t: float = 0.0):
        self.profile = profile
        self.pinch = pinch
        self.t = float(t)
        self._geom = None
        self._diag = {}

    def _geometry(self):
        if self._geom is None:
            self._geom = _curvature_arrays(self.profile, self.pinch.n)
        return self._geom

    def _derived(self, key):
        if key not in self._diag:
            n = self.pinch.n
            kappa, mu, _ = self._geometry()
            Hs = kappa + (n - 1) * mu
            H2 = Hs**2
            h2 = kappa**2 + (n - 1) * mu**2
            # algebraically equal to h2 - H2/n but free of cancellation
            hring2 = (n - 1) / n * (kappa - mu) ** 2
            gr = np.asarray(gamma_ring(n, self.pinch.c, H2), dtype=float)
            ds = self.profile.spacing()
            if self.profile.topology == PERIODIC:
                gradH = (np.roll(Hs, -1) - np.roll(Hs, 1)) / (2 * ds)
            else:
                Hp = np.concatenate([Hs[1:], Hs[-2:-1]])
                Hm = np.concatenate([Hs[1:2], Hs[:-1]])
                gradH = (Hp - Hm) / (2 * ds)
            self._diag.update(
                H2=H2,
                h2=h2,
                hring2=hring2,
                U=hring2 - np.asarray(gamma_ring_eps(self.pinch, H2), dtype=float),
                f_sigma=hring2 / gr ** (1.0 - self.pinch.sigma),
                U_ratio=(hring2 - np.asarray(gamma_ring_eps(self.pinch, H2), dtype=float)) / gr,
                gradH=gradH,
            )
        return self._diag[key]

    @property
    def kappa(self):
        return self._geometry()[0]

    @property
    def mu(self):
        return self._geometry()[1]

    @property
    def H2(self):
        return self._derived("H2")

    @property
    def h2(self):
        return self._derived("h2")

    @property
    def hring2(self):
        return self._derived("hring2")

    @property
    def U(self):
        return self._derived("U")

    @property
    def f_sigma(self):
        return self._derived("f_sigma")

    @property
    def U_ratio(self):
        return self._derived("U_ratio")

    @property
    def gradH(self):
        return self._derived("gradH")

    def max_h2(self) -> float:
        kappa, mu, _ = self._geometry()
        n = self.pinch.n
        return float((kappa**2 + (n - 1) * mu**2).max())

    def stable_dt(self) -> float:
        ds = self.profile.spacing()
        return 0.2 * ds**2 / (1.0 + self.max_h2() * ds**2)


def make_flow_state(profile: RotationalProfile, pinch: PinchingProfile, t: float = 0.0) -> FlowState:
    return FlowState(profile, pinch, t)


def flow_step(state: FlowState, dt: float) -> FlowState:
    """One explicit RK4 step of the node motion by the mean curvature vector,
    followed by reprojection to the sphere and uniform-arclength resampling."""
    n = state.pinch.n
    prof = state.profile
    bound = state.stable_dt()
    if dt > bound * (1 + 1e-6):
        raise CflError(f"dt = {dt:.3e} exceeds the stability bound {bound:.3e}")
    topo = prof.topology
    X0 = prof.positions()
    kappa, mu, normal = state._geometry()
    k1 = (kappa + (n - 1) * mu)[:, None] * normal
    k2 = _velocity(X0 + 0.5 * dt * k1, None, topo, n)
    k3 = _velocity(X0 + 0.5 * dt * k2, None, topo, n)
    k4 = _velocity(X0 + dt * k3, None, topo, n)
    X = X0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    X /= np.linalg.norm(X, axis=1)[:, None]
    X = _resample(X, topo, prof.m)
    new_prof = RotationalProfile(X[:, :2], X[:, 2], topo)
    return FlowState(new_prof, state.pinch, state.t + dt)


def cap_profile(rho0: float, m: int) -> RotationalProfile:
    """Geodesic cap of radius rho0 about the pole (1, 0, 0) of the slice."""
    if not 0.0 < rho0 <= math.pi / 2:
        raise FlowDomainError(f"cap radius must lie in (0, pi/2], got {rho0}")
    u = np.linspace(0.0, math.pi, m)
    w = np.column_stack([np.full(m, math.cos(rho0)), math.sin(rho0) * np.cos(u)])
    rho = math.sin(rho0) * np.sin(u)
    rho[0] = 0.0
    rho[-1] = 0.0
    return RotationalProfile(w, rho, AXIS)


def perturbed_cap_profile(rho0: float, m: int, amplitude: float = 0.05, mode: int = 2) -> RotationalProfile:
    """Cap with geodesic radius modulated by amplitude * cos(mode * u).

    Even modes keep the profile smooth across both axis points.  The node set
    is resampled to uniform arclength.
    """
    if mode % 2 != 0:
        raise ValueError("perturbation mode must be even for axis regularity")
    u = np.linspace(0.0, math.pi, 4 * m)
    r = rho0 * (1.0 + amplitude * np.cos(mode * u))
    w = np.column_stack([np.cos(r), np.sin(r) * np.cos(u)])
    rho = np.sin(r) * np.sin(u)
    rho[0] = 0.0
    rho[-1] = 0.0
    X = _resample(np.column_stack([w, rho]), AXIS, m)
    return RotationalProfile(X[:, :2], X[:, 2], AXIS)


def clifford_profile(n: int, lam: float, m: int) -> RotationalProfile:
    """Product-torus profile: rho constant r1, w on the circle of radius r2."""
    state = clifford_from_lambda(n, lam)
    phi = np.linspace(0.0, 2 * math.pi, m, endpoint=False)
    w = state.r2 * np.column_stack([np.cos(phi), np.sin(phi)])
    rho = np.full(m, state.r1)
    return RotationalProfile(w, rho, PERIODIC)


@dataclass(frozen=True)
class FlowLimits:
    """Termination thresholds and budgets for a flow run."""

    max_steps: int = 500_000
    t_max: float = math.inf
    record_every: int = 25
    dt_safety: float = 1.0
    blowup_H2: float = 1e6
    extinct_diam: float = 1e-2
    geodesic_h2: float = 1e-6
    collapse_rho: float = 2e-3
    pinch_tol: float = 1e-4


@dataclass(frozen=True)
class RunRow:
    """One recorded diagnostics row; the first ten fields are the CSV schema."""

    t: float
    minH2: float
    maxH2: float
    minh2: float
    maxh2: float
    maxhring2: float
    maxU: float
    maxFsigma: float
    ricciMin: float
    diamProxy: float
    maxGradH: float = 0.0
    maxUratio: float = -math.inf


CSV_COLUMNS = (
    "t",
    "minH2",
    "maxH2",
    "minh2",
    "maxh2",
    "maxhring2",
    "maxU",
    "maxFsigma",
    "ricciMin",
    "diamProxy",
)


@dataclass
class RunRecord:
    """Config snapshot, recorded rows, and the termination classification."""

    config: dict
    rows: list = field(default_factory=list)
    termination: str = ""


def diameter_proxy(profile: RotationalProfile) -> float:
    """Max geodesic distance between nodes over all orbit positions."""
    w, rho = profile.w, profile.rho
    # farthest orbit points have opposite orbit directions: cos d = w.w' - rho rho'
    dots = w @ w.T - np.outer(rho, rho)
    return float(np.arccos(np.clip(dots.min(), -1.0, 1.0)))


def _row_from_state(state: FlowState) -> RunRow:
    n, c = state.pinch.n, state.pinch.c
    ricci = ricci_lower_bound(n, c, state.H2, state.hring2)
    return RunRow(
        t=state.t,
        minH2=float(state.H2.min()),
        maxH2=float(state.H2.max()),
        minh2=float(state.h2.min()),
        maxh2=float(state.h2.max()),
        maxhring2=float(state.hring2.max()),
        maxU=float(state.U.max()),
        maxFsigma=float(state.f_sigma.max()),
        ricciMin=float(np.min(ricci)),
        diamProxy=diameter_proxy(state.profile),
        maxGradH=float(np.abs(state.gradH).max()),
        maxUratio=float(state.U_ratio.max()),
    )


def run_flow(initial: FlowState, profile: PinchingProfile, limits: FlowLimits | None = None,
             config: dict | None = None) -> RunRecord:
    """March the flow until a termination condition fires.

    Terminations: extinction (curvature blow-up with vanishing diameter),
    totally-geodesic (curvature decayed below threshold), great-circle-collapse
    (rotational radius collapsed on a torus profile or pinched in the
    interior), pinching-violated (the margin monitor tripped on initially
    pinched data), or step-limit.
    """
    limits = limits or FlowLimits()
    if initial.pinch != profile:
        initial = make_flow_state(initial.profile, profile, initial.t)
    record = RunRecord(config=dict(config or {}))
    state = initial
    first = _row_from_state(state)
    record.rows.append(first)
    enforce_pinching = first.maxUratio < -limits.pinch_tol
    initial_geodesic = first.maxh2 < limits.geodesic_h2

    def classify(row: RunRow) -> str | None:
        if row.maxH2 > limits.blowup_H2 and row.diamProxy < limits.extinct_diam:
            return "extinction"
        if state.profile.topology == PERIODIC and float(state.profile.rho.max()) < limits.collapse_rho:
            return "great-circle-collapse"
        if not initial_geodesic and row.maxh2 < limits.geodesic_h2:
            return "totally-geodesic"
        if enforce_pinching and row.maxUratio > limits.pinch_tol:
            return "pinching-violated"
        return None

    term = classify(first)
    steps = 0
    while term is None:
        if steps >= limits.max_steps or state.t >= limits.t_max:
            term = "totally-geodesic" if record.rows[-1].maxh2 < limits.geodesic_h2 else "step-limit"
            break
        dt = limits.dt_safety * state.stable_dt()
        try:
            state = flow_step(state, dt)
        except PinchedProfileError:
            term = "great-circle-collapse"
            break
        steps += 1
        if steps % limits.record_every == 0:
            row = _row_from_state(state)
            record.rows.append(row)
            term = classify(row)
    if record.rows[-1].t < state.t:
        record.rows.append(_row_from_state(state))
        if term is None:
            term = classify(record.rows[-1])
    record.termination = term or "step-limit"
    return record


def clifford_sff_diagonal(n: int, lam: float):
    """Principal curvatures (lam x (n-1), -1/lam) of the product hypersurface."""
    return np.array([lam] * (n - 1) + [-1.0 / lam])


def cap_sff_diagonal(n: int, rho: float):
    """Umbilic principal curvatures cot(rho) of a geodesic cap."""
    return np.full(n, math.cos(rho) / math.sin(rho))
