"""Pinching and convergence diagnostics.

Pure functions of (t, |H|^2, |hring|^2) and a pinching profile: the pinching
margin U, the decay-normalized quantity f_sigma, the intrinsic Ricci lower
bound, the conjugate-point diameter bound, and boundedness monitors for
persisted runs.  Run monitors only assume rows with the recorded-row
attributes, so they work on any run record or CSV reload.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pinching import PinchingProfile, gamma_ring, gamma_ring_eps


def ricci_lower_bound(n: int, c: float, H2, hring2):
    """Pointwise Ricci lower bound of a submanifold of the round sphere.

    At c = 1:  (n-1)/n * (n + 2|H|^2/n - |h|^2 - (n-2)/sqrt(n(n-1)) |H||hring|),
    with |h|^2 = |hring|^2 + |H|^2/n; general c by curvature scaling.
    Vectorized over H2/hring2.
    """
    H2 = np.asarray(H2, dtype=float)
    hring2 = np.asarray(hring2, dtype=float)
    if np.any(H2 < 0) or np.any(hring2 < 0):
        raise ValueError("H2 and hring2 must be non-negative")
    u, v = H2 / c, hring2 / c
    h2 = v + u / n
    bound = (n - 1) / n * (n + 2 * u / n - h2 - (n - 2) / math.sqrt(n * (n - 1)) * np.sqrt(u * v))
    out = c * bound
    return float(out) if out.ndim == 0 else out


def myers_diameter(n: int, ricci_lower: float) -> float:
    """Diameter bound pi sqrt((n-1)/ric) from conjugate points; inf if ric <= 0."""
    if ricci_lower <= 0:
        return math.inf
    return math.pi * math.sqrt((n - 1) / ricci_lower)


@dataclass(frozen=True)
class Diagnostics:
    """Pointwise pinching diagnostics at one (t, |H|^2, |hring|^2)."""

    U: float
    fSigma: float
    ricciLower: float
    myersDiameter: float
    decayEnvelope: float


def pinch_diagnostics(t: float, H2: float, hring2: float, profile: PinchingProfile) -> Diagnostics:
    """Evaluate all diagnostics; raises if the relaxed threshold is not positive."""
    n, c = profile.n, profile.c
    gr = float(gamma_ring(n, c, H2))
    if gr <= 0:
        raise ValueError(f"traceless threshold non-positive at H2 = {H2}")
    U = hring2 - float(gamma_ring_eps(profile, H2))
    f_sigma = hring2 / gr ** (1.0 - profile.sigma)
    ric = float(ricci_lower_bound(n, c, H2, hring2))
    return Diagnostics(
        U=U,
        fSigma=f_sigma,
        ricciLower=ric,
        myersDiameter=myers_diameter(n, ric),
        decayEnvelope=hring2 * math.exp(2 * profile.sigma * t) / (H2 + 1.0) ** (1.0 - profile.sigma),
    )


def _quartile_sups(values):
    """(first-quartile sup, last-quartile sup) by row index."""
    k = max(1, len(values) // 4)
    return max(values[:k]), max(values[-k:])


@dataclass(frozen=True)
class DecayReport:
    """Boundedness evidence for the decay estimates over a run."""

    sup_envelope: float
    sup_weighted_f: float
    envelope_first: float
    envelope_last: float
    weighted_first: float
    weighted_last: float
    passed: bool


def check_decay(run, profile: PinchingProfile, tail_factor: float = 1.05) -> DecayReport:
    """Monitor the decay envelope and the weighted f_sigma sup over a run.

    The per-row envelope uses the row aggregates (max |hring|^2 against
    min |H|^2), an upper bound for the true per-point ratio.  Pass means both
    monitors are finite and the last-quartile sup does not exceed the
    first-quartile sup by more than tail_factor.
    """
    rows = run.rows if hasattr(run, "rows") else list(run)
    if len(rows) < 2:
        raise ValueError("decay check needs a run with at least 2 rows")
    sigma = profile.sigma
    n = profile.n
    env = [
        r.maxhring2 * math.exp(2 * sigma * r.t) / (r.minH2 + 1.0) ** (1.0 - sigma) for r in rows
    ]
    wf = [r.maxFsigma * math.exp(2 * n * sigma * r.t) for r in rows]
    e1, e4 = _quartile_sups(env)
    w1, w4 = _quartile_sups(wf)
    tol = 1e-12
    passed = (
        all(map(math.isfinite, env))
        and all(map(math.isfinite, wf))
        and e4 <= tail_factor * e1 + tol
        and w4 <= tail_factor * w1 + tol
    )
    return DecayReport(
        sup_envelope=max(env),
        sup_weighted_f=max(wf),
        envelope_first=e1,
        envelope_last=e4,
        weighted_first=w1,
        weighted_last=w4,
        passed=passed,
    )


@dataclass(frozen=True)
class GradientReport:
    """Smallest constants closing the gradient bound, per eta."""

    table: tuple
    passed: bool


def gradient_estimate_monitor(run, profile: PinchingProfile, eta_values=None,
                              tail_factor: float = 1.05) -> GradientReport:
    """For each eta, the smallest Psi with |grad H|^2 < ((eta |H|)^4 + Psi^2) e^(-sigma t)
    over the recorded rows (aggregate form: max |grad H| against min |H|^2).

    eta = 0 reduces to Psi = sup |grad H| e^(sigma t / 2).  Pass requires the
    per-row requirement not to grow in the run tail.
    """
    rows = run.rows if hasattr(run, "rows") else list(run)
    if len(rows) < 2:
        raise ValueError("gradient monitor needs a run with at least 2 rows")
    if eta_values is None:
        eps = profile.eps
        eta_values = (0.0,) if eps == 0 else (0.0, eps / 8, eps / 4, eps / 2, 0.99 * eps)
    sigma = profile.sigma
    table = []
    passed = True
    for eta in eta_values:
        reqs = [
            max(0.0, r.maxGradH**2 * math.exp(sigma * r.t) - (eta**4) * r.minH2**2)
            for r in rows
        ]
        psi = math.sqrt(max(reqs))
        r1, r4 = _quartile_sups(reqs)
        passed = passed and math.isfinite(psi) and r4 <= tail_factor * r1 + 1e-12
        table.append((float(eta), psi))
    return GradientReport(table=tuple(table), passed=passed)
