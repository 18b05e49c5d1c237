"""The curvature-pinching threshold family and its derived constants.

The threshold gamma(n, c, x) of squared curvature norm against x = |H|^2 is
the minimum of a closed-form branch alpha and its second-order Taylor
polynomial beta at the joint x0 = y_n * c.  Everything is computed at c = 1
and mapped to general c by the exact scaling

    f(n, c, x) = c * f(n, 1, x / c),    f^(k)(n, c, x) = c^(1-k) * f1^(k)(x / c).

All evaluators accept scalars or numpy arrays in x.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

GRID_POINTS = 10_000
GRID_SPAN_FACTOR = 100  # default verification window is [0, 100 n]


class DomainError(ValueError):
    """Argument outside the mathematical domain of an evaluator."""


class InadmissibleEpsError(ValueError):
    """The requested eps drives the relaxed threshold non-positive."""


def _check_n(n):
    if n < 6:
        raise DomainError(f"pinching functions require n >= 6, got n = {n}")


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x = |H|^2 must be non-negative")
    return x


def _scalar_like(x, value):
    if np.isscalar(x) or getattr(x, "ndim", 1) == 0:
        return float(value)
    return value


def kappa_of(n: int) -> float:
    return (n - 4) / (2 * n + 2)


def y_of(n: int) -> float:
    """Location of the branch joint at c = 1."""
    k = kappa_of(n)
    rt = np.sqrt(n - 1)
    return rt * (rt - k) ** 2 / k


def _alpha1(n, x, order=0):
    """c = 1 branch and its first three derivatives (x > 0 for order >= 1)."""
    rad = x**2 + 4 * (n - 1) * x
    if order == 0:
        return n + n / (2 * (n - 1)) * x - (n - 2) / (2 * (n - 1)) * np.sqrt(rad)
    if order == 1:
        return n / (2 * (n - 1)) - (n - 2) / (2 * (n - 1)) * (x + 2 * (n - 1)) / np.sqrt(rad)
    if order == 2:
        return 2 * (n - 2) * (n - 1) / rad**1.5
    if order == 3:
        return -6 * (n - 2) * (n - 1) * (x + 2 * (n - 1)) / rad**2.5
    raise DomainError(f"derivative order must be 0..3, got {order}")


def alpha(n: int, c: float, x, order: int = 0):
    """Closed-form branch of the pinching threshold.

    order 0 is the value; orders 1..3 are derivatives in x, which are
    singular at x = 0 and therefore rejected there.
    """
    _check_n(n)
    x = _check_x(x)
    if order > 0 and np.any(x == 0):
        raise DomainError("derivatives of alpha are singular at x = 0")
    return _scalar_like(x, c ** (1 - order) * _alpha1(n, x / c, order))


@functools.lru_cache(maxsize=None)
def _joint_data(n: int):
    """(x0, alpha(x0), alpha'(x0), alpha''(x0)) at c = 1, closed forms."""
    k = kappa_of(n)
    rt = np.sqrt(n - 1)
    x0 = y_of(n)
    a0 = (k + 1 / k) * rt
    a1 = (1 - k**2) / (n - 1 - k**2)
    a2 = 2 * (n - 2) * k**3 / ((n - 1 - k**2) ** 3 * rt)
    return x0, a0, a1, a2


def beta(n: int, c: float, x, order: int = 0):
    """Second-order Taylor polynomial of alpha at the joint x0 = y_n c."""
    _check_n(n)
    x = _check_x(x)
    x0, a0, a1, a2 = _joint_data(n)
    u = x / c - x0
    if order == 0:
        val = c * (a0 + a1 * u + 0.5 * a2 * u**2)
    elif order == 1:
        val = a1 + a2 * u
    elif order == 2:
        val = np.full_like(u, a2) / c
    elif order == 3:
        val = np.zeros_like(u)
    else:
        raise DomainError(f"derivative order must be 0..3, got {order}")
    return _scalar_like(x, val)


def gamma(n: int, c: float, x, order: int = 0):
    """The pinching threshold: alpha for x >= x0, beta below; C^2 at the joint.

    The third derivative jumps at x0 and is rejected exactly there.
    """
    _check_n(n)
    x = _check_x(x)
    x0 = y_of(n) * c
    on_alpha = x >= x0
    if order == 3 and np.any(x == x0):
        raise DomainError("third derivative of gamma is discontinuous at x0")
    a = np.where(on_alpha, c ** (1 - order) * _alpha1(n, np.where(on_alpha, x, x0) / c, order), 0.0)
    b = np.where(on_alpha, 0.0, beta(n, c, np.where(on_alpha, 0.0, x), order))
    return _scalar_like(x, np.where(on_alpha, a, b))


def gamma_ring(n: int, c: float, x, order: int = 0):
    """Traceless threshold gamma(x) - x/n (derivatives adjusted accordingly)."""
    g = gamma(n, c, x, order)
    if order == 0:
        return _scalar_like(x, g - np.asarray(x, dtype=float) / n)
    if order == 1:
        return _scalar_like(x, np.asarray(g) - 1.0 / n)
    return g


def _omega1_raw(n, x):
    """Closed form of the relaxation weight at c = 1, valid for x >= x0.

    Complex-safe so that first derivatives can be taken by a complex step.
    """
    s = (1 + 4 * (n - 1) / x) ** (-0.5)
    a = n / (n - 2)
    bracket = (1 + n**2 / x) * (a - s) / (a + s)
    return x**2 / np.sqrt(x**2 + 4 * (n - 1) * x) * bracket**2


def _omega1_d1(n, x):
    h = 1e-20
    return np.imag(_omega1_raw(n, x + 1j * h)) / h


def _omega1_d2(n, x):
    h = np.maximum(np.asarray(x, dtype=float) * 1e-5, 1e-8)
    return (_omega1_d1(n, x + h) - _omega1_d1(n, x - h)) / (2 * h)


@functools.lru_cache(maxsize=None)
def _omega_joint(n: int):
    """(x0, w, w', w'') of the weight at the joint; basis of the tail extension."""
    x0 = y_of(n)
    return x0, float(_omega1_raw(n, x0)), float(_omega1_d1(n, x0)), float(_omega1_d2(n, x0))


def omega(n: int, x, order: int = 0):
    """Positive weight used to relax the traceless threshold (c = 1).

    Above the joint this is the closed form; below it the quadratic Taylor
    extension at the joint, floored at half the joint value so the weight
    stays positive.  The floor is inert for n <= 64 (see
    omega_extension_clamped).
    """
    _check_n(n)
    x = _check_x(x)
    x0, w0, w1, w2 = _omega_joint(n)
    on_main = x >= x0
    xm = np.where(on_main, x, x0)
    if order == 0:
        main = _omega1_raw(n, xm)
    elif order == 1:
        main = _omega1_d1(n, xm)
    elif order == 2:
        main = _omega1_d2(n, xm)
    else:
        raise DomainError(f"derivative order must be 0..2, got {order}")
    u = x - x0
    quad = w0 + w1 * u + 0.5 * w2 * u**2
    floor = w0 / 2
    clamped = quad < floor
    if order == 0:
        ext = np.where(clamped, floor, quad)
    elif order == 1:
        ext = np.where(clamped, 0.0, w1 + w2 * u)
    else:
        ext = np.where(clamped, 0.0, np.full_like(quad, w2))
    return _scalar_like(x, np.where(on_main, main, ext))


def omega_extension_clamped(n: int) -> bool:
    """Whether the tail extension's positivity floor activates anywhere on [0, x0]."""
    x0, w0, w1, w2 = _omega_joint(n)
    xs = np.linspace(0.0, x0, 4001)
    u = xs - x0
    quad = w0 + w1 * u + 0.5 * w2 * u**2
    return bool(np.any(quad < w0 / 2))


@dataclass(frozen=True)
class PinchingProfile:
    """Dimension and relaxation parameters (n, c, eps, sigma).

    sigma is capped by eps^(5/2); eps = sigma = 0 is allowed as the exact
    (unrelaxed) limit.  Construction checks that the relaxed threshold stays
    positive on the default verification window.
    """

    n: int
    c: float = 1.0
    eps: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        _check_n(self.n)
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0.0 <= self.eps < 0.5:
            raise InadmissibleEpsError(f"eps must lie in [0, 0.5), got {self.eps}")
        if self.sigma < 0 or self.sigma > self.eps**2.5:
            raise ValueError(f"sigma must lie in [0, eps^(5/2)], got {self.sigma}")
        if self.eps > 0:
            xs = np.linspace(0.0, GRID_SPAN_FACTOR * self.n * self.c, 2001)
            vals = gamma_ring(self.n, self.c, xs) - self.eps * self.c * omega(self.n, xs / self.c)
            if np.any(vals <= 0):
                raise InadmissibleEpsError(
                    f"eps = {self.eps} drives the relaxed threshold non-positive"
                )


def gamma_ring_eps(profile: PinchingProfile, x, order: int = 0):
    """Relaxed traceless threshold gamma_ring - eps * omega, scaled to profile.c.

    Raises InadmissibleEpsError if the value is non-positive anywhere on the
    requested points (order 0 only).
    """
    n, c, eps = profile.n, profile.c, profile.eps
    x = _check_x(x)
    base = np.asarray(gamma_ring(n, c, x, order), dtype=float)
    if eps != 0.0:
        base = base - eps * c ** (1 - order) * np.asarray(omega(n, x / c, order), dtype=float)
    if order == 0 and np.any(base <= 0):
        raise InadmissibleEpsError(
            f"relaxed threshold non-positive at x = {np.asarray(x)[np.argmin(base)]:.6g} "
            f"(eps = {eps})"
        )
    return _scalar_like(x, base)


@dataclass(frozen=True)
class PinchingConstants:
    """Derived constants of the threshold family at given (n, c)."""

    n: int
    c: float
    kappa_n: float
    y_n: float
    x0: float
    iota_n: float
    theta_n: float
    gamma0: float
    k_n: float
    delta_n: float

    def __post_init__(self):
        bound = 2 * (self.n - 1) / (self.n * (self.n + 2))
        checks = [
            (0 < self.kappa_n < 0.5, "kappa_n outside (0, 1/2)"),
            (self.iota_n < 1, "iota_n >= 1"),
            (self.theta_n > 7 / 6, "theta_n <= 7/6"),
            (0 < self.delta_n < bound, "delta_n outside its admissible interval"),
            (self.k_n > (7 / 6) * np.sqrt(self.n - 1), "k_n below its lower bound"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(f"derived constant invariant violated: {msg}")


def _golden_max(f, lo, hi, iters=80):
    """Golden-section maximization of a unimodal f on [lo, hi]."""
    inv_phi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def curvature_gap_sup(n: int, grid_points: int = GRID_POINTS):
    """Supremum of 2 x gamma_ring'' + gamma_ring' on [0, 100 n] at c = 1.

    Grid scan plus golden-section refinement around the maximizer.
    """
    xs = np.linspace(0.0, GRID_SPAN_FACTOR * n, grid_points)
    vals = 2 * xs * gamma(n, 1.0, xs, 2) + gamma_ring(n, 1.0, xs, 1)
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]

    def f(x):
        return 2 * x * gamma(n, 1.0, x, 2) + gamma_ring(n, 1.0, x, 1)

    _, peak = _golden_max(f, lo, hi)
    return max(float(vals[i]), float(peak))


@functools.lru_cache(maxsize=None)
def _delta_n(n: int) -> float:
    bound = 2 * (n - 1) / (n * (n + 2))
    return bound - curvature_gap_sup(n)


def derive_constants(n: int, c: float = 1.0) -> PinchingConstants:
    """All derived constants of the family; raises if any invariant fails."""
    _check_n(n)
    k = kappa_of(n)
    y = y_of(n)
    x0_val, a0, a1, a2 = _joint_data(n)
    k_n = a0 - a1 * y + 0.5 * a2 * y**2
    iota = (np.sqrt(n - 1) - k) ** 2 / (n - 1 - k**2)
    return PinchingConstants(
        n=n,
        c=c,
        kappa_n=k,
        y_n=y,
        x0=y * c,
        iota_n=iota,
        theta_n=k_n / np.sqrt(n - 1),
        gamma0=c * k_n,
        k_n=k_n,
        delta_n=_delta_n(n),
    )
