"""Grid and sampling verification of the pinching-function inequalities.

Each lemma-level check evaluates a set of per-item margin functions over a
grid, refines locally around the minimum margin, and reports the worst case.
A positive margin means the inequality holds with that much slack at every
evaluated point.  Identity-type items (exact equalities along a branch) are
reported as (tolerance - |residual|) so that the uniform rule

    pass  <=>  min_margin > 0

applies to every item.  Grid evidence is not a proof; reports carry the grid
so every claim is reproducible.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import numpy as np

from . import pinching, sff
from .pinching import (
    DomainError,
    PinchingProfile,
    gamma,
    gamma_ring,
    gamma_ring_eps,
    y_of,
)

IDENTITY_TOL = 1e-12
RESIDUAL_TOL = 1e-9
# Strict items that vanish quadratically at the branch joint are checked up
# to a relative guard band; inside the band the margin is below floating
# noise although positive in exact arithmetic.
JOINT_GUARD = 1e-4
FAR_FIELD_X = 1e10
REFINE_INNER = 33


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid with local bisection refinement around the minimum."""

    x_min: float
    x_max: float
    points: int = 10_000
    refinement: int = 3

    def __post_init__(self):
        if not (0 <= self.x_min < self.x_max):
            raise ValueError(f"need 0 <= x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.points < 2:
            raise ValueError(f"need at least 2 grid points, got {self.points}")
        if self.refinement < 0:
            raise ValueError("refinement must be non-negative")

    def values(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)


def default_grid(n: int, c: float = 1.0) -> GridSpec:
    return GridSpec(0.0, pinching.GRID_SPAN_FACTOR * n * c)


@dataclass(frozen=True)
class ItemMargin:
    name: str
    min_margin: float
    witness_x: float


@dataclass(frozen=True)
class VerificationReport:
    """Worst-case margins for one lemma at one (n, c, eps)."""

    lemma_id: str
    n: int
    c: float | None
    eps: float | None
    grid: GridSpec | None
    min_margin: float
    witness_x: float | None
    passed: bool
    samples: int
    items: tuple[ItemMargin, ...]
    notes: tuple[tuple[str, float], ...] = field(default=())

    def __post_init__(self):
        if self.passed != (self.min_margin > 0):
            raise ValueError("pass flag must equal (min_margin > 0)")
        if self.grid is not None and self.witness_x is not None:
            if not (self.grid.x_min <= self.witness_x <= self.grid.x_max):
                raise ValueError("witness_x outside the grid range")

    def to_json_dict(self) -> dict:
        d = {
            "lemma_id": self.lemma_id,
            "n": self.n,
            "c": self.c,
            "eps": self.eps,
            "grid": None
            if self.grid is None
            else {
                "x_min": self.grid.x_min,
                "x_max": self.grid.x_max,
                "points": self.grid.points,
                "refinement": self.grid.refinement,
            },
            "min_margin": self.min_margin,
            "witness_x": self.witness_x,
            "pass": self.passed,
            "samples": self.samples,
            "items": {
                it.name: {"min_margin": it.min_margin, "witness_x": it.witness_x}
                for it in self.items
            },
        }
        if self.notes:
            d["notes"] = dict(self.notes)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _refine_min(fn, xs, levels):
    """Minimum of a vectorized margin function over xs plus local bisection.

    Returns (min_margin, witness, evaluation_count); the witness is always an
    evaluated grid point, and refinement can only lower the reported minimum.
    """
    vals = np.asarray(fn(xs), dtype=float)
    i = int(np.argmin(vals))
    best = float(vals[i])
    witness = float(xs[i])
    count = len(xs)
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, len(xs) - 1)])
    for _ in range(levels):
        if hi <= lo:
            break
        sub = np.linspace(lo, hi, REFINE_INNER)
        sv = np.asarray(fn(sub), dtype=float)
        j = int(np.argmin(sv))
        count += len(sub)
        if sv[j] < best:
            best = float(sv[j])
            witness = float(sub[j])
        lo = float(sub[max(j - 1, 0)])
        hi = float(sub[min(j + 1, len(sub) - 1)])
    return best, witness, count


def _build_report(lemma_id, n, c, eps, grid, item_fns, notes=()):
    """Run every (name, xs, fn) item and aggregate the worst margin."""
    items = []
    total = 0
    for name, xs, fn in item_fns:
        m, w, cnt = _refine_min(fn, xs, grid.refinement)
        items.append(ItemMargin(name, m, w))
        total += cnt
    worst = min(items, key=lambda it: it.min_margin)
    return VerificationReport(
        lemma_id=lemma_id,
        n=n,
        c=c,
        eps=eps,
        grid=grid,
        min_margin=worst.min_margin,
        witness_x=min(max(worst.witness_x, grid.x_min), grid.x_max),
        passed=worst.min_margin > 0,
        samples=total,
        items=tuple(items),
        notes=tuple(notes),
    )


def verify_gminab(n: int, c: float = 1.0, grid: GridSpec | None = None) -> VerificationReport:
    """Threshold-function facts: min identity, floor above (7/6) sqrt(n-1) c,
    monotonicity, and the linear sandwich bounds."""
    if n < 6:
        raise DomainError(f"threshold checks require n >= 6, got {n}")
    grid = grid or default_grid(n, c)
    xs = grid.values()
    g0 = gamma(n, c, 0.0)
    floor = (7.0 / 6.0) * np.sqrt(n - 1) * c

    def id_margin(x):
        g = gamma(n, c, x)
        direct = np.minimum(pinching.alpha(n, c, x), pinching.beta(n, c, x))
        return IDENTITY_TOL * (1 + np.abs(g)) - np.abs(g - direct)

    def floor_margin(x):
        return gamma(n, c, x) - floor

    def monotone_margin(x):
        return gamma(n, c, x, 1)

    def sandwich_lower(x):
        return gamma(n, c, x) - x / (n - 1) - 2 * c

    def sandwich_middle(x):
        return x / (n - 1) + g0 - gamma(n, c, x)

    def sandwich_upper(x):
        return 5 * x / (3 * n) + 2 * n * c / 3 - (x / (n - 1) + g0)

    xs_pos = xs[xs > 0]
    items = [
        ("min_identity", xs, id_margin),
        ("floor", xs, floor_margin),
        ("monotone", xs, monotone_margin),
        ("sandwich_lower", xs, sandwich_lower),
        ("sandwich_middle", xs_pos, sandwich_middle),
        ("sandwich_upper", xs, sandwich_upper),
    ]
    return _build_report("gminab", n, c, None, grid, items)


def _psi12(n, x):
    """The quadratic-dichotomy pair (psi1, psi2) at c = 1."""
    g = gamma(n, 1.0, x)
    gr = g - x / n
    gr1 = gamma(n, 1.0, x, 1) - 1.0 / n
    psi1 = x * gr1 * (g + n) - gr * (g - n)
    psi2 = 2 * gr - x / n + x * gr1
    return psi1, psi2


def _app_items(n, grid):
    """Margin items of the traceless-threshold lemma at c = 1."""
    xs = grid.values()
    x0 = y_of(n)
    bound = 2 * (n - 1) / (n * (n + 2))

    def gap_margin(x):
        return bound - (2 * x * gamma(n, 1.0, x, 2) + gamma_ring(n, 1.0, x, 1))

    def psi1_above(x):
        psi1, _ = _psi12(n, x)
        return RESIDUAL_TOL - np.abs(psi1)

    def psi2_above(x):
        _, psi2 = _psi12(n, x)
        return -psi2

    def psi_quad_below(x):
        psi1, psi2 = _psi12(n, x)
        return psi1 - np.maximum(psi2, 0.0) ** 2 / 6.0

    def support_margin(x):
        return gamma_ring(n, 1.0, x) - x * gamma_ring(n, 1.0, x, 1) - 2.0

    def sqrt_bound_margin(x):
        gr = gamma_ring(n, 1.0, x)
        lhs = (n - 2) / np.sqrt(n * (n - 1)) * np.sqrt(x * gr) + gamma(n, 1.0, x)
        rhs = 2 * x / n + n
        return RESIDUAL_TOL * (1 + np.abs(rhs)) - (lhs - rhs)

    xs_above = xs[xs >= x0]
    if xs_above.size == 0:
        xs_above = np.array([x0])
    # strict below-joint branch, excluding the quadratic tangency band at x0
    xs_below = xs[xs <= x0 * (1 - JOINT_GUARD)]
    if xs_below.size == 0:
        xs_below = np.array([0.0])
    return [
        ("gap_bound", xs, gap_margin),
        ("psi1_vanishes_above", xs_above, psi1_above),
        ("psi2_nonpositive_above", xs_above, psi2_above),
        ("psi_quadratic_below", xs_below, psi_quad_below),
        ("support_line", xs, support_margin),
        ("sqrt_bound", xs, sqrt_bound_margin),
    ]


def _tail_gap(n, x):
    """2 sqrt(gamma_ring) - (n-2)/(2 sqrt(n(n-1))) sqrt(x); bounded above."""
    return 2 * np.sqrt(gamma_ring(n, 1.0, x)) - (n - 2) / (2 * np.sqrt(n * (n - 1))) * np.sqrt(x)


def verify_app(n: int, grid: GridSpec | None = None) -> VerificationReport:
    """Traceless-threshold inequalities at c = 1, including the quadratic
    dichotomy and the bounded-above tail (checked in the far field)."""
    if n < 6:
        raise DomainError(f"threshold checks require n >= 6, got {n}")
    grid = grid or default_grid(n)
    items = _app_items(n, grid)
    xs = grid.values()
    tail_vals = _tail_gap(n, xs)
    far = float(_tail_gap(n, np.array([FAR_FIELD_X]))[0])
    if n == 6:
        # the tail limit is 0 from above: check decay in the far field
        def tail_margin(x):
            return np.full_like(np.asarray(x, dtype=float), 1e-3 - abs(far))
    else:
        def tail_margin(x):
            return np.full_like(np.asarray(x, dtype=float), -far)
    items.append(("tail_bounded", np.array([grid.x_max]), tail_margin))
    notes = (
        ("tail_sup_on_grid", float(tail_vals.max())),
        ("tail_far_value", far),
    )
    return _build_report("app", n, 1.0, None, grid, items, notes)


def verify_gaep(n: int, eps: float, grid: GridSpec | None = None) -> VerificationReport:
    """Relaxed-threshold inequalities at c = 1 for a given eps.

    eps = 0 reduces exactly to the unrelaxed lemma and is delegated to it.
    Inadmissible eps raises InadmissibleEpsError.
    """
    if n < 6:
        raise DomainError(f"threshold checks require n >= 6, got {n}")
    grid = grid or default_grid(n)
    if eps == 0.0:
        rep = verify_app(n, grid)
        return VerificationReport(
            lemma_id="gaep",
            n=n,
            c=1.0,
            eps=0.0,
            grid=grid,
            min_margin=rep.min_margin,
            witness_x=rep.witness_x,
            passed=rep.passed,
            samples=rep.samples,
            items=rep.items,
            notes=rep.notes,
        )
    profile = PinchingProfile(n, 1.0, eps, 0.0)
    xs = grid.values()
    bound = 2 * (n - 1) / (n * (n + 2))

    def gap_margin(x):
        ge2 = gamma_ring_eps(profile, x, 2)
        ge1 = gamma_ring_eps(profile, x, 1)
        return bound - (2 * x * ge2 + ge1)

    def quad_margin(x):
        ge = gamma_ring_eps(profile, x)
        ge1 = gamma_ring_eps(profile, x, 1)
        lhs = x * ge1 * (ge + x / n + n) - ge * (ge + x / n - n)
        psi2 = 2 * ge - x / n + x * ge1
        return lhs - np.maximum(psi2, 0.0) ** 2 / 6.0

    items = [
        ("gap_bound_eps", xs, gap_margin),
        ("quadratic_eps", xs, quad_margin),
    ]
    return _build_report("gaep", n, 1.0, eps, grid, items)


@functools.lru_cache(maxsize=None)
def admissible_eps(n: int) -> float:
    """Largest eps in {2^-k} keeping the relaxed threshold positive and the
    relaxed-lemma margins positive on the default grid."""
    grid = GridSpec(0.0, pinching.GRID_SPAN_FACTOR * n, 4000, 1)
    for k in range(2, 50):
        eps = 2.0**-k
        try:
            rep = verify_gaep(n, eps, grid)
        except pinching.InadmissibleEpsError:
            continue
        if rep.passed:
            return eps
    raise RuntimeError(f"no admissible eps found for n = {n}")


def gaep_margin_ladder(n: int, eps_values, grid: GridSpec | None = None):
    """Reports for a decreasing eps ladder; margins approach the eps = 0 ones."""
    return [verify_gaep(n, e, grid) for e in eps_values]


def scan_dimensions(n_range, c: float = 1.0, eps: float | None = None,
                    grid: GridSpec | None = None) -> list[VerificationReport]:
    """Batch driver: per n, the three function-lemma reports.

    The threshold identity lemma runs at the given c; the traceless and
    relaxed lemmas are c = 1 statements.  eps = None picks the largest
    admissible eps per dimension.
    """
    reports = []
    for n in n_range:
        if n < 6:
            raise DomainError(f"threshold checks require n >= 6, got {n}")
        reports.append(verify_gminab(n, c, grid))
        reports.append(verify_app(n, grid if c == 1.0 else None))
        e = admissible_eps(n) if eps is None else eps
        reports.append(verify_gaep(n, e, grid if c == 1.0 else None))
    return reports


def verify_simons(n: int, samples: int = 100_000, seed: int = 0,
                  q_values=(1, 2, 3, 4)) -> VerificationReport:
    """Sampling evidence for the quartic curvature bounds over random tensors.

    Margins include the stated slack (1e-9 for the inequalities, 1e-10
    relative for the identity) so that min_margin > 0 is the pass rule.
    """
    worst1 = np.inf
    worst3 = np.inf
    worst_resid = 0.0
    total = 0
    for q in q_values:
        res = sff.simons_margin_sweep(sff.AmbientParams(n, q), samples, seed)
        worst1 = min(worst1, res.min_margin_1)
        worst3 = min(worst3, res.min_margin_2)
        worst_resid = max(worst_resid, res.max_identity_residual)
        total += res.samples
    items = (
        ItemMargin("quartic_upper", worst1 + 1e-9, float("nan")),
        ItemMargin("cubic_lower", worst3 + 1e-9, float("nan")),
        ItemMargin("trace_identity", 1e-10 - worst_resid, float("nan")),
    )
    worst = min(items, key=lambda it: it.min_margin)
    return VerificationReport(
        lemma_id="simons",
        n=n,
        c=1.0,
        eps=None,
        grid=None,
        min_margin=worst.min_margin,
        witness_x=None,
        passed=worst.min_margin > 0,
        samples=total,
        items=items,
    )


def verify_grad(n: int, samples: int = 100_000, seed: int = 0,
                q_values=(1, 2, 3, 4)) -> VerificationReport:
    """Sampling evidence for the gradient inequalities (slack 1e-12)."""
    worst1 = np.inf
    worst2 = np.inf
    total = 0
    for q in q_values:
        res = sff.grad_margin_sweep(sff.AmbientParams(n, q), samples, seed)
        worst1 = min(worst1, res.min_margin_1)
        worst2 = min(worst2, res.min_margin_2)
        total += res.samples
    items = (
        ItemMargin("trace_lower", worst1 + 1e-12, float("nan")),
        ItemMargin("cauchy_schwarz", worst2 + 1e-12, float("nan")),
    )
    worst = min(items, key=lambda it: it.min_margin)
    return VerificationReport(
        lemma_id="grad",
        n=n,
        c=1.0,
        eps=None,
        grid=None,
        min_margin=worst.min_margin,
        witness_x=None,
        passed=worst.min_margin > 0,
        samples=total,
        items=items,
    )
