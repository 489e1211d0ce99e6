"""Projection onto 1-D epigraphs and the hyperplane/epigraph DR iteration.

Works in the plane: points are (x, rho), the first set is the x-axis, the
second is epi f = {(x, rho) : f(x) <= rho} for a scalar convex f.  The DR
step here is a closed-form case analysis on the region of the input point;
it agrees with the generic two-set step on the same pair of sets.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np

from .functions import ConvexFunction1D, FunctionKind, absshift, quadratic
from .trace import DEFAULT_ETA, DEFAULT_MAX_ITER, IterationTrace, Reason, Termination

# Membership at machine-boundary points: residuals within this of zero on
# both sides classify as IN_BOTH (the benign terminal region).
BOUNDARY_TIE = 1e-14

_BISECT_TOL = 1e-12
_BISECT_MAX_STEPS = 200


class NoConvergenceError(RuntimeError):
    """Bracketed root search failed to meet tolerance within its step cap."""


class PreconditionViolatedError(ValueError):
    """An operation's hypothesis does not hold for the given inputs."""


class EpiPoint(NamedTuple):
    x: float
    rho: float


class Region(Enum):
    """Position of a point relative to B = epi f and its reflection
    B' = {(x, rho) : rho <= -f(x)} through the x-axis."""

    IN_B_ONLY = "in_b_only"
    IN_BPRIME_ONLY = "in_bprime_only"
    IN_BOTH = "in_both"
    IN_NEITHER = "in_neither"


class WitnessFamily(Enum):
    ABS_SHIFT = "absshift"
    QUADRATIC = "quadratic"


def _as_point(z) -> EpiPoint:
    x, rho = z
    x, rho = float(x), float(rho)
    if not (math.isfinite(x) and math.isfinite(rho)):
        raise ValueError("epigraph points must have finite coordinates")
    return EpiPoint(x, rho)


def _residual(f: ConvexFunction1D, x: float, rho: float, p: float) -> float:
    """Optimality residual p + (f(p) - rho)*subgrad(p) - x of the boundary
    projection equation."""
    return p + (f(p) - rho) * f.subgrad(p) - x


def _bisect_projection(f: ConvexFunction1D, x: float, rho: float) -> float:
    """Root of the projection equation by bisection on [min(x,u), max(x,u)].

    Requires f(x) > rho.  Every sign change of the residual on the bracket
    lies where f >= rho, and the residual is strictly increasing there (for
    x > u; mirrored otherwise), so bisection isolates the unique projection
    abscissa.
    """
    u = f.minimizer
    lo, hi = (u, x) if x >= u else (x, u)
    if lo == hi:
        return x
    g_lo = _residual(f, x, rho, lo)
    g_hi = _residual(f, x, rho, hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise NoConvergenceError(
            "projection residual does not change sign on the bracket; "
            "is the subgradient selection consistent with the minimizer?"
        )
    steps = 0
    while hi - lo > _BISECT_TOL:
        if steps >= _BISECT_MAX_STEPS:
            raise NoConvergenceError(
                f"bisection did not reach tolerance in {_BISECT_MAX_STEPS} steps"
            )
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = _residual(f, x, rho, mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_hi > 0):
            hi = mid
        else:
            lo = mid
        steps += 1
    return 0.5 * (lo + hi)


def _quadratic_projection(f: ConvexFunction1D, x: float, rho: float) -> float:
    """Closed-form root for builtin quadratics: the projection equation is
    a cubic in p; pick the real root in the bracket with f(p) >= rho and
    polish it with one Newton step."""
    q2, q1, _ = f.params
    if q2 == 0.0:
        # constant f: the epigraph is a halfplane, abscissa unchanged
        return x
    c = f(0.0) - rho
    coeffs = [
        2.0 * q2 * q2,
        3.0 * q1 * q2,
        q1 * q1 + 2.0 * c * q2 + 1.0,
        c * q1 - x,
    ]
    u = f.minimizer
    lo, hi = (u, x) if x >= u else (x, u)
    span = max(hi - lo, 1.0)
    best = None
    for root in np.roots(coeffs):
        if abs(root.imag) > 1e-8 * max(1.0, abs(root.real)):
            continue
        p = float(root.real)
        if lo - 1e-9 * span <= p <= hi + 1e-9 * span and f(p) >= rho - 1e-9:
            if best is None or abs(_residual(f, x, rho, p)) < abs(
                _residual(f, x, rho, best)
            ):
                best = p
    if best is None:
        return _bisect_projection(f, x, rho)
    # Newton polish; the derivative is >= 1 where f >= rho
    slope = 1.0 + f.subgrad(best) ** 2 + 2.0 * q2 * (f(best) - rho)
    if slope > 0:
        best -= _residual(f, x, rho, best) / slope
    return min(max(best, lo), hi)


def _absshift_projection(f: ConvexFunction1D, x: float, rho: float) -> float:
    """Closed-form projection abscissa for f = alpha|x| + beta: project
    onto the active branch line, clamped at the kink."""
    alpha, beta = f.params
    denom = 1.0 + alpha * alpha
    if x >= 0:
        return max((x + alpha * (rho - beta)) / denom, 0.0)
    return min((x - alpha * (rho - beta)) / denom, 0.0)


def project_epigraph(f: ConvexFunction1D, z) -> Tuple[float, float]:
    """Nearest point of epi f to z = (x, rho), returned as (p, f(p)).

    Points already in the epigraph are their own projection and are
    returned unchanged.  Otherwise the result lies on the boundary graph
    of f, with abscissa between x and the minimizer of f.
    """
    x, rho = _as_point(z)
    if f(x) <= rho:
        return (x, rho)
    if x == f.minimizer:
        return (x, f(x))
    if f.kind is FunctionKind.QUADRATIC:
        p = _quadratic_projection(f, x, rho)
    elif f.kind is FunctionKind.ABS_SHIFT:
        p = _absshift_projection(f, x, rho)
    else:
        p = _bisect_projection(f, x, rho)
    return (p, f(p))


def classify_region(f: ConvexFunction1D, z) -> Region:
    """Classify z against B = epi f and B' (its x-axis reflection).

    Boundaries count as membership; when both membership residuals vanish
    to machine precision the point counts as IN_BOTH.
    """
    x, rho = _as_point(z)
    fx = f(x)
    in_b = fx <= rho
    in_bprime = rho <= -fx
    if in_b and in_bprime:
        return Region.IN_BOTH
    if in_b:
        return Region.IN_B_ONLY
    if in_bprime:
        return Region.IN_BPRIME_ONLY
    if abs(fx - rho) <= BOUNDARY_TIE and abs(rho + fx) <= BOUNDARY_TIE:
        return Region.IN_BOTH
    return Region.IN_NEITHER


def dr_step_epi(f: ConvexFunction1D, z) -> Tuple[EpiPoint, Region]:
    """One DR step for (x-axis, epi f), by case analysis on the region.

    From B' the step lands on the x-axis at (x, 0); otherwise the x-axis
    reflection (x, -rho) is outside the epigraph and the step moves to
    (p, rho + f(p)) with (p, f(p)) its epigraph projection.  Returns the
    new point together with the region tag of the input.
    """
    x, rho = _as_point(z)
    region = classify_region(f, (x, rho))
    if region in (Region.IN_BPRIME_ONLY, Region.IN_BOTH):
        return EpiPoint(x, 0.0), region
    p, fp = project_epigraph(f, (x, -rho))
    return EpiPoint(p, rho + fp), region


def run_epi(
    f: ConvexFunction1D,
    z0,
    eta: float = DEFAULT_ETA,
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """Iterate the closed-form DR step until an exact fixed point.

    Requires inf f < 0 (the epigraph then meets the open lower halfplane,
    which makes the iteration finitely convergent).  The trace records the
    region tag of every visited point.
    """
    if not f.inf_value < 0:
        raise PreconditionViolatedError("run_epi requires inf f < 0")
    z = _as_point(z0)
    zs, cases = [z], []
    a_list, r_list, pbr_list, d_a, d_b = [], [], [], [], []

    def record(pt: EpiPoint) -> None:
        a_list.append(np.array([pt.x, 0.0]))
        r_list.append(np.array([pt.x, -pt.rho]))
        pbr_list.append(np.asarray(project_epigraph(f, (pt.x, -pt.rho))))
        px, pfx = project_epigraph(f, pt)
        d_a.append(abs(pt.rho))
        d_b.append(math.hypot(pt.x - px, pt.rho - pfx))

    record(z)
    n = 0
    reason = Reason.MAX_ITER
    residual = None
    exact = False
    while n < max_iter:
        z_next, region = dr_step_epi(f, z)
        cases.append(region)
        zs.append(z_next)
        record(z_next)
        n += 1
        residual = math.hypot(z_next.x - z.x, z_next.rho - z.rho)
        if residual <= eta * (1.0 + math.hypot(z.x, z.rho)):
            reason = Reason.EXACT_FIXED_POINT
            exact = True
            z = z_next
            break
        z = z_next
    cases.append(classify_region(f, z))
    return IterationTrace(
        z=tuple(np.asarray(p) for p in zs),
        a=tuple(a_list),
        r=tuple(r_list),
        pbr=tuple(pbr_list),
        d_a=tuple(d_a),
        d_b=tuple(d_b),
        steps=tuple(range(len(zs))),
        termination=Termination(
            reason=reason,
            iterations=n,
            final_point=np.asarray(z),
            exact=exact,
            step_residual=residual,
        ),
        cases=tuple(cases),
    )


def _fix_segment_distance(pt: EpiPoint) -> float:
    """Euclidean distance of a point to the segment [-1, 1] x {0}."""
    return math.hypot(max(abs(pt.x) - 1.0, 0.0), pt.rho)


def luque_witness(family: WitnessFamily, eps: float) -> Tuple[float, float]:
    """Evaluate the small-step/far-from-fixed-points witness at one eps.

    For f = |x| - 1 the witness point is (1 + eps, eps); for f = x^2 - 1 it
    is (1 + eps, -eps).  Returns (step_residual, fix_distance): the norm of
    one DR step at the witness, and the distance of the stepped point to
    the fixed-point segment [-1, 1] x {0}.  The residual tends to 0 with
    eps while the stepped point never enters the segment, so no uniform
    step-size threshold certifies fixedness.
    """
    eps = float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if family is WitnessFamily.ABS_SHIFT:
        f = absshift(1.0, -1.0)
        z = EpiPoint(1.0 + eps, eps)
    elif family is WitnessFamily.QUADRATIC:
        f = quadratic(1.0, 0.0, -1.0)
        z = EpiPoint(1.0 + eps, -eps)
    else:
        raise ValueError(f"unknown witness family {family!r}")
    z_next, _ = dr_step_epi(f, z)
    step_residual = math.hypot(z_next.x - z.x, z_next.rho - z.rho)
    return step_residual, _fix_segment_distance(z_next)
