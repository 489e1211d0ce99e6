"""Scalar convex functions with an explicit subgradient selection.

These are the generators of the 1-D epigraph sets: each function knows how
to evaluate itself, how to pick one element of its subdifferential, and
where its minimum is attained.  The builtins (``quadratic``, ``absshift``)
carry their parameters so downstream code can use closed-form shortcuts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable


class FunctionKind(Enum):
    QUADRATIC = "quadratic"
    ABS_SHIFT = "absshift"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ConvexFunction1D:
    """A convex, continuous function on the real line.

    ``subgrad`` must return one element of the subdifferential at every
    point, with ``subgrad(minimizer) == 0``.  ``inf_value`` equals
    ``fn(minimizer)``.
    """

    fn: Callable[[float], float]
    subgrad: Callable[[float], float]
    minimizer: float
    inf_value: float
    kind: FunctionKind = FunctionKind.CUSTOM
    params: tuple = field(default=())

    def __call__(self, x: float) -> float:
        return self.fn(x)

    def spec_name(self) -> str:
        """Problem-file name of a builtin, e.g. ``quadratic(1,0,-1)``."""
        if self.kind is FunctionKind.CUSTOM:
            raise ValueError("custom functions have no problem-file name")
        args = ",".join(format(p, "g") for p in self.params)
        return f"{self.kind.value}({args})"


def quadratic(q2: float, q1: float, q0: float) -> ConvexFunction1D:
    """Build f(x) = q2*x^2 + q1*x + q0 with q2 >= 0.

    q2 == 0 is accepted only together with q1 == 0 (a constant function),
    since otherwise the function has no minimizer.
    """
    q2, q1, q0 = float(q2), float(q1), float(q0)
    if q2 < 0:
        raise ValueError("quadratic requires q2 >= 0")
    if q2 == 0 and q1 != 0:
        raise ValueError("quadratic with q2 == 0 must have q1 == 0")
    u = -q1 / (2.0 * q2) if q2 > 0 else 0.0
    return ConvexFunction1D(
        fn=lambda x: (q2 * x + q1) * x + q0,
        subgrad=lambda x: 2.0 * q2 * x + q1,
        minimizer=u,
        inf_value=(q2 * u + q1) * u + q0,
        kind=FunctionKind.QUADRATIC,
        params=(q2, q1, q0),
    )


def absshift(alpha: float, beta: float) -> ConvexFunction1D:
    """Build f(x) = alpha*|x| + beta with alpha > 0.

    The subgradient selection at the kink x = 0 is 0, which is valid
    because 0 minimizes f.
    """
    alpha, beta = float(alpha), float(beta)
    if alpha <= 0:
        raise ValueError("absshift requires alpha > 0")
    return ConvexFunction1D(
        fn=lambda x: alpha * abs(x) + beta,
        subgrad=lambda x: alpha if x > 0 else (-alpha if x < 0 else 0.0),
        minimizer=0.0,
        inf_value=beta,
        kind=FunctionKind.ABS_SHIFT,
        params=(alpha, beta),
    )


def custom(
    fn: Callable[[float], float],
    subgrad: Callable[[float], float],
    minimizer: float,
) -> ConvexFunction1D:
    """Wrap a user-supplied convex function.

    Convexity is not verified here; see :func:`check_convexity` for a
    randomized spot check.
    """
    minimizer = float(minimizer)
    return ConvexFunction1D(
        fn=fn,
        subgrad=subgrad,
        minimizer=minimizer,
        inf_value=float(fn(minimizer)),
        kind=FunctionKind.CUSTOM,
    )


_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*\(([^)]*)\)\s*$")


def function_from_name(text: str) -> ConvexFunction1D:
    """Parse a builtin from its problem-file name.

    Accepted forms: ``quadratic(q2,q1,q0)`` and ``absshift(alpha,beta)``.
    """
    m = _CALL_RE.match(text)
    if m is None:
        raise ValueError(f"cannot parse function descriptor {text!r}")
    name, raw_args = m.group(1), m.group(2)
    try:
        args = [float(a) for a in raw_args.split(",")] if raw_args.strip() else []
    except ValueError as e:
        raise ValueError(f"bad numeric argument in {text!r}") from e
    if name == "quadratic":
        if len(args) != 3:
            raise ValueError("quadratic takes exactly 3 arguments")
        return quadratic(*args)
    if name == "absshift":
        if len(args) != 2:
            raise ValueError("absshift takes exactly 2 arguments")
        return absshift(*args)
    raise ValueError(f"unknown function {name!r}")


def check_convexity(
    f: ConvexFunction1D,
    lo: float = -10.0,
    hi: float = 10.0,
    cases: int = 1000,
    seed: int = 0,
    tol: float = 1e-9,
) -> None:
    """Randomized convexity and subgradient-inequality spot check.

    Raises ValueError on the first violated triple/pair.  Intended for
    validating ``custom`` inputs and for test suites.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    for _ in range(cases):
        x, y, z = np.sort(rng.uniform(lo, hi, size=3))
        if x == z:
            continue
        chord = ((z - y) * f(x) + (y - x) * f(z)) / (z - x)
        if f(y) > chord + tol:
            raise ValueError(f"convexity violated at ({x}, {y}, {z})")
        a, b = rng.uniform(lo, hi, size=2)
        if f(b) < f(a) + f.subgrad(a) * (b - a) - tol:
            raise ValueError(f"subgradient inequality violated at ({a}, {b})")
