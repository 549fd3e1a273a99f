"""Finite group action of the exceptional symmetry and the closed-form
solution family it generates.

The one-parameter map

    C(x, y, lam) = 1 + lam^2 (x^2 + y^2) + 2 lam y
    (x, y) -> ( x / C,  (y + lam (x^2 + y^2)) / C )
    u -> C^(-a/2) u(x~, y~)

sends solutions to solutions.  Applied to the power solution
(x^2 - y^2)^(-a/4) it yields [x^2 - (y + lam (x^2+y^2))^2]^(-a/4),
valid on the symmetric difference of two disks of radius 1/(sqrt(2) lam)
centered at (+-1/(2 lam), -1/(2 lam)).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import DomainError, SingularPointError
from .expr import (
    Expr,
    Num,
    Sum,
    add,
    as_expr,
    diff,
    eval_at,
    mul,
    num,
    pow_,
    substitute,
    sym,
    to_callable,
)
from .family import PDEInstance, as_fraction, scaling_vf
from .jets import characteristic

_X = sym("x")
_Y = sym("y")
_LAM = sym("lam")

# x^2 + y^2 and the conformal factor as expressions (lam symbolic)
_RHO2 = add(pow_(_X, num(2)), pow_(_Y, num(2)))
_C_EXPR = add(num(1), mul(pow_(_LAM, num(2)), _RHO2), mul(num(2), _LAM, _Y))
_B_EXPR = add(_Y, mul(_LAM, _RHO2))  # y + lam (x^2 + y^2)


def conformal_factor_expr() -> Expr:
    return _C_EXPR


def conformal_factor(x: float, y: float, lam: float) -> float:
    return 1.0 + lam * lam * (x * x + y * y) + 2.0 * lam * y


def map_point(x: float, y: float, lam: float) -> tuple[float, float]:
    """Finite transformation of the base plane; singular where C = 0."""
    c = conformal_factor(x, y, lam)
    if c == 0.0:
        raise SingularPointError(f"conformal factor vanishes at ({x}, {y})")
    return x / c, (y + lam * (x * x + y * y)) / c


def map_point_exprs(lam) -> tuple[Expr, Expr]:
    """(x~, y~) as expressions; lam may be numeric or symbolic."""
    table = {"lam": as_expr(lam)}
    c_inv = pow_(substitute(_C_EXPR, table), num(-1))
    return (
        mul(_X, c_inv),
        mul(substitute(_B_EXPR, table), c_inv),
    )


@dataclass(frozen=True)
class OrbitParams:
    """Group parameter and instance exponent for one orbit; lam > 0 is
    assumed wherever the two-disk geometry is used (negative lam is the
    mirror image in y)."""

    lam: float
    a: Fraction

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("parameter a must be nonzero")


@dataclass(frozen=True)
class RegionGeometry:
    """Validity region of the transformed solution: union of two open
    disks minus their closed intersection (inside exactly one)."""

    lam: float
    center1: tuple[float, float]
    center2: tuple[float, float]
    radius: float

    def membership(self, x: float, y: float) -> bool:
        # algebraic form: (x - (y + lam rho^2)) (x + (y + lam rho^2)) > 0
        b = y + self.lam * (x * x + y * y)
        return (x - b) * (x + b) > 0.0

    def xor_disks(self, x: float, y: float) -> bool:
        in1 = math.hypot(x - self.center1[0], y - self.center1[1]) < self.radius
        in2 = math.hypot(x - self.center2[0], y - self.center2[1]) < self.radius
        return in1 != in2


def region(lam: float) -> RegionGeometry:
    if not lam > 0:
        raise ValueError(f"region geometry needs lam > 0, got {lam!r}")
    half = 1.0 / (2.0 * lam)
    return RegionGeometry(
        lam=lam,
        center1=(half, -half),
        center2=(-half, -half),
        radius=1.0 / (math.sqrt(2.0) * lam),
    )


@dataclass(frozen=True)
class ClosedFormSolution:
    """Solution expression in (x, y) with an explicit membership test."""

    expr: Expr
    domain: Callable[[float, float], bool]
    label: str
    a: object  # Fraction for numeric instances, Expr when kept symbolic

    def jet(self) -> dict[str, Expr]:
        """u and its derivatives up to second order, symbolically."""
        u = self.expr
        ux, uy = diff(u, "x"), diff(u, "y")
        return {
            "u": u, "ux": ux, "uy": uy,
            "uxx": diff(ux, "x"), "uxy": diff(ux, "y"), "uyy": diff(uy, "y"),
        }


def _power_exponent(a) -> Expr:
    return mul(Num(Fraction(-1, 4)), as_expr(a))


def base_solution(a, extended: bool = False) -> ClosedFormSolution:
    """The power solution (x^2 - y^2)^(-a/4).

    Default domain is the open wedge |x| > |y|.  When -a/4 is an
    integer the expression continues analytically: pass ``extended``
    to widen the domain to the whole plane (positive integer exponent)
    or the plane minus the lines x = +-y (negative integer exponent).
    """
    if not isinstance(a, Expr) and as_fraction(a) == 0:
        raise ValueError("parameter a must be nonzero")
    expr = pow_(add(pow_(_X, num(2)), mul(num(-1), pow_(_Y, num(2)))), _power_exponent(a))
    domain: Callable[[float, float], bool] = lambda x, y: x * x - y * y > 0.0
    if extended and not isinstance(a, Expr):
        exponent = -as_fraction(a) / 4
        if exponent.denominator == 1 and exponent > 0:
            domain = lambda x, y: True
        elif exponent.denominator == 1:
            domain = lambda x, y: x * x != y * y
    return ClosedFormSolution(expr, domain, "base", a if isinstance(a, Expr) else as_fraction(a))


def family_solution(a, lam) -> ClosedFormSolution:
    """[x^2 - (y + lam (x^2 + y^2))^2]^(-a/4) on its two-disk region.

    lam = 0 degenerates to the base solution; lam < 0 keeps the
    algebraic membership test (the geometry is the lam > 0 picture
    mirrored in y).
    """
    if not isinstance(a, Expr) and as_fraction(a) == 0:
        raise ValueError("parameter a must be nonzero")
    lam_expr = as_expr(lam)
    b = substitute(_B_EXPR, {"lam": lam_expr})
    expr = pow_(add(pow_(_X, num(2)), mul(num(-1), pow_(b, num(2)))), _power_exponent(a))
    if isinstance(lam, Expr):
        raise TypeError("family_solution needs a numeric lam for its domain")
    lam_f = float(lam)
    if lam_f == 0.0:
        domain = base_solution(a).domain
    else:
        def domain(x, y, _l=lam_f):
            bb = y + _l * (x * x + y * y)
            return (x - bb) * (x + bb) > 0.0
    return ClosedFormSolution(expr, domain, f"family(lam={lam_f})",
                              a if isinstance(a, Expr) else as_fraction(a))


def transform_solution(sol: ClosedFormSolution, lam, a=None) -> ClosedFormSolution:
    """Push a solution along the finite group action.

    Returns C^(-a/2) * u(x~, y~) simplified; for the base power solution
    this collapses symbolically to the lam-family expression.  The new
    domain is the preimage of the old one under the point map, inside
    C > 0.
    """
    if a is None:
        a = sol.a
    xt, yt = map_point_exprs(lam)
    prefactor = pow_(
        substitute(_C_EXPR, {"lam": as_expr(lam)}),
        mul(Num(Fraction(-1, 2)), as_expr(a)),
    )
    expr = mul(prefactor, substitute(sol.expr, {"x": xt, "y": yt}))

    if isinstance(lam, Expr):
        raise TypeError("transform_solution needs a numeric lam for its domain")
    lam_f = float(lam)
    old_domain = sol.domain

    def domain(x, y, _l=lam_f):
        c = conformal_factor(x, y, _l)
        if c <= 0.0:
            return False
        return old_domain(x / c, (y + _l * (x * x + y * y)) / c)

    return ClosedFormSolution(expr, domain, f"pushforward(lam={lam_f}) of {sol.label}",
                              a if isinstance(a, Expr) else as_fraction(a))


# ---------------------------------------------------------------------------
# residual grids


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid extents must have positive span")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one node per axis")

    def xs(self) -> list[float]:
        return _linspace(self.x_min, self.x_max, self.nx)

    def ys(self) -> list[float]:
        return _linspace(self.y_min, self.y_max, self.ny)


def _linspace(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


@dataclass(frozen=True)
class GridNode:
    x: float
    y: float
    in_domain: bool
    u: float | None
    residual: float | None


@dataclass(frozen=True)
class ResidualField:
    """Pointwise residual of an instance on a solution over a grid.

    ``residual`` at each in-domain node is the residual value divided by
    (1 + magnitude of its largest single term): the terms cancel to zero
    on a true solution but grow without bound toward the region
    boundary, so the raw difference alone is not meaningful there.
    Nodes outside the solution's domain are masked.
    """

    grid: GridSpec
    nodes: tuple[GridNode, ...]  # row-major, y outer then x
    sup_norm: float | None
    n_in_domain: int


def residual_grid(inst: PDEInstance, sol: ClosedFormSolution, grid: GridSpec) -> ResidualField:
    """Evaluate the instance residual on a closed-form solution.

    Derivatives of the solution are taken symbolically, so any nonzero
    residual is a genuine failure of the solution, not discretization
    error.
    """
    substituted = substitute(inst.delta, sol.jet())
    terms = substituted.terms if isinstance(substituted, Sum) else (substituted,)
    term_fns = [to_callable(t, ("x", "y")) for t in terms]
    u_fn = to_callable(sol.expr, ("x", "y"))

    nodes: list[GridNode] = []
    sup = None
    count = 0
    for y in grid.ys():
        for x in grid.xs():
            if not sol.domain(x, y):
                nodes.append(GridNode(x, y, False, None, None))
                continue
            try:
                u_val = u_fn(x, y)
                values = [fn(x, y) for fn in term_fns]
            except DomainError:
                # numerically outside the real domain (boundary roundoff)
                nodes.append(GridNode(x, y, False, None, None))
                continue
            total = 0.0
            scale = 0.0
            for value in values:
                total += value
                scale = max(scale, abs(value))
            res = total / (1.0 + scale)
            nodes.append(GridNode(x, y, True, u_val, res))
            count += 1
            if sup is None or abs(res) > sup:
                sup = abs(res)
    return ResidualField(grid, tuple(nodes), sup, count)


# ---------------------------------------------------------------------------
# infinitesimal consistency of the finite action


@dataclass(frozen=True)
class FlowCheck:
    point: tuple[float, float]
    h: float
    dx_fd: float
    dx_exact: float
    dy_fd: float
    dy_exact: float
    du_fd: float | None
    du_exact: float | None
    max_error: float

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_error <= tol


def flow_generator_check(
    point: tuple[float, float],
    sol: ClosedFormSolution | None = None,
    h: float = 1e-5,
) -> FlowCheck:
    """Differentiate the finite action in lam at lam = 0 and compare with
    the generator.

    Base points flow with d(x~)/dlam = -2xy and d(y~)/dlam = x^2 - y^2;
    the value of the pushed-forward solution at a fixed point moves with
    the characteristic Q = -a y u - 2xy ux + (x^2 - y^2) uy evaluated on
    the solution jet.
    """
    if not 0.0 < h <= 1e-3:
        raise ValueError("step h must lie in (0, 1e-3]")
    x, y = point
    xp, yp = map_point(x, y, h)
    xm, ym = map_point(x, y, -h)
    dx_fd = (xp - xm) / (2.0 * h)
    dy_fd = (yp - ym) / (2.0 * h)
    dx_exact = -2.0 * x * y
    dy_exact = x * x - y * y
    errors = [abs(dx_fd - dx_exact), abs(dy_fd - dy_exact)]

    du_fd = du_exact = None
    if sol is not None:
        if isinstance(sol.a, Expr):
            raise TypeError("flow check needs a solution with numeric a")
        a = float(sol.a)

        def pushed(lam: float) -> float:
            c = conformal_factor(x, y, lam)
            xt, yt = map_point(x, y, lam)
            return c ** (-a / 2.0) * eval_at(sol.expr, {"x": xt, "y": yt})

        du_fd = (pushed(h) - pushed(-h)) / (2.0 * h)
        jet = sol.jet()
        env = {"x": x, "y": y}
        u_val = eval_at(jet["u"], env)
        ux_val = eval_at(jet["ux"], env)
        uy_val = eval_at(jet["uy"], env)
        du_exact = -a * y * u_val - 2.0 * x * y * ux_val + (x * x - y * y) * uy_val
        errors.append(abs(du_fd - du_exact))

    return FlowCheck(
        point=(x, y), h=h,
        dx_fd=dx_fd, dx_exact=dx_exact,
        dy_fd=dy_fd, dy_exact=dy_exact,
        du_fd=du_fd, du_exact=du_exact,
        max_error=max(errors),
    )


def scaling_invariance_residual(a) -> Expr:
    """Characteristic of the scaling field evaluated on the jet of the
    power solution; identically zero (structurally, after explicit
    expansion) for symbolic a."""
    vf = scaling_vf() if isinstance(a, Expr) else scaling_vf().bind(a=as_fraction(a))
    q = characteristic(vf)
    jet = base_solution(a).jet()
    return substitute(q, {"u": jet["u"], "ux": jet["ux"], "uy": jet["uy"]})


def sample_in_region(lam: float, count: int, seed: int) -> list[tuple[float, float]]:
    """Seeded rejection sampling of points inside the two-disk region."""
    geo = region(lam)
    rng = random.Random(seed)
    x_lo = geo.center2[0] - geo.radius
    x_hi = geo.center1[0] + geo.radius
    y_lo = geo.center1[1] - geo.radius
    y_hi = geo.center1[1] + geo.radius
    out: list[tuple[float, float]] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise RuntimeError("region sampling failed to converge")
        x = rng.uniform(x_lo, x_hi)
        y = rng.uniform(y_lo, y_hi)
        if geo.membership(x, y):
            out.append((x, y))
    return out
