"""Total derivatives, second prolongation, characteristic."""

import random

import pytest

from liesym import (
    OrderOverflowError,
    VectorField,
    expand,
    apply_prolonged,
    characteristic,
    eval_at,
    exceptional_vf,
    family_residual,
    num,
    parse,
    prolong2,
    rotation_like_vf,
    scaling_vf,
    sym,
    total_derivative,
    y_translation_vf,
)
from liesym.jets import JET_NAMES, sample_jet_env


class TestTotalDerivative:
    def test_of_u(self):
        assert total_derivative(parse("u"), "x") == parse("ux")
        assert total_derivative(parse("u"), "y") == parse("uy")

    def test_rotation_generator_consequence(self):
        assert total_derivative(parse("y*ux + x*uy"), "x") == parse(
            "y*uxx + uy + x*uxy")

    def test_explicit_coordinate_factor(self):
        assert total_derivative(parse("x^2*u"), "y") == parse("x^2*uy")

    def test_order_overflow(self):
        with pytest.raises(OrderOverflowError):
            total_derivative(parse("uxx"), "x")


class TestProlong2:
    def test_rotation_coefficients(self):
        p = prolong2(rotation_like_vf())
        assert p.phi_x == parse("-uy")
        assert p.phi_y == parse("-ux")
        assert p.phi_xx == parse("-2*uxy")
        assert p.phi_xy == parse("-(uxx + uyy)")
        assert p.phi_yy == parse("-2*uxy")

    def test_translation_is_trivial(self):
        p = prolong2(y_translation_vf())
        zero = num(0)
        assert (p.phi_x, p.phi_y, p.phi_xx, p.phi_xy, p.phi_yy) == (
            zero, zero, zero, zero, zero)

    def test_constant_xi_zero_phi_trivial(self):
        p = prolong2(VectorField(parse("3"), parse("-2"), parse("0")))
        for coeff in (p.phi_x, p.phi_y, p.phi_xx, p.phi_xy, p.phi_yy):
            assert coeff == num(0)

    def test_scaling_weights(self):
        p = prolong2(scaling_vf())
        assert p.phi_x == parse("-(a/2+1)*ux")
        assert p.phi_y == parse("-(a/2+1)*uy")
        assert p.phi_xx == parse("-(a/2+2)*uxx")
        assert p.phi_yy == parse("-(a/2+2)*uyy")

    def test_exceptional_first_order_coefficients(self):
        p = prolong2(exceptional_vf())
        assert p.phi_x == parse("-2*y*ux - a*y*ux + 2*x*uy")
        assert expand(p.phi_x) == expand(parse("-(a+2)*y*ux + 2*x*uy"))
        # polynomial of degree at most 2 in the base coordinates
        for coeff in (p.phi_x, p.phi_y):
            assert coeff.free_symbols() <= {"a", "x", "y", "u", "ux", "uy"}

    def test_linearity_in_the_field(self):
        vf1 = exceptional_vf()
        vf2 = scaling_vf()
        p1, p2, p12 = prolong2(vf1), prolong2(vf2), prolong2(vf1 + vf2)
        assert expand(p12.phi_x) == expand(p1.phi_x + p2.phi_x)
        assert expand(p12.phi_y) == expand(p1.phi_y + p2.phi_y)
        assert expand(p12.phi_xx) == expand(p1.phi_xx + p2.phi_xx)
        assert expand(p12.phi_xy) == expand(p1.phi_xy + p2.phi_xy)
        assert expand(p12.phi_yy) == expand(p1.phi_yy + p2.phi_yy)

    def test_mixed_coefficient_route_agreement(self):
        # phi_xy computed via D_y phi_x must equal the D_x phi_y route
        for vf in (exceptional_vf(), scaling_vf(), rotation_like_vf()):
            p = prolong2(vf)
            dx = lambda e: total_derivative(e, "x")
            other = (dx(p.phi_y)
                     - parse("uxy") * dx(vf.xi1)
                     - parse("uyy") * dx(vf.xi2))
            assert expand(p.phi_xy) == expand(other)

    def test_rejects_jet_symbols_in_components(self):
        with pytest.raises(ValueError):
            VectorField(parse("ux"), parse("0"), parse("0"))


class TestCharacteristic:
    def test_rotation(self):
        q = characteristic(rotation_like_vf())
        assert q == parse("-(y*ux + x*uy)")

    def test_exceptional(self):
        q = characteristic(exceptional_vf())
        assert q == parse("-a*y*u - 2*x*y*ux + (x^2-y^2)*uy")

    def test_y_translation(self):
        assert characteristic(y_translation_vf()) == parse("-uy")

    def test_scaling(self):
        assert characteristic(scaling_vf()) == parse("-(a/2)*u - x*ux - y*uy")


class TestApplyProlonged:
    def test_y_translation_annihilates_y_free_residual(self):
        delta = family_residual(-1, 2, -7, -3, parse("-3/2"), parse("1/4"))
        assert apply_prolonged(prolong2(y_translation_vf()), delta) == num(0)

    def test_rotation_on_residual_numeric_form(self):
        # hand-derived closed form of the prolonged rotation on the residual
        a, r, c1, c2, g1, g2 = map(sym, ("a", "r", "c1", "c2", "g1", "g2"))
        delta = family_residual(a, r, c1, c2, g1, g2)
        applied = apply_prolonged(prolong2(rotation_like_vf()), delta)
        hand = parse("-4*uxy - a*y*x^(-2)*ux - a*x^(-1)*uy - g1*r*x^(r-1)*y*u^(c1)")
        rng = random.Random(2718)
        for _ in range(100):
            env = sample_jet_env(rng)
            env.update({n: rng.uniform(0.5, 2.0) for n in ("a", "r", "c1", "c2", "g1", "g2")})
            lhs, rhs = eval_at(applied, env), eval_at(hand, env)
            assert abs(lhs - rhs) <= 1e-10 * (1 + max(abs(lhs), abs(rhs)))

    def test_flow_oracle(self):
        """First-order flow of all eight jet coordinates reproduces the
        directional derivative given by the prolonged field."""
        rng = random.Random(1234)
        eps = 1e-6
        target = family_residual(-1, 2, -7, -3, parse("-3/2"), parse("1/4"))
        for vf in (exceptional_vf().bind(a=-1), rotation_like_vf()):
            p = prolong2(vf)
            coeffs = p.coefficients()
            applied = apply_prolonged(p, target)
            for _ in range(25):
                env = sample_jet_env(rng)
                moved = {
                    name: env[name] + eps * eval_at(coeffs[name], env)
                    for name in JET_NAMES
                }
                lhs = (eval_at(target, moved) - eval_at(target, env)) / eps
                rhs = eval_at(applied, env)
                assert abs(lhs - rhs) <= 1e-5 * (1 + abs(rhs))
