import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betatiling.errors import NotIrreducible, NotPisot, NotUnit
from betatiling.numfield import (EQ, GT, LT, gamma, gamma_interval, make_field,
                                 phi, pi1, psi, qb_compare, qb_floor,
                                 simple_rational_in)

coord = st.fractions(min_value=-50, max_value=50, max_denominator=40)


# ---------------------------------------------------------------------------
# construction

def test_golden_field_data(golden):
    assert golden.degree == 2
    assert golden.companion == ((1, 1), (1, 0))
    b = (1 + math.sqrt(5)) / 2
    # v1 = (b^2, b) / (b^2 + 1), v2 = (1, -b) / (b^2 + 1)
    v1 = np.array([b * b, b]) / (b * b + 1)
    v2 = np.array([1.0, -b]) / (b * b + 1)
    assert np.allclose(golden.v[0].real, v1, atol=1e-12)
    assert np.allclose(golden.v[1].real, v2, atol=1e-12)
    assert abs(golden.rho - 1 / b) < 1e-9


def test_tribonacci_conjugate_pair(tribonacci):
    # independent root computation
    roots = np.roots([1, -1, -1, -1])
    complexes = sorted([r for r in roots if abs(r.imag) > 1e-9], key=lambda z: z.imag)
    assert len(complexes) == 2
    assert abs(complexes[0] - complexes[1].conjugate()) < 1e-9
    g2 = gamma(tribonacci.beta, 1)
    g3 = gamma(tribonacci.beta, 2)
    assert abs(g2.center - g3.center.conjugate()) < 1e-9
    assert abs(g2.center) < 1
    assert {round(abs(g2.center - c), 6) for c in complexes} & {0.0}


def test_not_unit():
    with pytest.raises(NotUnit):
        make_field(0, 2)


def test_not_irreducible():
    with pytest.raises(NotIrreducible):
        make_field(0, 1)          # x^2 - 1
    with pytest.raises(NotIrreducible):
        make_field(2, 0, -2, 1)   # has rational root 1


def test_not_pisot():
    with pytest.raises(NotPisot):
        make_field(-1, 1)     # roots 0.618, -1.618: no real root > 1
    with pytest.raises(NotPisot):
        make_field(1, -1)     # x^2 - x + 1, complex roots on the unit circle


# ---------------------------------------------------------------------------
# arithmetic

def test_minimal_polynomial_relation(golden):
    b = golden.beta
    assert (b * b - b - golden.one).is_zero()


def test_inv_beta_golden(golden):
    inv = golden.one.div_beta()
    assert inv.coords == (Fraction(-1), Fraction(1))
    assert (inv * golden.beta) == golden.one


def test_inv_beta_tribonacci(tribonacci):
    inv = tribonacci.one.div_beta()
    # beta^2 - beta - 1, checked by symbolic multiplication
    assert inv.coords == (Fraction(-1), Fraction(-1), Fraction(1))
    assert (inv * tribonacci.beta) == tribonacci.one


def test_general_inverse(tribonacci):
    x = tribonacci.qb(["2/3", "-1/5", "4"])
    assert (x * x.inv()) == tribonacci.one


def test_compare_examples(golden, smallest_pisot):
    b = golden.beta
    assert qb_compare(b * b, b + golden.one) == EQ
    assert qb_compare(golden.one.div_beta(), golden.one) == LT
    # 3 - 2*beta for the smallest Pisot number: the root is ~1.3247 (mpmath
    # refinement is the independent oracle), so the sign is positive
    with mpmath.workdps(30):
        root = mpmath.findroot(lambda x: x ** 3 - x - 1, 1.3)
        assert 3 - 2 * root > 0.3
    assert qb_compare(smallest_pisot.qb([3, -2]), smallest_pisot.zero) == GT


def test_gamma_examples(golden):
    b = golden.beta
    enc = gamma(b, 1)
    assert abs(enc.center - (-1 / ((1 + math.sqrt(5)) / 2))) <= enc.radius + 1e-12
    five = gamma(golden.qb([5]), 1)
    assert five.center == 5 and five.radius < 1e-12


def test_gamma_precision_request(golden):
    # float presentation is capped by the double width; exact enclosures are not
    enc = gamma(golden.qb(["1/3", "2/7"]), 1, precision=120)
    assert enc.radius < 2 ** -50
    lo, hi = gamma_interval(golden.qb(["1/3", "2/7"]), 1, Fraction(1, 2 ** 120))
    assert hi - lo <= Fraction(1, 2 ** 120)


# ---------------------------------------------------------------------------
# lattice and hyperplane maps

def test_psi_examples(golden):
    assert psi(golden.zero) == (0, 0)
    assert psi(golden.one) == (1, 0)
    assert psi(golden.beta) == (1, 1)
    assert phi(golden.zero).coords == (0.0,)


def test_pi1_roundtrip_100(golden):
    import random
    rng = random.Random(7)
    for _ in range(100):
        x = golden.qb([rng.randint(-50, 50), rng.randint(-50, 50)])
        assert pi1(psi(x), golden) == x


@given(a=coord, b=coord)
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(golden, a, b):
    x = golden.qb([a, b])
    assert pi1(psi(x), golden) == x


@given(a=coord, b=coord, c=coord, d=coord)
@settings(max_examples=40, deadline=None)
def test_psi_homomorphism(golden, a, b, c, d):
    x, y = golden.qb([a, b]), golden.qb([c, d])
    px, py = psi(x), psi(y)
    assert psi(x + y) == tuple(u + v for u, v in zip(px, py))
    m = golden.companion
    assert psi(x * golden.beta) == tuple(
        sum(Fraction(m[i][k]) * px[k] for k in range(2)) for i in range(2))


@given(a=coord, b=coord, c=coord)
@settings(max_examples=25, deadline=None)
def test_conjugation_consistency(tribonacci, a, b, c):
    x = tribonacci.qb([a, b, c])
    target = np.zeros(3, dtype=complex)
    for j in range(3):
        target += gamma(x, j, 80).center * tribonacci.v[j]
    got = np.array([float(v) for v in psi(x)], dtype=complex)
    assert np.abs(target - got).max() < 1e-7 * (1 + np.abs(got).max())


@given(a=coord, b=coord, c=coord, d=coord)
@settings(max_examples=40, deadline=None)
def test_ordering_consistency(golden, a, b, c, d):
    x, y = golden.qb([a, b]), golden.qb([c, d])
    lo_x, hi_x = gamma_interval(x, 0, Fraction(1, 2 ** 80))
    lo_y, hi_y = gamma_interval(y, 0, Fraction(1, 2 ** 80))
    if hi_x < lo_y:
        assert qb_compare(x, y) == LT
    elif hi_y < lo_x:
        assert qb_compare(x, y) == GT


@given(px=st.floats(-5, 5), py=st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_hyperplane_contraction(tribonacci, px, py):
    p = np.array([px, py])
    assert np.linalg.norm(tribonacci.contract_mat @ p) <= \
        tribonacci.rho * np.linalg.norm(p) + 1e-9


def test_floor_and_simple_rational(golden):
    assert qb_floor(golden.beta) == 1
    assert qb_floor(golden.qb(["7/2"])) == 3
    lo = golden.qb(["1/10", "0"])
    hi = golden.qb([0, "1/2"])  # beta/2 ~ 0.809
    x = simple_rational_in(lo, hi)
    assert x.is_rational()
    assert qb_compare(x, lo) != LT and qb_compare(x, hi) == LT
    assert x.coords[0].denominator <= 2
