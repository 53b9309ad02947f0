import math

import numpy as np
import pytest

from shrinklab import jets
from shrinklab.jets import Jet3, JetDomainError, seed

from _oracles import jet_slots, mp_derivatives, float_derivatives

from shrinklab import expr


def test_seed_examples():
    j = seed((1.0, 2.0), 1)
    assert j.v == 1.0 and j.g1 == 1.0 and j.g2 == 0.0
    assert j.h11 == j.h12 == j.h22 == 0.0
    j = seed((1.0, 2.0), 2)
    assert j.v == 2.0 and j.g1 == 0.0 and j.g2 == 1.0
    j = seed((0.0, 0.0), 1)
    assert j.v == 0.0 and j.g1 == 1.0


def test_seed_index_validation():
    with pytest.raises(ValueError):
        seed((0.0, 0.0), 3)


def test_mul_bilinear_example():
    x = (1.0, 2.0)
    j = seed(x, 1) * seed(x, 2)
    assert j.v == 2.0
    assert (j.g1, j.g2) == (2.0, 1.0)
    assert j.partial2(1, 2) == 1.0
    assert j.t111 == j.t112 == j.t122 == j.t222 == 0.0


def test_sin_taylor_example():
    j = jets.sin(seed((0.0, 0.3), 1))
    assert j.v == 0.0
    assert j.g1 == 1.0
    assert j.h11 == 0.0
    assert j.t111 == -1.0


def test_exp_product_matches_high_precision_fd():
    # all derivatives against an independent high-precision FD oracle
    ast = expr.parse("exp(x1*x2)")
    j = expr.eval_jet(ast, (0.3, 0.7))
    oracle = mp_derivatives(ast, (0.3, 0.7), h="1e-4")
    for a, b in zip(jet_slots(j), oracle):
        assert abs(a - b) / (1.0 + abs(b)) < 1e-6


def test_fd_halving_ratio_small_steps():
    # high-frequency expressions keep binary64 truncation above the
    # cancellation noise even at h = 1e-3 -> 5e-4
    cases = [("sin(4.0*x1 + 3.0*x2)", (0.21, 0.13)),
             ("cos(4.0*x1)*sin(3.5*x2)", (0.4, -0.3)),
             ("sin(3.0*x1*x2 + 1.0)", (0.8, 1.1))]
    for src, x in cases:
        ast = expr.parse(src)
        js = np.array(jet_slots(expr.eval_jet(ast, x)))
        d1 = np.max(np.abs(np.array(float_derivatives(ast, x, 1e-3)) - js))
        d2 = np.max(np.abs(np.array(float_derivatives(ast, x, 5e-4)) - js))
        assert 3.5 <= d1 / d2 <= 4.5, (src, d1 / d2)


def test_symmetric_accessors():
    rng = np.random.default_rng(0)
    j = Jet3(*rng.normal(size=10))
    for (a, b) in [(1, 2), (2, 1)]:
        assert j.partial2(a, b) == j.partial2(b, a)
    import itertools
    for perm in itertools.permutations((1, 1, 2)):
        assert j.partial3(*perm) == j.t112
    for perm in itertools.permutations((1, 2, 2)):
        assert j.partial3(*perm) == j.t122


def test_mul_commutative_to_the_bit():
    rng = np.random.default_rng(7)
    for _ in range(300):
        a = Jet3(*rng.normal(size=10))
        b = Jet3(*rng.normal(size=10))
        p, q = a * b, b * a
        for s in ("v", "g1", "g2", "h11", "h12", "h22",
                  "t111", "t112", "t122", "t222"):
            assert getattr(p, s) == getattr(q, s)


def test_product_permutation_same_association():
    rng = np.random.default_rng(8)
    a, b, c = (Jet3(*rng.normal(size=10)) for _ in range(3))
    p, q = (a * b) * c, (b * a) * c
    assert all(getattr(p, s) == getattr(q, s)
               for s in ("v", "g1", "g2", "h11", "t222"))


def test_chain_rule_polynomial_within_ulps():
    # g(f(x)) with f = x1 + x2^2, g = t^3 - 2t: compare evaluating g over
    # f's jet against the expanded polynomial's jet
    x = (0.4, -0.6)
    f = seed(x, 1) + jets.pow_int(seed(x, 2), 2)
    composed = jets.pow_int(f, 3) - f * 2.0
    x1, x2 = seed(x, 1), seed(x, 2)
    t = x1 + jets.pow_int(x2, 2)
    expanded = (jets.pow_int(x1, 3) + x1 * x1 * jets.pow_int(x2, 2) * 3.0
                + x1 * jets.pow_int(x2, 4) * 3.0 + jets.pow_int(x2, 6)
                - x1 * 2.0 - jets.pow_int(x2, 2) * 2.0)
    for a, b in zip(jet_slots(composed), jet_slots(expanded)):
        assert abs(a - b) <= 4 * math.ulp(max(abs(a), abs(b), 1.0))


def test_division_and_reciprocal():
    x = (2.0, 3.0)
    j = seed(x, 1) / seed(x, 2)
    assert j.v == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert j.g1 == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert j.g2 == pytest.approx(-2.0 / 9.0, abs=1e-15)


def test_domain_errors():
    x = (0.0, 1.0)
    with pytest.raises(JetDomainError):
        jets.constant(1.0) / seed(x, 1)
    with pytest.raises(JetDomainError):
        jets.sqrt(seed(x, 1))
    with pytest.raises(JetDomainError):
        jets.sqrt(jets.constant(-2.0))
    with pytest.raises(JetDomainError):
        jets.log(jets.constant(0.0))
    with pytest.raises(JetDomainError):
        jets.pow_int(seed(x, 1), -1)


def test_pow_int():
    x = (1.5, 0.0)
    assert jets.pow_int(seed(x, 1), 0).v == 1.0
    j = jets.pow_int(seed(x, 1), 3)
    assert j.v == pytest.approx(1.5 ** 3)
    assert j.g1 == pytest.approx(3 * 1.5 ** 2)
    assert j.t111 == pytest.approx(6.0)
    j = jets.pow_int(seed(x, 1), -2)
    assert j.g1 == pytest.approx(-2 * 1.5 ** -3, rel=1e-14)
    with pytest.raises(TypeError):
        jets.pow_int(seed(x, 1), 0.5)
    # integer powers are exact at a zero base
    assert jets.pow_int(seed((0.0, 0.0), 1), 2).v == 0.0


def test_deriv_field_orders():
    x = (0.7, -0.2)
    j = jets.sin(seed(x, 1) * seed(x, 2))
    d = j.deriv_field(1)
    assert d.order == 2
    assert d.v == j.g1 and d.g1 == j.h11 and d.g2 == j.h12
    assert d.h11 == j.t111
    dd = d.deriv_field(2)
    assert dd.order == 1
    with pytest.raises(ValueError):
        dd.partial2(1, 1)
    with pytest.raises(ValueError):
        d.partial3(1, 1, 1)


def test_batch_arrays_match_scalar():
    xs = np.linspace(-1.0, 1.0, 7)
    ys = np.full_like(xs, 0.4)
    jb = jets.exp(jets.sin(seed((xs, ys), 1)) * seed((xs, ys), 2))
    for k, xv in enumerate(xs):
        js = jets.exp(jets.sin(seed((xv, 0.4), 1)) * seed((xv, 0.4), 2))
        for slot in ("v", "g1", "g2", "h11", "h12", "h22", "t111", "t222"):
            assert getattr(jb, slot)[k] == pytest.approx(getattr(js, slot),
                                                         rel=1e-15, abs=1e-15)


def test_where_selects_slotwise():
    xs = np.array([0.5, 2.0, 3.0])
    ys = np.zeros(3)
    a = seed((xs, ys), 1)
    b = jets.constant(0.0, like=a)
    w = jets.where(xs > 1.0, a, b)
    assert list(w.v) == [0.0, 2.0, 3.0]
    assert list(np.broadcast_to(w.g1, (3,))) == [0.0, 1.0, 1.0]
