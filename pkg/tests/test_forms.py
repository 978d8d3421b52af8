from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubic_shapes import forms
from cubic_shapes.forms import SingularClass, act, disc, pairing

coeff = st.integers(-100, 100)
form_st = st.tuples(coeff, coeff, coeff, coeff)
small = st.integers(-50, 50)
gl2z = st.tuples(small, small, small, small).filter(lambda m: m[0] * m[3] - m[1] * m[2] != 0)
real = st.floats(-3, 3, allow_nan=False)
real_form = st.tuples(real, real, real, real)
real_mat = st.tuples(real, real, real, real).filter(lambda m: abs(m[0] * m[3] - m[1] * m[2]) > 0.1)


def sympy_free_expand(g, f, x, y):
    """Value of act(g, f) at (x, y) straight from the definition."""
    (p, q), (r, s) = forms.as_matrix(g)
    return forms.evaluate(f, p * x + r * y, q * x + s * y)


# --- examples ---------------------------------------------------------------

def test_act_examples():
    assert act(forms.IDENTITY, (1, 2, 3, 4)) == (1, 2, 3, 4)
    assert act(((0, 1), (-1, -1)), (0, 1, -1, 0)) == (0, 1, -1, 0)
    got = act(((2.0, 0.0), (0.0, 0.5)), (0, 0, 0, 1))
    assert got == pytest.approx((0, 0, 0, 1 / 8))


def test_x_plus_stabilizer_fixes_base_form():
    for g in forms.X_PLUS_STABILIZER:
        assert act(g, forms.X_PLUS) == forms.X_PLUS


def test_disc_examples():
    assert disc((1, 0, 0, 0)) == 0
    assert disc((0, 1, -1, 0)) == 1
    assert disc((0, 1, 0, 1)) == -4


def test_disc_matches_resultant_of_dehomogenized_cubic():
    # D(f) = a^4 prod (r_i - r_j)^2 over roots of a t^3 + b t^2 + c t + d
    import numpy as np
    for f in [(1, 0, -1, -1), (2, -3, 5, 7), (1, 0, 0, -2), (3, 1, -4, 1)]:
        r = np.roots(f)
        prod = ((r[0] - r[1]) * (r[0] - r[2]) * (r[1] - r[2])) ** 2
        assert abs(f[0] ** 4 * prod - disc(f)) < 1e-8 * max(1, abs(disc(f)))


def test_pairing_examples():
    assert pairing((1, 0, 0, 0), (0, 0, 0, 1)) == -1
    assert pairing((0, 1, 0, 0), (0, 0, 1, 0)) == Fraction(1, 3)
    assert pairing((1, 2, 3, 4), (1, 2, 3, 4)) == 0
    assert isinstance(pairing((0, 1, 0, 0), (0, 0, 1, 0)), Fraction)


def test_involution_examples():
    assert forms.involution(forms.IDENTITY) == forms.IDENTITY
    t = 1.7
    a_t = ((t, 0.0), (0.0, 1 / t))
    n_u = ((1.0, 0.0), (0.3, 1.0))
    for g in (a_t, n_u):
        got = forms.involution(g)
        for i in range(2):
            assert got[i] == pytest.approx(g[i], abs=1e-14)
    with pytest.raises(forms.SingularMatrixError):
        forms.involution(((1, 2), (2, 4)))


def test_dual_lattice_examples():
    assert forms.in_dual_lattice((1, 3, 6, 2))
    assert not forms.in_dual_lattice((0, 1, -1, 0))
    assert forms.in_dual_lattice((0, 0, 0, 5))


def test_irreducible_examples():
    assert forms.is_irreducible((1, 0, -1, -1))
    assert not forms.is_irreducible((0, 1, 0, 1))
    assert not forms.is_irreducible((1, 0, 0, -8))
    with pytest.raises(forms.SingularFormError):
        forms.is_irreducible((1, 0, 0, 0))


def test_singular_examples():
    assert forms.singular_classify((0, 0, 0, 5)) == SingularClass("I", 5)
    assert forms.singular_classify((0, 0, 2, 1)) == SingularClass("II", 2, 1)
    assert forms.singular_classify(act(forms.T, (0, 0, 3, 2))) == SingularClass("II", 3, 2)
    assert forms.singular_classify((0, 0, 0, 0)).kind == "zero"
    assert forms.singular_classify((0, 0, 6, 4), dual=True) == SingularClass("II_dual", 2, 4)


def test_singular_errors():
    with pytest.raises(forms.NonSingularFormError):
        forms.singular_classify((0, 1, -1, 0))
    with pytest.raises(ValueError):
        forms.singular_classify((0, 0, 2, 1), dual=True)


def test_overflow_is_an_error():
    big = 2**40
    with pytest.raises(forms.FormOverflowError):
        act(((big, 0), (0, 1)), (1, 0, 0, 0))


# --- properties -------------------------------------------------------------

@given(form_st, gl2z)
def test_disc_relative_invariance(f, g):
    assert disc(act(g, f)) == forms.det(g) ** 6 * disc(f)


@given(real_form, real_mat)
def test_disc_real_relative_invariance(f, g):
    lhs = disc(act(g, f))
    rhs = forms.det(g) ** 6 * disc(f)
    # disc(act(g, f)) is a cancelling sum; its rounding scales with the monomials
    a, b, c, d = (abs(v) for v in act(g, f))
    terms = 18 * a * b * c * d + 4 * b**3 * d + b * b * c * c + 4 * a * c**3 + 27 * a * a * d * d
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs), terms * 1e-4)


@given(form_st, gl2z, gl2z)
def test_action_is_homomorphism(f, g, h):
    assert act(forms.matmul(g, h), f) == act(g, act(h, f))


@given(form_st, st.tuples(small, small, small, small), st.integers(-5, 5), st.integers(-5, 5))
def test_act_matches_substitution(f, g, x, y):
    assert forms.evaluate(act(g, f), x, y) == sympy_free_expand(g, f, x, y)


@given(form_st, form_st)
def test_pairing_antisymmetric(x, y):
    assert pairing(x, y) == -pairing(y, x)
    assert (3 * pairing(x, y)).denominator == 1


@given(real_form, real_form, real_mat)
def test_pairing_involution_identity(x, y, g):
    gx, gy = act(g, x), act(forms.involution(g), y)
    scale = pairing([abs(v) for v in gx], [abs(v) * (-1) ** k for k, v in enumerate(gy)])
    assert abs(pairing(gx, gy) - pairing(x, y)) <= 1e-10 * max(1.0, abs(scale))


@given(real_mat)
def test_involution_is_an_involution(g):
    g = forms.as_matrix(g)
    back = forms.involution(forms.involution(g))
    for i in range(2):
        for j in range(2):
            assert abs(back[i][j] - g[i][j]) <= 1e-12 * max(1.0, abs(g[i][j]))


@settings(max_examples=300)
@given(st.sampled_from(["I", "II", "II_dual"]), st.integers(1, 40), st.integers(0, 10**6),
       st.lists(st.sampled_from([forms.S, forms.T, forms.T_INV]), max_size=8))
def test_singular_classify_is_orbit_invariant(kind, m, n, word):
    if kind == "I":
        base = SingularClass("I", m)
    elif kind == "II":
        base = SingularClass("II", m, n % m)
    else:
        base = SingularClass("II_dual", m, n % (3 * m))
    gamma = forms.IDENTITY
    for w in word:
        gamma = forms.matmul(gamma, w)
    f = act(gamma, base.representative())
    assert forms.singular_classify(f, dual=(kind == "II_dual")) == base
    assert forms.singular_classify(act(forms.MINUS_IDENTITY, f), dual=(kind == "II_dual")) == base


@given(form_st.filter(lambda f: disc(f) != 0))
def test_irreducible_iff_no_rational_root(f):
    import numpy as np
    a, b, c, d = f
    reducible_by_float = a == 0 or any(
        abs(r.imag) < 1e-9 and any(
            forms.evaluate(f, p, q) == 0
            for q in range(1, abs(a) + 1) for p in (round(r.real * q),))
        for r in np.roots(f))
    assert forms.is_irreducible(f) == (not reducible_by_float)
