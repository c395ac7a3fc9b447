import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import stazbw.algebra as ga
from stazbw.algebra import Multivector
from stazbw.matrix_rep import mv_to_matrix

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
BIVECTOR_MASKS = [3, 5, 9, 6, 10, 12]

coef = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
mv16 = st.lists(coef, min_size=16, max_size=16).map(lambda c: Multivector(c))
int16 = st.lists(st.integers(-20, 20), min_size=16, max_size=16).map(
    lambda c: Multivector(np.array(c, dtype=float)))


def brute_product(a, b):
    """Independent product: expand blades as index lists and bubble-sort them."""
    out = np.zeros(16)
    for ma in range(16):
        for mb in range(16):
            if a[ma] == 0 or b[mb] == 0:
                continue
            idx = [i for i in range(4) if ma >> i & 1] + [i for i in range(4) if mb >> i & 1]
            sign = 1.0
            changed = True
            while changed:
                changed = False
                for k in range(len(idx) - 1):
                    if idx[k] > idx[k + 1]:
                        idx[k], idx[k + 1] = idx[k + 1], idx[k]
                        sign = -sign
                        changed = True
            k = 0
            res = []
            while k < len(idx):
                if k + 1 < len(idx) and idx[k] == idx[k + 1]:
                    sign *= ETA[idx[k], idx[k]]
                    k += 2
                else:
                    res.append(idx[k])
                    k += 1
            mask = sum(1 << i for i in res)
            out[mask] += sign * a[ma] * b[mb]
    return out


def test_basis_squares():
    assert ga.basis_vector(0) * ga.basis_vector(0) == 1
    for i in (1, 2, 3):
        assert ga.basis_vector(i) * ga.basis_vector(i) == -1
    I = ga.pseudoscalar()
    assert I * I == -1


def test_anticommutators_exact():
    for mu in range(4):
        for nu in range(4):
            a, b = ga.basis_vector(mu), ga.basis_vector(nu)
            assert a * b + b * a == 2 * ETA[mu, nu]


def test_orthogonal_vectors_anticommute():
    g1, g2 = ga.basis_vector(1), ga.basis_vector(2)
    e12 = np.zeros(16)
    e12[0b0110] = 1.0
    assert (g1 * g2).coeffs.tolist() == e12.tolist()
    assert g2 * g1 == -(g1 * g2)


def test_blade_masks_and_grades():
    assert ga.blade(1, 2)[0b0110] == 1.0
    assert ga.blade(2, 1)[0b0110] == -1.0
    assert [int(g) for g in ga.GRADE] == [bin(m).count("1") for m in range(16)]


@pytest.mark.parametrize("seed", range(5))
def test_product_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(16), rng.standard_normal(16)
    assert np.allclose(ga.gp(a, b), brute_product(a, b), atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(mv16, mv16, mv16)
def test_associativity(a, b, c):
    lhs = (a * b) * c
    rhs = a * (b * c)
    scale = max(1.0, a.norm() * b.norm() * c.norm())
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(int16, int16, int16)
def test_distributivity_exact_on_integers(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a + b) * c == a * c + b * c


@settings(max_examples=60, deadline=None)
@given(mv16, mv16)
def test_reverse_is_anti_automorphism(a, b):
    assert (~(a * b)).allclose((~b) * (~a), atol=1e-12 * max(1.0, a.norm() * b.norm()))
    assert ~~a == a


def test_reverse_examples():
    assert ga.reverse(ga.scalar(5)) == 5
    assert ga.reverse(ga.blade(1, 2)) == -ga.blade(1, 2)
    assert ga.reverse(ga.pseudoscalar()) == ga.pseudoscalar()
    assert ga.reverse(ga.blade(0, 1, 2)) == -ga.blade(0, 1, 2)


def test_even_elements_closed_and_reverse_negates_bivectors():
    rng = np.random.default_rng(3)
    even = ga.GRADE % 2 == 0
    a = Multivector(np.where(even, rng.standard_normal(16), 0))
    b = Multivector(np.where(even, rng.standard_normal(16), 0))
    assert (a * b).is_even(atol=1e-13)
    diff = (a - ~a).coeffs
    assert np.all(diff[ga.GRADE != 2] == 0)
    assert np.allclose(diff[ga.GRADE == 2], 2 * a.coeffs[ga.GRADE == 2])


def test_grade_projection():
    x = 1 + ga.blade(1, 2)
    assert ga.grade_project(x, 0) == 1
    assert ga.grade_project(ga.blade(0, 1), 2) == ga.blade(0, 1)
    assert ga.grade_project(ga.blade(0, 1), 0) == 0
    with pytest.raises(ValueError):
        ga.grade_project(x, 5)
    with pytest.raises(ValueError):
        ga.grade_project(x, -1)


@settings(max_examples=40, deadline=None)
@given(mv16)
def test_grades_sum_to_whole(a):
    total = sum((a.grade(r) for r in range(5)), Multivector())
    assert total == a


def test_wedge_and_dot():
    g1, g2 = ga.basis_vector(1), ga.basis_vector(2)
    assert ga.wedge(g1, g2) == ga.blade(1, 2)
    assert ga.dot(g1, g1) == -1
    assert ga.dot(ga.blade(1, 2), g2) == -g1
    m = 1.7
    assert (ga.dot(2 * m * ga.blade(1, 2), 0.5 * ga.blade(2, 1))).allclose(m)
    assert (g1 ^ g2) == ga.wedge(g1, g2) and (g1 | g1) == ga.dot(g1, g1)


def test_bivector_dot_vector_is_vector():
    rng = np.random.default_rng(7)
    F = Multivector(np.where(ga.GRADE == 2, rng.standard_normal(16), 0))
    w = ga.vector(rng.standard_normal(4))
    out = F | w
    assert np.all(out.coeffs[ga.GRADE != 1] == 0)
    assert out.allclose((F * w).grade(1), atol=1e-14)


def test_exp_examples():
    assert ga.exp_even(Multivector()) == 1
    m, tau = 1.3, 0.8
    got = ga.exp_even(ga.blade(2, 1) * (-m * tau))
    want = math.cos(m * tau) - ga.blade(2, 1) * math.sin(m * tau)
    assert got.allclose(want, atol=1e-15)
    a = 0.7
    got = ga.exp_even(ga.blade(1, 0) * a)
    assert got.allclose(math.cosh(a) + ga.blade(1, 0) * math.sinh(a), atol=1e-15)


@pytest.mark.parametrize("mask", BIVECTOR_MASKS)
@pytest.mark.parametrize("size", [0.1, 1.0, 3.0])
def test_closed_form_agrees_with_series(mask, size):
    c = np.zeros(16)
    c[mask] = size
    assert np.allclose(ga.exp_array(c), ga.exp_array(c, method="series"), atol=1e-13)


def test_exp_of_non_simple_bivector_uses_series():
    c = np.zeros(16)
    c[0b0011], c[0b1100] = 0.4, 0.9  # g01 + g23 is not simple
    e = ga.exp_array(c)
    M = mv_to_matrix(c)
    # matrix exponential by eigen-decomposition as an independent oracle
    w, V = np.linalg.eig(M)
    assert np.allclose(mv_to_matrix(e), V @ np.diag(np.exp(w)) @ np.linalg.inv(V), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.floats(0.0, 5.0))
def test_exp_inverse_pair(direction, size):
    d = np.array(direction)
    if np.linalg.norm(d) < 1e-3:
        return
    c = np.zeros(16)
    c[BIVECTOR_MASKS] = d / np.linalg.norm(d) * size
    B = Multivector(c)
    E, Einv = ga.exp_even(B), ga.exp_even(-B)
    # boosts grow like cosh(size), so cancellation error scales with |E| |E^-1|
    tol = 1e-14 * max(1.0, E.norm() * Einv.norm())
    assert (E * Einv).allclose(1, atol=tol)


def test_exp_rejects_huge_and_unknown_method():
    c = np.zeros(16)
    c[0b0011] = 1e4
    c[0b1100] = 1e4
    with pytest.raises(ga.SeriesDivergenceError):
        ga.exp_array(c)
    with pytest.raises(ValueError):
        ga.exp_array(np.zeros(16), method="pade")


@pytest.mark.parametrize("mask", BIVECTOR_MASKS)
def test_log_round_trip(mask):
    c = np.zeros(16)
    c[mask] = -0.9
    back = ga.log_simple_rotor(Multivector(ga.exp_array(c)))
    assert np.allclose(back.coeffs, c, atol=1e-14)


def test_sandwich():
    assert ga.sandwich(ga.scalar(1), ga.basis_vector(2)) == ga.basis_vector(2)
    th = 0.3
    R = ga.exp_even(ga.blade(2, 1) * (-th / 2))
    got = ga.sandwich(R, ga.basis_vector(1))
    want = math.cos(th) * ga.basis_vector(1) + math.sin(th) * ga.basis_vector(2)
    assert got.allclose(want, atol=1e-15)
    mats = mv_to_matrix(R) @ mv_to_matrix(ga.basis_vector(1)) @ mv_to_matrix(~R)
    assert np.allclose(mv_to_matrix(got), mats, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=6, max_size=6),
       st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_rotor_preserves_norm(gen, comps):
    c = np.zeros(16)
    c[BIVECTOR_MASKS] = gen
    R = ga.exp_even(Multivector(c))
    a = ga.vector(comps)
    b = ga.sandwich(R, a)
    assert np.all(np.abs(b.coeffs[ga.GRADE != 1]) <= 1e-12 * max(1.0, a.norm() * R.norm() ** 2))
    assert abs((b * b).scalar_part() - (a * a).scalar_part()) <= 1e-12 * max(1.0, b.norm() ** 2)


def test_invert_examples():
    assert ga.invert(ga.scalar(1)) == 1
    c = np.zeros(16)
    c[[3, 6, 12]] = [0.3, -0.8, 0.5]
    R = ga.exp_even(Multivector(c))
    assert ga.invert(R).allclose(~R, atol=1e-14)
    assert ga.invert(2 * R).allclose(~R / 2, atol=1e-14)
    assert (2 * R * ga.invert(2 * R)).allclose(1, atol=1e-14)


def test_invert_with_pseudoscalar_part():
    psi = 0.7 + 0.4 * ga.pseudoscalar() + 0.2 * ga.blade(0, 3)
    assert (psi * ga.invert(psi)).allclose(1, atol=1e-14)
    assert (ga.invert(psi) * psi).allclose(1, atol=1e-14)


def test_invert_lightlike_is_degenerate():
    null = 0.5 * (1 + ga.blade(0, 1))  # (1 + g01)(1 - g01) = 0
    with pytest.raises(ga.DegenerateSpinorError):
        ga.invert(null)


def test_text_form():
    a = 1.0 - 0.5 * ga.blade(1, 2) + 2 * ga.blade(0, 1, 3)
    assert ga.format_multivector(a) == "1.0*s - 0.5*g12 + 2.0*g013"
    assert ga.parse_multivector("2*g21 + 3 - g0") == 3 - ga.basis_vector(0) - 2 * ga.blade(1, 2)
    assert ga.parse_multivector("0") == 0
    assert ga.parse_multivector("1e-3*g0123") == 1e-3 * ga.pseudoscalar()
    assert str(a) == ga.format_multivector(a)


@pytest.mark.parametrize("bad", ["", "1*g4", "g00", "2 3", "1 +", "abc", "1**g0"])
def test_text_form_rejects(bad):
    with pytest.raises(ValueError):
        ga.parse_multivector(bad)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64),
                min_size=16, max_size=16))
def test_text_round_trip_exact(c):
    a = Multivector(c)
    assert ga.parse_multivector(ga.format_multivector(a)) == a


def test_multivector_is_immutable():
    a = ga.basis_vector(0)
    with pytest.raises(ValueError):
        a.coeffs[0] = 3.0
    with pytest.raises(ValueError):
        Multivector([1.0, 2.0])
