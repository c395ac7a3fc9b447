import math

import numpy as np
import pytest

import stazbw.algebra as ga
from stazbw import residuals as res
from stazbw.checks import perturbation_slopes, planewave_family
from stazbw.dynamics import (
    ParticleState, as_vector, demo_config, eom_derivatives, integrate,
    trivial_config, velocity,
)

G0 = ga.basis_vector(0)
G12, G21 = ga.blade(1, 2), ga.blade(2, 1)


@pytest.fixture(scope="module")
def helix():
    return integrate(demo_config(m=1.0, steps_per_period=200, periods=2))


def planewave_state(psi0, p, m, x):
    psi, grad = res.planewave(psi0, m, x, p=p)
    v = velocity(psi).vector_components()
    psi_dot = ga.Multivector(np.tensordot(v, grad, axes=1))
    return ParticleState(0.0, as_vector(x), psi, p), psi_dot, grad


def test_nonlinear_residual_zero_on_trajectory(helix):
    nl, _ = res.trajectory_residuals(helix)
    assert np.max(nl) <= 1e-10


def test_nonlinear_residual_negative_control(helix):
    s = helix.state(17)
    d = eom_derivatives(s, helix.field)
    bad = ParticleState(s.tau, s.x, s.psi + 0.01 * G12 * s.psi, s.p)
    assert res.nonlinear_residual(bad, d.psi_dot).norm() > 1e-4


def test_nonlinear_residual_trivial_closed_form():
    m, tau = 1.0, 0.6
    psi = ga.exp_even(G21 * (-m * tau))
    psi_dot = -m * G21 * psi
    s = ParticleState(tau, ga.Multivector(), psi, m * G0)
    assert res.nonlinear_residual(s, psi_dot).norm() <= 1e-14


def test_free_nonlinear_residual_helix(helix):
    f = helix.field
    for i in range(0, len(helix), 37):
        s = helix.state(i)
        d = eom_derivatives(s, f)
        assert res.free_nonlinear_residual(s, d.psi_dot, helix.mass).norm() <= 1e-9


def test_free_nonlinear_residual_negative_control():
    rng = np.random.default_rng(21)
    psi = ga.Multivector(np.where(ga.GRADE % 2 == 0, rng.standard_normal(16), 0))
    s = ParticleState(0.0, ga.Multivector(), psi, G0)
    psi_dot = ga.Multivector(np.where(ga.GRADE % 2 == 0, rng.standard_normal(16), 0))
    assert res.free_nonlinear_residual(s, psi_dot, 1.0).norm() > 1e-3


def test_free_residual_needs_rest_frame_for_moving_p():
    m = 1.0
    (psi0, p), = planewave_family(m, 1, np.random.default_rng(2))
    s, psi_dot, _ = planewave_state(psi0, p, m, np.zeros(4))
    assert res.free_nonlinear_residual(s, psi_dot, m).norm() <= 1e-12
    assert res.free_nonlinear_residual(s, psi_dot, m, to_rest_frame=False).norm() > 1e-3


def test_rest_frame_rotor():
    p = as_vector([1.5, 0.3, -0.4, 0.9])
    L = res.rest_frame_rotor(p)
    m = math.sqrt((p * p).scalar_part())
    assert ga.sandwich(L, p).allclose(m * G0, atol=1e-14)
    assert (L * ~L).allclose(1, atol=1e-14)
    with pytest.raises(ValueError):
        res.rest_frame_rotor(as_vector([-1.0, 0, 0, 0]))


def test_dh_planewave_examples():
    one = ga.scalar(1.0)
    assert res.dh_residual_planewave(one, 1.0, np.zeros(4)).norm() == 0.0
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.standard_normal(4)
        x[0] = abs(x[0]) + np.linalg.norm(x[1:]) + 0.1
        assert res.dh_residual_planewave(one, 1.0, x).norm() <= 1e-12


@pytest.mark.parametrize("m", [0.5, 1.0, 3.0])
def test_dh_planewave_wrong_sign(m):
    r = res.dh_residual_planewave(ga.scalar(1.0), m, [0.3, 0.1, 0, 0], sign=+1)
    assert r.norm() == pytest.approx(2 * m, rel=1e-12)


def test_planewave_gradient_matches_differences():
    m = 1.3
    psi0 = ga.exp_even(ga.blade(1, 0) * 0.3)
    p = as_vector([m * math.cosh(0.2), m * math.sinh(0.2), 0, 0])
    x = np.array([0.4, -0.2, 0.5, 0.1])
    _, grad = res.planewave(psi0, m, x, p=p)
    h = 1e-5
    for mu in range(4):
        dx = np.zeros(4)
        dx[mu] = h
        fd = (res.planewave(psi0, m, x + dx, p=p)[0].coeffs
              - res.planewave(psi0, m, x - dx, p=p)[0].coeffs) / (2 * h)
        assert np.allclose(fd, grad[mu], atol=1e-9)


def test_eigen_gradient_is_the_planewave_gradient():
    m = 1.0
    (psi0, p), = planewave_family(m, 1, np.random.default_rng(5))
    x = np.array([0.2, 0.1, -0.3, 0.4])
    psi, grad = res.planewave(psi0, m, x, p=p)
    assert np.allclose(res.eigen_gradient(psi, p), grad, atol=1e-14)


def test_eigenfunction_gradient_sign():
    """grad psi g1 g2 = -p psi for the plane wave with d_mu psi = -p_mu psi g2 g1."""
    m = 1.0
    (psi0, p), = planewave_family(m, 1, np.random.default_rng(6))
    psi, grad = res.planewave(psi0, m, np.zeros(4), p=p)
    lhs = res._dirac_operator(grad)
    lhs = ga.gp(lhs, G12.coeffs)
    assert np.allclose(lhs, -(p * psi).coeffs, atol=1e-14)


def test_planewave_family_all_residuals():
    m = 1.0
    rng = np.random.default_rng(7)
    for psi0, p in planewave_family(m, 6, rng):
        for x in rng.standard_normal((4, 4)):
            s, psi_dot, grad = planewave_state(psi0, p, m, x)
            assert res.nonlinear_residual(s, psi_dot).norm() <= 1e-10
            assert res.free_nonlinear_residual(s, psi_dot, m).norm() <= 1e-10
            assert res.linearized_residual(s.psi, grad, p, m).norm() <= 1e-10
            assert res.dh_residual(s.psi, grad, m).norm() <= 1e-10


def test_perturbation_slopes():
    m = 1.0
    rng = np.random.default_rng(8)
    (psi0, p), = planewave_family(m, 1, rng)
    slopes = perturbation_slopes(psi0, p, m, np.array([0.1, 0.2, 0.0, -0.3]), rng,
                                 eps_grid=np.logspace(-6, -2, 5))
    assert len(slopes) == 4
    assert min(slopes) >= 0.9


def test_linearization_trivial():
    t = integrate(trivial_config(steps_per_period=400, periods=1.5))
    rep = res.linearization_check(t)
    assert rep.pre.max <= 1e-10
    assert rep.post.max <= 1e-10
    assert rep.dirac.max <= 1e-10
    # RK4 damps |psi|^2 by about (mh)^6/144 per step, which sets this floor
    assert rep.mean_velocity.allclose(G0, atol=1e-11)


def test_linearization_helix(helix):
    rep = res.linearization_check(helix)
    assert rep.pre.max <= 1e-9
    assert rep.dirac.max > 1e-2  # pointwise, the helix does not solve the linear equation
    assert rep.identity_gap <= 1e-12
    assert rep.pre.max >= rep.pre.rms and rep.dirac.max >= rep.dirac.rms
    assert rep.pre.tag == "free_nonlinear" and rep.post.tag == "linearized"
    assert rep.dirac.tag == "dirac_hestenes"


def test_linearization_scales_with_mass():
    a = res.linearization_check(integrate(demo_config(m=1.0, steps_per_period=100, periods=1.5)))
    b = res.linearization_check(integrate(demo_config(m=2.0, steps_per_period=100, periods=1.5)))
    assert b.dirac.max == pytest.approx(2 * a.dirac.max, rel=1e-6)
    assert b.post.max == pytest.approx(4 * a.post.max, rel=1e-6)  # p . grad carries another m


def test_linearization_needs_a_full_period():
    t = integrate(demo_config(steps_per_period=64, periods=0.5))
    with pytest.raises(ValueError):
        res.linearization_check(t)


def test_residual_report_empty():
    r = res.ResidualReport("nonlinear", np.array([]))
    assert r.max == 0.0 and r.rms == 0.0


def test_residual_report_rejects_unknown_tag():
    with pytest.raises(ValueError):
        res.ResidualReport("other", np.zeros(3))
