"""Residuals of the nonlinear Dirac-like equation and of the Dirac-Hestenes equation.

Nothing here solves a field equation.  Everything is evaluated along a
single world-line, where d/dtau = v . grad, or on explicit plane waves whose
gradient is known in closed form.  A spinor field's gradient is passed as
an array ``grad[mu]`` of the 16 coefficients of d_mu psi (lower index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import algebra as ga
from .algebra import Multivector, gp, rev
from .dynamics import (
    ETA, FieldSpec, ParticleState, Trajectory, _components, _embed, _kinetic,
    eom_derivatives, minkowski_dot, zbw_average,
)

__all__ = [
    "ResidualReport", "LinearizationReport", "nonlinear_residual",
    "free_nonlinear_residual", "dh_residual", "dh_residual_planewave", "linearized_residual",
    "planewave", "eigen_gradient", "rest_frame_rotor", "linearization_check",
    "trajectory_residuals", "TAGS",
]

TAGS = ("nonlinear", "free_nonlinear", "linearized", "dirac_hestenes")

_G0 = ga.basis_vector(0).coeffs
_G12 = ga.blade(1, 2).coeffs
_G21 = ga.blade(2, 1).coeffs
_UP = [ETA[mu] * ga.basis_vector(mu).coeffs for mu in range(4)]  # gamma^mu


@dataclass(frozen=True)
class ResidualReport:
    tag: str  # one of TAGS
    norms: np.ndarray

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown residual tag {self.tag!r}; expected one of {TAGS}")

    @property
    def max(self) -> float:
        return float(np.max(self.norms)) if len(self.norms) else 0.0

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.norms ** 2))) if len(self.norms) else 0.0


@dataclass(frozen=True)
class LinearizationReport:
    mean_velocity: Multivector
    pre: ResidualReport       # free nonlinear equation, instantaneous v
    post: ResidualReport      # v replaced by its zitterbewegung mean
    dirac: ResidualReport     # ordinary Dirac-Hestenes form
    identity_gap: float       # max |linearized - p * Dirac-Hestenes|, zero on p-eigenfunctions


def nonlinear_residual(s: ParticleState, psi_dot: Multivector,
                       f: Optional[FieldSpec] = None) -> Multivector:
    """psi_dot g1 g2 + pi psi g0, with psi_dot standing for (psi g0 psi~) . grad psi."""
    f = f or FieldSpec()
    pi = _kinetic(_components(s.x), _components(s.p), f)
    out = gp(psi_dot.coeffs, _G12) + gp(gp(_embed(pi), s.psi.coeffs), _G0)
    return Multivector(out)


def rest_frame_rotor(p) -> Multivector:
    """Boost L with L p L~ parallel to gamma_0 (p future timelike)."""
    pc = np.asarray(_components(p) if isinstance(p, Multivector) else p, dtype=float)
    m = math.sqrt(float(minkowski_dot(pc, pc)))
    if not pc[0] > 0:
        raise ValueError("momentum must be future-pointing timelike")
    phat = _embed(pc / m)
    num = gp(_G0, phat)
    num[0] += 1.0
    return Multivector(num / math.sqrt(2.0 * (1.0 + pc[0] / m)))


def free_nonlinear_residual(s: ParticleState, psi_dot: Multivector, m: float,
                            to_rest_frame: bool = True) -> Multivector:
    """v.grad psi g1 g2 + m psi^-1 v psi~^-1 psi g0 with v = psi g0 psi~.

    psi^-1 v psi~^-1 equals p/m only where p is along gamma_0, so by default
    the state is first boosted to the rest frame of p and the residual is
    returned in that frame.
    """
    psi, pdot = s.psi.coeffs, psi_dot.coeffs
    if to_rest_frame:
        L = rest_frame_rotor(s.p).coeffs
        psi, pdot = gp(L, psi), gp(L, pdot)
    inv = ga.invert_array(psi)
    v = gp(gp(psi, _G0), rev(psi))
    mean_dir = gp(gp(inv, v), rev(inv))
    out = gp(pdot, _G12) + m * gp(gp(mean_dir, psi), _G0)
    return Multivector(out)


def _grad_contract(grad, vec_components):
    """(a . grad) psi = a^mu d_mu psi."""
    return np.tensordot(np.asarray(vec_components), np.asarray(grad), axes=1)


def _dirac_operator(grad):
    """grad psi = gamma^mu d_mu psi."""
    return sum(gp(_UP[mu], grad[mu]) for mu in range(4))


def dh_residual(psi: Multivector, grad, m: float) -> Multivector:
    """grad psi g1 g2 + m psi g0."""
    out = gp(_dirac_operator(grad), _G12) + m * gp(psi.coeffs, _G0)
    return Multivector(out)


def linearized_residual(psi: Multivector, grad, p, m: float) -> Multivector:
    """(p . grad) psi g1 g2 + m p psi g0."""
    pc = _components(p) if isinstance(p, Multivector) else np.asarray(p, dtype=float)
    out = gp(_grad_contract(grad, pc), _G12) + m * gp(gp(_embed(pc), psi.coeffs), _G0)
    return Multivector(out)


def eigen_gradient(psi: Multivector, p) -> np.ndarray:
    """Gradient of the momentum-p plane wave through psi: d_mu psi = -p_mu psi g2 g1."""
    pc = _components(p) if isinstance(p, Multivector) else np.asarray(p, dtype=float)
    base = -gp(psi.coeffs, _G21)
    return (ETA * pc)[:, None] * base[None, :]


def planewave(psi0: Multivector, m: float, x, p=None, sign: int = -1):
    """psi(x) = psi0 exp(sign g2 g1 p.x) and its gradient; p defaults to m g0."""
    pc = np.array([m, 0, 0, 0]) if p is None else np.asarray(
        _components(p) if isinstance(p, Multivector) else p, dtype=float)
    phase = float(minkowski_dot(pc, np.asarray(x, dtype=float)))
    E = ga.exp_array(sign * phase * _G21)
    psi = gp(psi0.coeffs, E)
    d = sign * gp(psi, _G21)  # derivative of psi with respect to the phase
    grad = (ETA * pc)[:, None] * d[None, :]
    return Multivector(psi), grad


def dh_residual_planewave(psi0: Multivector, m: float, x, p=None,
                          sign: int = -1) -> Multivector:
    """grad psi g1 g2 + m psi g0 for the plane wave psi0 exp(sign g2 g1 p.x)."""
    psi, grad = planewave(psi0, m, x, p=p, sign=sign)
    return dh_residual(psi, grad, m)


def trajectory_residuals(t: Trajectory):
    """Per-sample norms of the nonlinear residual and the instantaneous DH form.

    The DH form uses the p-eigenfunction extension through each sample,
    which gives -pi psi + m psi g0.
    """
    f = t.field
    m = t.mass
    nl = np.empty(len(t))
    dh = np.empty(len(t))
    for i, s in enumerate(t.states()):
        d = eom_derivatives(s, f)
        nl[i] = nonlinear_residual(s, d.psi_dot, f).norm()
        pi = _kinetic(t.x[i], t.p[i], f)
        dh[i] = dh_residual(s.psi, eigen_gradient(s.psi, pi), m).norm()
    return nl, dh


def linearization_check(traj: Trajectory, periods: int = 1) -> LinearizationReport:
    """Replace v by its zitterbewegung mean and compare the three residual forms."""
    vbar = zbw_average(traj, periods=periods)
    m = traj.mass
    p_lin = m * vbar.vector_components()
    f = traj.field
    pre, post, dh, gap = [], [], [], 0.0
    for i, s in enumerate(traj.states()):
        d = eom_derivatives(s, f)
        pre.append(free_nonlinear_residual(s, d.psi_dot, m).norm())
        grad = eigen_gradient(s.psi, p_lin)
        r_lin = linearized_residual(s.psi, grad, p_lin, m)
        r_dh = dh_residual(s.psi, grad, m)
        post.append(r_lin.norm())
        dh.append(r_dh.norm())
        gap = max(gap, ga.norm(r_lin.coeffs - gp(_embed(p_lin), r_dh.coeffs)))
    return LinearizationReport(
        mean_velocity=vbar,
        pre=ResidualReport("free_nonlinear", np.array(pre)),
        post=ResidualReport("linearized", np.array(post)),
        dirac=ResidualReport("dirac_hestenes", np.array(dh)),
        identity_gap=gap,
    )
