"""Moving frames along world-lines: rotor tetrads, Frenet frames, Darboux bivector.

Two frames are computed independently.  The rotor tetrad is
e_mu = R gamma_mu R~ with R the unit rotor inside psi.  The curve Frenet
frame is a Minkowski Gram-Schmidt of the derivatives of x(tau), which come
from a Taylor-mode expansion of the equations of motion, not from
differencing samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import algebra as ga
from .algebra import Multivector, gp, rev
from .dynamics import (
    ETA, VEC, FieldSpec, ParticleState, _components, _embed, as_vector, eom_derivatives,
    minkowski_dot, spin_bivector,
)

__all__ = [
    "Tetrad", "CurvatureSet", "FrenetFrame", "RotorKinematics", "rotor_tetrad",
    "rotor_derivative", "tetrad_derivative", "darboux_bivector", "darboux_residuals",
    "internal_field", "frenet_frame_from_curve", "curvature_invariant",
    "darboux_decomposition", "mass_relation", "curve_derivatives", "split_spinor",
    "compare_tetrads", "lorentz_force_form",
]

_GAMMA = [ga.basis_vector(mu).coeffs for mu in range(4)]
_I4 = ga.pseudoscalar().coeffs


@dataclass(frozen=True)
class Tetrad:
    """Four frame vectors as contravariant component rows e[mu, nu]."""

    e: np.ndarray

    @property
    def legs(self) -> tuple:
        return tuple(as_vector(row) for row in self.e)

    def upper(self) -> np.ndarray:
        """Reciprocal frame e^mu = eta^{mu mu} e_mu."""
        return ETA[:, None] * self.e

    def gram(self) -> np.ndarray:
        return np.einsum("ia,a,ja->ij", self.e, ETA, self.e)

    def orthonormality_error(self) -> float:
        return float(np.max(np.abs(self.gram() - np.diag(ETA))))


@dataclass(frozen=True)
class CurvatureSet:
    K1: float
    K2: float
    K3: float

    def invariant(self) -> float:
        return self.K1 ** 2 - self.K2 ** 2 - self.K3 ** 2


def split_spinor(psi: Multivector):
    """psi = rho^(1/2) exp(beta g5 / 2) R  ->  (rho, beta, R)."""
    c = psi.coeffs
    q = gp(c, rev(c))
    s, p = q[0], q[15]
    rho = math.hypot(s, p)
    if rho <= 1e-12 * float(np.dot(c, c)) or rho == 0.0:
        raise ga.DegenerateSpinorError("psi psi~ vanishes; no rotor can be extracted")
    beta = math.atan2(p, s)
    undo = np.zeros(16)
    undo[0], undo[15] = math.cos(beta / 2), -math.sin(beta / 2)
    R = gp(undo, c) / math.sqrt(rho)
    return rho, beta, Multivector(R)


def rotor_tetrad(psi: Multivector) -> Tetrad:
    _, _, R = split_spinor(psi)
    r = R.coeffs
    rows = [gp(gp(r, g), rev(r))[VEC] for g in _GAMMA]
    return Tetrad(np.array(rows))


def density_frame(psi: Multivector) -> np.ndarray:
    """rho e_mu = psi gamma_mu psi~ as component rows."""
    c = psi.coeffs
    return np.array([gp(gp(c, g), rev(c))[VEC] for g in _GAMMA])


@dataclass(frozen=True)
class RotorKinematics:
    R: Multivector
    R_dot: Multivector
    rho: float
    rho_dot: float
    beta: float
    beta_dot: float

    @property
    def omega(self) -> Multivector:
        """2 R_dot R~ (should be a pure bivector)."""
        return Multivector(2.0 * gp(self.R_dot.coeffs, rev(self.R.coeffs)))


def _rotor_kinematics(psi: np.ndarray, psi_dot: np.ndarray) -> RotorKinematics:
    q = gp(psi, rev(psi))
    qd = gp(psi_dot, rev(psi)) + gp(psi, rev(psi_dot))
    s, p = q[0], q[15]
    sd, pd = qd[0], qd[15]
    rho = math.hypot(s, p)
    if rho == 0.0 or rho <= 1e-12 * float(np.dot(psi, psi)):
        raise ga.DegenerateSpinorError("psi psi~ vanishes")
    rho_dot = (s * sd + p * pd) / rho
    beta = math.atan2(p, s)
    beta_dot = (s * pd - p * sd) / (rho * rho)
    undo = np.zeros(16)
    undo[0], undo[15] = math.cos(beta / 2), -math.sin(beta / 2)
    R = gp(undo, psi) / math.sqrt(rho)
    inner = psi_dot - 0.5 * (rho_dot / rho) * psi - 0.5 * beta_dot * gp(_I4, psi)
    R_dot = gp(undo, inner) / math.sqrt(rho)
    return RotorKinematics(Multivector(R), Multivector(R_dot), rho, rho_dot, beta, beta_dot)


def rotor_derivative(s: ParticleState, f: FieldSpec,
                     psi_dot: Optional[Multivector] = None) -> RotorKinematics:
    """R_dot = (psi_dot - rho_dot/(2 rho) psi) / rho^(1/2), plus the duality-angle term."""
    if psi_dot is None:
        psi_dot = eom_derivatives(s, f).psi_dot
    return _rotor_kinematics(s.psi.coeffs, psi_dot.coeffs)


def tetrad_derivative(kin: RotorKinematics) -> np.ndarray:
    """e_mu_dot = R_dot g_mu R~ + R g_mu R_dot~ as component rows."""
    r, rd = kin.R.coeffs, kin.R_dot.coeffs
    rows = [(gp(gp(rd, g), rev(r)) + gp(gp(r, g), rev(rd)))[VEC] for g in _GAMMA]
    return np.array(rows)


def darboux_bivector(tetrad_dot, tetrad: Tetrad) -> Multivector:
    """Omega = 1/2 sum_mu e_mu_dot ^ e^mu."""
    ed = _embed(np.asarray(tetrad_dot))
    eu = _embed(tetrad.upper())
    return Multivector(0.5 * ga.wedge_arrays(ed, eu).sum(axis=0))


def darboux_residuals(tetrad_dot, tetrad: Tetrad, omega: Multivector) -> np.ndarray:
    """|e_mu_dot - Omega . e_mu| per leg (coefficient norm)."""
    pred = ga.dot_arrays(omega.coeffs, _embed(tetrad.e))[:, VEC]
    return np.linalg.norm(np.asarray(tetrad_dot) - pred, axis=1)


def lorentz_force_form(F: Multivector, w, charge: float, mass: float) -> np.ndarray:
    """(e/m) F . w as components."""
    return (charge / mass) * ga.dot_arrays(F.coeffs, _embed(np.asarray(w)))[VEC]


def internal_field(tetrad_dot, tetrad: Tetrad, m: float, e: float) -> Multivector:
    """F_int = (m / 2e) e_mu_dot ^ e^mu."""
    if e == 0:
        raise ValueError("internal field needs a non-zero charge")
    ed = _embed(np.asarray(tetrad_dot))
    eu = _embed(tetrad.upper())
    return Multivector((m / (2.0 * e)) * ga.wedge_arrays(ed, eu).sum(axis=0))


def curvature_invariant(omega: Multivector) -> float:
    """Omega . Omega (scalar part of Omega^2 for a bivector)."""
    return float(ga.dot_arrays(omega.coeffs, omega.coeffs)[0])


def darboux_decomposition(omega: Multivector, tetrad: Tetrad) -> dict:
    """Components of Omega on the frame bivectors e^a e^b.

    The Frenet ones are K1 (e^1 e^0), K2 (e^2 e^1), K3 (e^3 e^2); the other
    three vanish for a Frenet frame.
    """
    e = _embed(tetrad.e)

    def comp(a, b):
        # coefficient of e^a e^b is <Omega e_b e_a>_0
        return float(gp(gp(omega.coeffs, e[b]), e[a])[0])

    return {
        "K1": comp(1, 0), "K2": comp(2, 1), "K3": comp(3, 2),
        "e2e0": comp(2, 0), "e3e0": comp(3, 0), "e3e1": comp(3, 1),
    }


def compare_tetrads(a: Tetrad, b: Tetrad) -> np.ndarray:
    """Per-leg distance between two frames, allowing a sign flip of each leg."""
    return np.minimum(np.linalg.norm(a.e - b.e, axis=1), np.linalg.norm(a.e + b.e, axis=1))


# -------------------------------------------------------- curve Frenet frame

def _mdot(a, b):
    # bilinear (not sesquilinear) so complex-step differentiation goes through
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


def _gram_schmidt(derivs, rel_tol):
    """Frenet frame from x', x'', x''', x''''; returns (rows, degenerate levels)."""
    frame = []
    degenerate = []
    d1 = derivs[0]
    n2 = _mdot(d1, d1)
    if not n2.real > 0:
        raise ValueError("velocity is not timelike")
    frame.append(d1 / np.sqrt(n2))
    lost = False
    for k in range(1, 4):
        if lost:
            degenerate.append(k)
            frame.append(None)
            continue
        r = derivs[k].copy()
        for j, ej in enumerate(frame):
            r = r - _mdot(r, ej) / ETA[j] * ej
        scale = np.linalg.norm(derivs[k].real)
        size = -_mdot(r, r)
        if scale == 0.0 or not size.real > (rel_tol * scale) ** 2:
            lost = True
            degenerate.append(k)
            frame.append(None)
            continue
        frame.append((-1) ** k * r / np.sqrt(size))
    if lost:
        frame = _complete(frame)
    return np.array(frame), tuple(degenerate)


def _complete(frame):
    """Fill missing spacelike legs with an eta-orthonormal extension."""
    have = [f for f in frame if f is not None]
    out = list(frame)
    for k in range(len(out)):
        if out[k] is not None:
            continue
        best = None
        for mu in range(1, 4):
            r = np.zeros(4, dtype=np.asarray(have[0]).dtype)
            r[mu] = 1.0
            for j, ej in enumerate(have):
                r = r - _mdot(r, ej) / _mdot(ej, ej) * ej
            size = -_mdot(r, r)
            if best is None or size.real > best[1].real:
                best = (r, size)
        out[k] = best[0] / np.sqrt(best[1])
        have.append(out[k])
    return out


@dataclass(frozen=True)
class FrenetFrame:
    tetrad: Tetrad
    curvatures: CurvatureSet
    speed: float
    degenerate: tuple
    frame_dot: Optional[np.ndarray] = None  # d e_mu / ds (arclength), rows

    def frenet_residuals(self) -> np.ndarray:
        """Residual of each Frenet equation, using frame_dot."""
        if self.frame_dot is None:
            raise ValueError("frame derivative needs the fifth derivative of x")
        up = self.tetrad.upper()
        K1, K2, K3 = self.curvatures.K1, self.curvatures.K2, self.curvatures.K3
        pred = np.array([
            K1 * up[1],
            -K1 * up[0] + K2 * up[2],
            -K2 * up[1] + K3 * up[3],
            -K3 * up[2],
        ])
        return np.linalg.norm(self.frame_dot - pred, axis=1)

    def darboux(self) -> Multivector:
        if self.frame_dot is None:
            raise ValueError("frame derivative needs the fifth derivative of x")
        return darboux_bivector(self.frame_dot, self.tetrad)


def frenet_frame_from_curve(x_derivs: Sequence, rel_tol: float = 1e-8,
                            step: float = 1e-30) -> FrenetFrame:
    """Frenet frame and curvatures from the derivatives x', x'', x''', x'''' [, x^(5)].

    Curvatures are per unit proper length, signs chosen so every K_i >= 0.
    Degenerate levels (a derivative inside the span of the lower ones) get
    K = 0 from that level on.  The frame derivative is the complex-step
    derivative of the Gram-Schmidt map and is only produced when the fifth
    derivative is supplied.
    """
    D = [np.asarray(d, dtype=float) for d in x_derivs]
    if len(D) < 4:
        raise ValueError("need at least four derivatives of x")
    rows, degen = _gram_schmidt(D[:4], rel_tol)
    speed = math.sqrt(float(_mdot(D[0], D[0])))

    # derivative of the frame along the curve: perturb D_k by i*step*D_{k+1}
    nd = 4 if len(D) >= 5 else 3
    Dc = [D[k] + 1j * step * D[k + 1] if k < nd else D[k].astype(complex) for k in range(4)]
    rows_c, degen_c = _gram_schmidt(Dc, rel_tol)
    if degen_c != degen:
        raise ArithmeticError("degeneracy pattern changed under complex step")
    dframe = rows_c.imag / step / speed  # d/ds
    tet = Tetrad(rows)

    def k_from(level):
        if level in degen or any(d < level for d in degen):
            return 0.0
        return float(_mdot(dframe[level - 1], rows[level]))

    K = CurvatureSet(k_from(1), k_from(2), k_from(3))
    return FrenetFrame(tet, K, speed, degen, dframe if len(D) >= 5 else None)


def curve_derivatives(s: ParticleState, f: FieldSpec, order: int = 5) -> list:
    """x^(1) .. x^(order) at a state, by Taylor-mode recursion of the EOM.

    Exact for free and constant-F motion.  For a general potential the field
    is frozen at the current point, so derivatives above the third ignore
    the field gradient along the path.
    """
    psi = [s.psi.coeffs.copy()]
    pi0 = _components(s.p)
    F = None
    if f.kind != "free" and f.charge != 0.0:
        F = f.field_at(_components(s.x)).coeffs
        if f.kind == "potential_A":
            pi0 = pi0 - f.charge * f.potential(_components(s.x))
    pis = [pi0]
    K = gp(_GAMMA[0], ga.blade(2, 1).coeffs)
    vs = []
    for k in range(order):
        v_k = sum(gp(gp(psi[j], _GAMMA[0]), rev(psi[k - j])) for j in range(k + 1))
        vs.append(v_k)
        acc = sum(gp(_embed(pis[j]), psi[k - j]) for j in range(k + 1))
        psi.append(-gp(acc, K) / (k + 1))
        if F is None:
            pis.append(np.zeros(4))
        else:
            pis.append(f.charge * ga.dot_arrays(F, v_k)[VEC] / (k + 1))
    # x_{k+1} = v_k / (k+1); the n-th derivative is n! x_n = (n-1)! v_{n-1}
    return [math.factorial(n - 1) * vs[n - 1][VEC] for n in range(1, order + 1)]


def mass_relation(s: ParticleState, f: Optional[FieldSpec] = None):
    """(p . v, Omega . S) with Omega = 2 R_dot R~ and S the spin bivector."""
    f = f or FieldSpec()
    d = eom_derivatives(s, f)
    kin = _rotor_kinematics(s.psi.coeffs, d.psi_dot.coeffs)
    S = spin_bivector(s.psi)
    pv = float(minkowski_dot(_components(s.p), _components(d.x_dot)))
    omega_s = float(gp(kin.omega.coeffs, S.coeffs)[0])
    return pv, omega_s
