"""Barut-Zanghi equations of motion in the spacetime algebra.

State is (tau, x, psi, p).  The three coupled equations are

    psi_dot gamma_1 gamma_2 + pi psi gamma_0 = 0,   pi = p - e A(x)
    x_dot = psi gamma_0 reverse(psi)
    pi_dot = e F . x_dot

integrated together with fixed-step RK4.  Vectors are carried as their
contravariant components x^mu; the spinor as 16 coefficients.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import algebra as ga
from .algebra import Multivector, gp, rev
from .matrix_rep import (
    bz_velocity, dirac_bar, gamma_matrix, spinor_to_column,
)

__all__ = [
    "ETA", "VEC", "ParticleState", "FieldSpec", "SimConfig", "Trajectory", "Derivatives",
    "IntegrationError", "NoOscillationError", "eom_derivatives", "integrate", "velocity",
    "hamiltonian", "spin_bivector", "bz_spin_tensor", "spin_components", "zbw_average",
    "zbw_frequency", "eval_lagrangian", "eval_lagrangian_bz", "zbw_period",
    "normalize_hamiltonian", "demo_config", "trivial_config", "angular_momentum",
    "minkowski_dot", "as_vector", "uniform_potential",
]

ETA = np.array([1.0, -1.0, -1.0, -1.0])
VEC = np.array([1, 2, 4, 8])  # blade masks of gamma_0..gamma_3

_G0 = ga.basis_vector(0).coeffs
# psi_dot = -pi psi gamma_0 gamma_2 gamma_1, since (gamma_1 gamma_2)^-1 = gamma_2 gamma_1
_K = gp(_G0, ga.blade(2, 1).coeffs)
_RIGHT_K = np.array([gp(np.eye(16)[i], _K) for i in range(16)])  # row i: e_i * K
_G21 = ga.blade(2, 1).coeffs
_G12 = ga.blade(1, 2).coeffs

_VELOCITY_RESIDUE_TOL = 1e-12
_ODD = ga.GRADE % 2 == 1

# Precomputed maps for the right-hand side:
#   psi_dot = -sum_mu pi^mu (gamma_mu psi K)   ->  _PSI_DOT[mu] @ psi
#   v^mu = <psi gamma_0 psi~>_mu               ->  psi @ _VEL[mu] @ psi
_PSI_DOT = -np.einsum("mij,jk->mki", ga.CAYLEY[VEC], _RIGHT_K).reshape(4, 256)
_VEL = np.einsum("aj,jbl,b->lab", ga.CAYLEY[:, 1, :], ga.CAYLEY,
                 ga.rev(np.ones(16)))[VEC]


class IntegrationError(FloatingPointError):
    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class NoOscillationError(ValueError):
    pass


def minkowski_dot(a, b):
    return np.sum(ETA * np.asarray(a) * np.asarray(b), axis=-1)


def _embed(components):
    comps = np.asarray(components)
    out = np.zeros(comps.shape[:-1] + (16,), dtype=comps.dtype)
    out[..., VEC] = comps
    return out


def as_vector(components) -> Multivector:
    return Multivector(_embed(np.asarray(components, dtype=float)))


def _components(mv) -> np.ndarray:
    c = mv.coeffs if isinstance(mv, Multivector) else np.asarray(mv, dtype=float)
    return c[..., VEC].copy()


# ------------------------------------------------------------------ data types

@dataclass(frozen=True)
class ParticleState:
    tau: float
    x: Multivector
    psi: Multivector
    p: Multivector


@dataclass(frozen=True)
class Derivatives:
    psi_dot: Multivector
    x_dot: Multivector
    p_dot: Multivector


def uniform_potential(F: Multivector) -> Callable[[np.ndarray], np.ndarray]:
    """A(x) = x.F / 2, whose curl is the constant field F."""
    Fc = F.coeffs

    def A(x):
        return ga.dot_arrays(_embed(np.asarray(x, dtype=float)), Fc)[..., VEC] * 0.5
    return A


@dataclass(frozen=True)
class FieldSpec:
    """External electromagnetic field seen by the particle.

    ``constant_F``: the stored momentum is the kinetic one, ``pi_dot = e F.v``.
    ``potential_A``: ``A`` maps contravariant x^mu to A^mu; the canonical
    momentum obeys ``p_dot_mu = e d_mu (A . v)`` and derivatives of A are
    central differences with one Richardson step.
    """

    kind: str = "free"
    F: Optional[Multivector] = None
    A: Optional[Callable[[np.ndarray], np.ndarray]] = None
    charge: float = 0.0
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.kind not in ("free", "constant_F", "potential_A"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "constant_F":
            if self.F is None:
                raise ValueError("constant_F needs a bivector F")
            if np.any(np.abs(ga.GRADE - 2)[np.nonzero(self.F.coeffs)[0]]):
                raise ValueError("F must be a pure bivector")
        if self.kind == "potential_A" and self.A is None:
            raise ValueError("potential_A needs a callable A(x)")

    @property
    def is_free(self) -> bool:
        return self.kind == "free" or self.charge == 0.0

    def potential(self, x) -> np.ndarray:
        if self.kind == "potential_A":
            return np.asarray(self.A(np.asarray(x, dtype=float)), dtype=float)
        if self.kind == "constant_F":
            return uniform_potential(self.F)(x)
        return np.zeros(4)

    def _richardson(self, f, x, mu):
        def central(h):
            dx = np.zeros(4)
            dx[mu] = h
            return (f(x + dx) - f(x - dx)) / (2 * h)
        h = self.fd_step
        return (4 * central(h) - central(2 * h)) / 3

    def potential_gradient(self, x) -> np.ndarray:
        """Array g[mu, nu] = d_mu A^nu."""
        x = np.asarray(x, dtype=float)
        return np.array([self._richardson(self.potential, x, mu) for mu in range(4)])

    def field_at(self, x) -> Multivector:
        """F = d ^ A = gamma^mu ^ d_mu A."""
        if self.kind == "free":
            return Multivector()
        if self.kind == "constant_F":
            return self.F
        g = self.potential_gradient(x)
        out = np.zeros(16)
        for mu in range(4):
            out += ETA[mu] * ga.wedge_arrays(_embed(np.eye(4)[mu]), _embed(g[mu]))
        return Multivector(out)

    def describe(self) -> dict:
        d = {"kind": self.kind, "charge": self.charge}
        if self.F is not None:
            d["F"] = ga.format_multivector(self.F)
        if self.A is not None:
            d["A"] = getattr(self.A, "__name__", repr(self.A))
        return d


@dataclass(frozen=True)
class SimConfig:
    mass: float
    psi0: Multivector
    p0: Multivector
    x0: Multivector = dc_field(default_factory=Multivector)
    field: FieldSpec = dc_field(default_factory=FieldSpec)
    steps_per_period: int = 1000
    periods: float = 10.0
    integrator: str = "rk4"
    tau0: float = 0.0
    check_mass_shell: bool = True

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if int(self.steps_per_period) != self.steps_per_period or self.steps_per_period < 16:
            raise ValueError("steps_per_period must be an integer >= 16")
        if not self.periods > 0:
            raise ValueError("periods must be positive")
        if self.integrator not in ("rk4", "euler"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if not self.psi0.is_even(atol=0.0):
            raise ValueError("psi0 must be an even multivector")
        for name in ("p0", "x0"):
            v = getattr(self, name)
            if np.any(v.coeffs[np.setdiff1d(np.arange(16), VEC)] != 0):
                raise ValueError(f"{name} must be a vector")
        if self.check_mass_shell and self.field.is_free:
            p = _components(self.p0)
            p2 = float(minkowski_dot(p, p))
            if abs(p2 - self.mass ** 2) > 1e-9 * self.mass ** 2:
                raise ValueError(f"p0^2 = {p2!r} is off the mass shell m^2 = {self.mass ** 2!r}")

    @property
    def charge(self) -> float:
        return self.field.charge

    @property
    def step(self) -> float:
        return zbw_period(self.mass) / self.steps_per_period

    @property
    def n_steps(self) -> int:
        return int(round(self.periods * self.steps_per_period))

    def describe(self) -> dict:
        return {
            "mass": self.mass,
            "charge": self.charge,
            "psi0": ga.format_multivector(self.psi0),
            "p0": ga.format_multivector(self.p0),
            "x0": ga.format_multivector(self.x0),
            "field": self.field.describe(),
            "steps_per_period": self.steps_per_period,
            "periods": self.periods,
            "integrator": self.integrator,
            "tau0": self.tau0,
        }

    def digest(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def zbw_period(m: float) -> float:
    """Period 2 pi / omega of the velocity oscillation, omega = 2 m."""
    return math.pi / m


# ------------------------------------------------------------------ equations

def _velocity_array(psi):
    return gp(gp(psi, _G0), rev(psi))


def _kinetic(x, p, fld: FieldSpec):
    if fld.kind == "potential_A" and fld.charge != 0.0:
        return p - fld.charge * fld.potential(x)
    return p


def _rhs(y, fld: FieldSpec):
    psi, x, p = y[:16], y[16:20], y[20:24]
    pi = _kinetic(x, p, fld)
    psi_dot = (pi @ _PSI_DOT).reshape(16, 16) @ psi
    v = _VEL @ psi @ psi
    if fld.kind == "free" or fld.charge == 0.0:
        p_dot = np.zeros(4)
    elif fld.kind == "constant_F":
        p_dot = fld.charge * ga.dot_arrays(fld.F.coeffs, _embed(v))[VEC]
    else:
        g = fld.potential_gradient(x)  # d_mu A^nu
        p_dot = fld.charge * ETA * (g @ (ETA * v))  # raise index on d_mu (A . v)
    return np.concatenate([psi_dot, v, p_dot])


def _pack(state: ParticleState):
    return np.concatenate([state.psi.coeffs, _components(state.x), _components(state.p)])


def eom_derivatives(s: ParticleState, f: FieldSpec) -> Derivatives:
    """(psi_dot, x_dot, p_dot) at a state."""
    d = _rhs(_pack(s), f)
    psi_dot = d[:16]
    scale = max(1.0, ga.norm(psi_dot))
    if np.max(np.abs(psi_dot[_ODD])) > 1e-10 * scale:
        raise ArithmeticError("psi_dot acquired odd grades; the spinor is corrupt")
    return Derivatives(Multivector(psi_dot), as_vector(d[16:20]), as_vector(d[20:24]))


def velocity(psi: Multivector) -> Multivector:
    """x_dot = psi gamma_0 reverse(psi), checked to be a pure vector."""
    full = _velocity_array(psi.coeffs)
    rest = full.copy()
    rest[VEC] = 0.0
    scale = max(1.0, float(np.dot(psi.coeffs, psi.coeffs)))
    if np.max(np.abs(rest)) > _VELOCITY_RESIDUE_TOL * scale:
        raise ArithmeticError("psi gamma_0 reverse(psi) has non-vector parts")
    return as_vector(full[VEC])


def hamiltonian(s: ParticleState, f: Optional[FieldSpec] = None) -> float:
    """H = pi . v (equal to p . v for a free particle)."""
    v = _components(velocity(s.psi))
    p = _components(s.p)
    if f is not None:
        p = _kinetic(p=p, x=_components(s.x), fld=f)
    return float(minkowski_dot(p, v))


def spin_bivector(psi: Multivector) -> Multivector:
    """S = psi gamma_2 gamma_1 reverse(psi) / 2 (hbar = 1).

    For a unit rotor this is R gamma_2 gamma_1 reverse(R) / 2.  Keeping the
    density weight makes x^p + S exactly conserved on free motion.
    """
    if ga.norm(psi.coeffs) == 0.0:
        raise ga.DegenerateSpinorError("zero spinor has no spin")
    return Multivector(gp(gp(psi.coeffs, _G21), rev(psi.coeffs)) * 0.5)


def spin_components(S: Multivector) -> np.ndarray:
    """Covariant components S_{mu nu} of S = S^{mu nu} gamma_mu gamma_nu / 2."""
    up = np.zeros((4, 4))
    c = S.coeffs
    for a in range(4):
        for b in range(a + 1, 4):
            up[a, b] = c[(1 << a) | (1 << b)]
            up[b, a] = -up[a, b]
    return ETA[:, None] * up * ETA[None, :]


def bz_spin_tensor(z) -> np.ndarray:
    """S_{mu nu} = (i/4) z-bar [gamma_mu, gamma_nu] z, real antisymmetric."""
    zb = dirac_bar(z)
    out = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            comm = gamma_matrix(a) @ gamma_matrix(b) - gamma_matrix(b) @ gamma_matrix(a)
            val = 0.25j * (zb @ comm @ np.asarray(z))
            if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
                raise ArithmeticError("spin tensor component is not real")
            out[a, b] = val.real
    return out


def angular_momentum(x, p, psi) -> np.ndarray:
    """Bivector coefficients of J = x ^ p + S (arrays broadcast over samples)."""
    L = ga.wedge_arrays(_embed(np.asarray(x)), _embed(np.asarray(p)))
    S = gp(gp(psi, _G21), rev(psi)) * 0.5
    return L + S


def eval_lagrangian(s: ParticleState, d: Derivatives, f: FieldSpec) -> float:
    """< psi~ psi_dot g1 g2 + p (x_dot - psi g0 psi~) + e A psi g0 psi~ >_0."""
    psi = s.psi.coeffs
    kinetic = gp(gp(rev(psi), d.psi_dot.coeffs), _G12)[0]
    v = _velocity_array(psi)
    constraint = gp(s.p.coeffs, d.x_dot.coeffs - v)[0]
    coupling = 0.0
    if f.kind != "free" and f.charge != 0.0:
        A = _embed(f.potential(_components(s.x)))
        coupling = f.charge * gp(A, v)[0]
    return float(kinetic + constraint + coupling)


def eval_lagrangian_bz(s: ParticleState, d: Derivatives, f: FieldSpec) -> float:
    """Matrix-form Lagrangian i/2 (zbar_dot z - zbar z_dot) + p.(x_dot - v) + e A.v."""
    z = spinor_to_column(s.psi)
    zdot = spinor_to_column(d.psi_dot)
    kin = 0.5j * (dirac_bar(zdot) @ z - dirac_bar(z) @ zdot)
    v = bz_velocity(z)
    p = _components(s.p)
    total = kin.real + minkowski_dot(p, _components(d.x_dot) - v)
    if f.kind != "free" and f.charge != 0.0:
        total += f.charge * minkowski_dot(f.potential(_components(s.x)), v)
    return float(total)


# ---------------------------------------------------------------- integration

@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution; arrays are read-only after construction."""

    tau: np.ndarray
    psi: np.ndarray
    x: np.ndarray
    p: np.ndarray
    h: float
    config: Optional[SimConfig] = None
    digest: str = ""

    def __post_init__(self):
        for arr in (self.tau, self.psi, self.x, self.p):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.tau)

    def state(self, i: int) -> ParticleState:
        return ParticleState(float(self.tau[i]), as_vector(self.x[i]),
                             Multivector(self.psi[i]), as_vector(self.p[i]))

    def states(self):
        for i in range(len(self)):
            yield self.state(i)

    @property
    def field(self) -> FieldSpec:
        return self.config.field if self.config is not None else FieldSpec()

    @property
    def mass(self) -> float:
        if self.config is None:
            raise ValueError("trajectory has no config attached")
        return self.config.mass

    @cached_property
    def v(self) -> np.ndarray:
        out = _velocity_array(self.psi)[:, VEC]
        out.setflags(write=False)
        return out

    @cached_property
    def pi(self) -> np.ndarray:
        fld = self.field
        if fld.kind == "potential_A" and fld.charge != 0.0:
            out = self.p - fld.charge * np.array([fld.potential(xi) for xi in self.x])
        else:
            out = self.p.copy()
        out.setflags(write=False)
        return out

    @cached_property
    def H(self) -> np.ndarray:
        out = minkowski_dot(self.pi, self.v)
        out.setflags(write=False)
        return out

    @cached_property
    def rho(self) -> np.ndarray:
        """Scalar and pseudoscalar parts (s, p) of psi psi~."""
        q = gp(self.psi, rev(self.psi))
        return q[:, [0, 15]]

    @cached_property
    def spin(self) -> np.ndarray:
        return gp(gp(self.psi, _G21), rev(self.psi)) * 0.5

    @cached_property
    def J(self) -> np.ndarray:
        return angular_momentum(self.x, self.p, self.psi)


def _rk4_step(y, h, fld):
    k1 = _rhs(y, fld)
    k2 = _rhs(y + 0.5 * h * k1, fld)
    k3 = _rhs(y + 0.5 * h * k2, fld)
    k4 = _rhs(y + h * k3, fld)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _euler_step(y, h, fld):
    return y + h * _rhs(y, fld)


def integrate(cfg: SimConfig) -> Trajectory:
    """Fixed-step integration over ``cfg.periods`` zitterbewegung periods."""
    step = _rk4_step if cfg.integrator == "rk4" else _euler_step
    h = cfg.step
    n = cfg.n_steps
    out = np.empty((n + 1, 24))
    y = np.concatenate([cfg.psi0.coeffs, _components(cfg.x0), _components(cfg.p0)])
    out[0] = y
    # overflow is detected explicitly below, so numpy's warnings are noise here
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            y = step(y, h, cfg.field)
            if not np.all(np.isfinite(y)):
                raise IntegrationError(f"non-finite state at sample {i}", index=i)
            out[i] = y
    tau = cfg.tau0 + h * np.arange(n + 1)
    return Trajectory(tau=tau, psi=out[:, :16].copy(), x=out[:, 16:20].copy(),
                      p=out[:, 20:24].copy(), h=h, config=cfg, digest=cfg.digest())


# ------------------------------------------------------ zitterbewegung probes

def _require_free(t: Trajectory):
    if not t.field.is_free:
        raise ValueError("zitterbewegung averages are defined for free motion only")


def zbw_average(t: Trajectory, periods: int = 1, start: int = 0) -> Multivector:
    """Mean of v over an integer number of periods (periodic trapezoid rule)."""
    _require_free(t)
    if int(periods) != periods or periods < 1:
        raise ValueError("average must span a whole number (>= 1) of periods")
    spp = t.config.steps_per_period
    n = int(periods) * spp
    if start + n >= len(t):
        raise ValueError(f"trajectory too short: need {n + 1} samples from {start}, "
                         f"have {len(t) - start}")
    # the trapezoid rule over a closed period equals the plain mean of the
    # first n samples
    return as_vector(t.v[start:start + n].mean(axis=0))


def zbw_frequency(t: Trajectory, amplitude_floor: float = 1e-10) -> float:
    """Angular frequency of the transverse velocity oscillation."""
    _require_free(t)
    p = t.p[0]
    p2 = float(minkowski_dot(p, p))
    u = t.v - (minkowski_dot(t.v, p) / p2)[:, None] * p[None, :]
    spread = u.max(axis=0) - u.min(axis=0)
    k = int(np.argmax(spread))
    if spread[k] < amplitude_floor:
        raise NoOscillationError("no oscillation in the velocity; trivial solution?")
    spp = t.config.steps_per_period
    whole = (len(t) - 1) // spp * spp
    sig = u[:, k] - (u[:whole, k].mean() if whole else u[:, k].mean())
    up = np.nonzero((sig[:-1] < 0.0) & (sig[1:] >= 0.0))[0]
    if len(up) < 2:
        raise NoOscillationError("fewer than two upward crossings; run longer")
    frac = sig[up] / (sig[up] - sig[up + 1])
    crossings = t.tau[up] + frac * t.h
    return 2.0 * math.pi * (len(crossings) - 1) / (crossings[-1] - crossings[0])


# ----------------------------------------------------------- initial data

def normalize_hamiltonian(psi: Multivector, p: Multivector, m: float) -> Multivector:
    """Rescale psi so that p . v = m."""
    H = float(minkowski_dot(_components(p), _components(velocity(psi))))
    if not H > 0:
        raise ValueError(f"p . v = {H!r}; need a future-pointing velocity")
    return psi * math.sqrt(m / H)


def demo_config(m: float = 1.0, alpha: float = 0.5, **kw) -> SimConfig:
    """Helix start: p = m g0 and psi0 a boost exp(alpha g1 g0 / 2) scaled to H = m."""
    p0 = as_vector([m, 0, 0, 0])
    psi0 = normalize_hamiltonian(ga.exp_even(ga.blade(1, 0) * (alpha / 2)), p0, m)
    return SimConfig(mass=m, psi0=psi0, p0=p0, **kw)


def trivial_config(m: float = 1.0, **kw) -> SimConfig:
    return SimConfig(mass=m, psi0=ga.scalar(1.0), p0=as_vector([m, 0, 0, 0]), **kw)
