"""Invariant suites behind ``stazbw check``.

Each check measures one deviation and compares it with a tolerance.  The
tolerances are multiplied by ``STA_ZBW_TOL_SCALE`` (a float >= 1, default 1).
Passing ``perturb=eps`` injects a fault of size eps into one side of every
identity, which must make the suite fail once eps exceeds the tolerances.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import algebra as ga
from . import dynamics as dyn
from . import geometry as geo
from . import residuals as res
from .matrix_rep import BLADE_MATRICES
from .oracle import run_oracle

__all__ = [
    "CheckResult", "SUITES", "run_suite", "tol_scale", "helix_corpus", "planewave_family",
    "synthetic_helix", "helix_curvatures", "DEFAULT_SEED",
]

DEFAULT_SEED = 42
TOL_ENV = "STA_ZBW_TOL_SCALE"


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<38s} value={self.value:.3e}  tol={self.tol:.1e}"


def tol_scale() -> float:
    raw = os.environ.get(TOL_ENV, "1")
    try:
        scale = float(raw)
    except ValueError:
        raise ValueError(f"{TOL_ENV} must be a number, got {raw!r}") from None
    if not scale >= 1.0 or not math.isfinite(scale):
        raise ValueError(f"{TOL_ENV} must be a finite number >= 1, got {raw!r}")
    return scale


class _Ctx:
    def __init__(self, seed: int, eps: float):
        self.rng = np.random.default_rng(seed)
        self.eps = float(eps)
        self.scale = tol_scale()
        self.results: List[CheckResult] = []

    def record(self, name: str, value: float, tol: float, *, upper: bool = True):
        tol = tol * self.scale
        value = float(value)
        ok = value <= tol if upper else value >= tol
        self.results.append(CheckResult(name, value, tol, bool(ok and math.isfinite(value))))

    def record_range(self, name: str, value: float, lo: float, hi: float):
        ok = lo / self.scale <= value <= hi * self.scale
        self.results.append(CheckResult(name, float(value), hi * self.scale, bool(ok)))

    def fault(self, n: int = 16) -> np.ndarray:
        """A fixed-size fault vector of Euclidean norm eps."""
        if self.eps == 0.0:
            return np.zeros(n)
        d = np.linspace(1.0, 2.0, n)
        return self.eps * d / np.linalg.norm(d)


def _random_mv(rng, n=None):
    return rng.standard_normal((n, 16) if n else 16)


# --------------------------------------------------------------- corpora

def helix_corpus():
    """Free states: (mass, boost rapidity of the spinor, rapidity of p)."""
    out = []
    for m, alpha, eta in [(1.0, 0.5, 0.0), (2.0, 0.3, 0.4), (0.7, 0.9, -0.8), (2.5, 0.5, 0.0)]:
        p = dyn.as_vector([m * math.cosh(eta), m * math.sinh(eta), 0.0, 0.0])
        gen = ga.blade(1, 0) * (alpha / 2) + ga.blade(2, 0) * 0.1
        psi = dyn.normalize_hamiltonian(ga.exp_even(gen), p, m)
        out.append(dyn.SimConfig(mass=m, psi0=psi, p0=p, steps_per_period=200, periods=1))
    return out


def planewave_family(m: float, n: int, rng):
    """(psi0, p) pairs with psi0 = B_p U: B_p boosts g0 to p/m, U a spatial rotation."""
    out = []
    for _ in range(n):
        u = rng.standard_normal(3) * 0.4
        p = dyn.as_vector([math.sqrt(m * m + float(u @ u)), *u])
        B = ga.invert(res.rest_frame_rotor(p))
        w = rng.standard_normal(3)
        U = ga.exp_even(ga.blade(2, 3) * w[0] + ga.blade(3, 1) * w[1] + ga.blade(1, 2) * w[2])
        out.append((B * U, p))
    return out


def synthetic_helix(alpha: float, r: float, omega: float, tau: float, order: int = 5):
    """Derivatives of x(t) = (alpha t, r cos wt, r sin wt, 0) up to ``order``."""
    out = []
    for n in range(1, order + 1):
        c = omega ** n * r
        ph = omega * tau + n * math.pi / 2
        out.append(np.array([alpha if n == 1 else 0.0, c * math.cos(ph), c * math.sin(ph), 0.0]))
    return out


def helix_curvatures(alpha: float, r: float, omega: float):
    """Closed-form (K1, K2, K3) per unit proper length."""
    sig2 = alpha ** 2 - (r * omega) ** 2
    return r * omega ** 2 / sig2, alpha * omega / sig2, 0.0


# ----------------------------------------------------------------- suites

def _algebra(c: _Ctx):
    f = c.fault()
    eta = np.diag(dyn.ETA)
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            a = ga.basis_vector(mu).coeffs.astype(int) + f
            b = ga.basis_vector(nu).coeffs.astype(int)
            anti = ga.gp(a, b) + ga.gp(b, a)
            target = np.zeros(16)
            target[0] = 2 * eta[mu, nu]
            worst = max(worst, float(np.max(np.abs(anti - target))))
    c.record("anticommutators (exact)", worst, 0.0)

    A, B = _random_mv(c.rng, 1000), _random_mv(c.rng, 1000)
    lhs = np.tensordot(ga.gp(A, B) + f, BLADE_MATRICES, axes=1)
    rhs = np.einsum("nij,njk->nik", np.tensordot(A, BLADE_MATRICES, axes=1),
                    np.tensordot(B, BLADE_MATRICES, axes=1))
    c.record("matrix homomorphism (1000 pairs)", np.max(np.abs(lhs - rhs)), 1e-12)

    A, B, C = _random_mv(c.rng, 200), _random_mv(c.rng, 200), _random_mv(c.rng, 200)
    assoc = ga.gp(ga.gp(A, B), C) - ga.gp(A, ga.gp(B, C))
    c.record("associativity", np.max(np.abs(assoc + f)), 1e-12)
    revd = ga.rev(ga.gp(A, B)) - ga.gp(ga.rev(B), ga.rev(A))
    c.record("reversion anti-automorphism", np.max(np.abs(revd + f)), 1e-12)

    worst = 0.0
    for _ in range(50):
        k = int(c.rng.integers(0, 6))
        masks = [3, 5, 9, 6, 10, 12]
        gen = np.zeros(16)
        gen[masks[k]] = c.rng.uniform(-1.4, 1.4)
        back = ga.log_simple_rotor(ga.Multivector(ga.exp_array(gen))).coeffs + f
        worst = max(worst, float(np.max(np.abs(back - gen))))
    c.record("exp/log round trip", worst, 1e-12)

    worst = 0.0
    for _ in range(50):
        psi = np.where(ga.GRADE % 2 == 0, c.rng.standard_normal(16), 0.0)
        prod = ga.gp(psi, ga.invert_array(psi)) + f
        prod[0] -= 1.0
        worst = max(worst, float(np.max(np.abs(prod))))
    c.record("even inverse", worst, 1e-12)

    worst = 0.0
    for a in _random_mv(c.rng, 50):
        back = ga.parse_multivector(ga.format_multivector(a)).coeffs
        worst = max(worst, float(np.max(np.abs(back - (a + f)))))
    c.record("text round trip (exact)", worst, 0.0)


def _dynamics(c: _Ctx):
    t = dyn.integrate(dyn.demo_config(m=1.0, steps_per_period=1000, periods=10))
    m = t.mass
    c.record("H constant (|H - m|)", np.max(np.abs(t.H + c.eps - m)), 1e-9)
    p2 = dyn.minkowski_dot(t.p, t.p) + c.eps
    c.record("p^2 exact (|p^2 - m^2|)", np.max(np.abs(p2 - m * m)), 0.0)
    c.record("J drift", np.max(np.abs(t.J - t.J[0] + c.fault())), 1e-8)
    vbar = dyn.zbw_average(t).vector_components()
    c.record("<v> = p/m", np.max(np.abs(vbar + c.fault(4) - t.p[0] / m)), 1e-6)
    for mass in (0.5, 1.0, 2.5):
        tm = dyn.integrate(dyn.demo_config(m=mass, steps_per_period=400, periods=10))
        w = dyn.zbw_frequency(tm) * (1.0 + c.eps)
        c.record(f"omega = 2m (m={mass})", abs(w / (2 * mass) - 1.0), 1e-3)
    orc = run_oracle(dyn.demo_config(m=1.0, steps_per_period=1000, periods=10))
    c.record("oracle max error (spp=1000)", orc.error + c.eps, min(orc.bound, 1e-8))
    ratio = orc.error / (orc.error_half + c.eps) if c.eps else orc.ratio
    c.record_range("RK4 ratio in [12, 20]", ratio, 12.0, 20.0)
    worst = 0.0
    f = t.field
    for i in range(0, len(t), 997):
        s = t.state(i)
        d = dyn.eom_derivatives(s, f)
        worst = max(worst, abs(dyn.eval_lagrangian(s, d, f) - dyn.eval_lagrangian_bz(s, d, f)))
    c.record("Lagrangian: Clifford vs matrix form", worst + c.eps, 1e-12)


def _geometry(c: _Ctx):
    dar = om = inv = inv_rot = mass = frn = 0.0
    for cfg in helix_corpus() + [dyn.trivial_config(m=1.3, steps_per_period=200, periods=1)]:
        t = dyn.integrate(cfg)
        m = cfg.mass
        for i in range(0, len(t), 41):
            s = t.state(i)
            kin = geo.rotor_derivative(s, cfg.field)
            tet = geo.rotor_tetrad(s.psi)
            edot = geo.tetrad_derivative(kin) + c.fault(4)[:, None]
            omega20 = geo.darboux_bivector(edot, tet)
            dar = max(dar, float(np.max(geo.darboux_residuals(edot, tet, omega20))))
            om = max(om, ga.norm(omega20.coeffs - kin.omega.coeffs))
            pv, ws = geo.mass_relation(s, cfg.field)
            mass = max(mass, abs(pv - m) / m, abs(ws + c.eps - m) / m)
            fr = geo.frenet_frame_from_curve(geo.curve_derivatives(s, cfg.field, 5))
            K2 = fr.curvatures.invariant()
            scale = max(1.0, abs(K2))
            inv = max(inv, abs(geo.curvature_invariant(fr.darboux()) + c.eps - K2) / scale)
            if not fr.degenerate or min(fr.degenerate) > 2:
                # a rotor frame spinning about a straight line has no Frenet analogue
                rot = geo.curvature_invariant(kin.omega) / fr.speed ** 2
                inv_rot = max(inv_rot, abs(rot + c.eps - K2) / scale)
            frn = max(frn, float(np.max(fr.frenet_residuals())))
    c.record("Darboux residual e_dot - Omega.e", dar, 1e-9)
    c.record("Omega (frame) = 2 R_dot R~", om, 1e-9)
    c.record("curvature invariant (Frenet)", inv, 1e-8)
    c.record("curvature invariant (rotor)", inv_rot, 1e-8)
    c.record("Frenet equations", frn, 1e-9)
    c.record("p.v = Omega.S = m", mass, 1e-9)

    worst = 0.0
    for alpha, r, w in [(1.0, 0.5, 1.0), (2.0, 0.3, 3.0), (1.5, 1.0, 1.2), (5.0, 0.01, 10.0)]:
        for tau in (0.0, 0.7, 2.3):
            fr = geo.frenet_frame_from_curve(synthetic_helix(alpha, r, w, tau))
            got = np.array([fr.curvatures.K1, fr.curvatures.K2, fr.curvatures.K3])
            want = np.array(helix_curvatures(alpha, r, w))
            worst = max(worst, float(np.max(np.abs(got + c.eps - want) / np.maximum(1.0, want))))
    c.record("synthetic helix curvatures", worst, 1e-8)


def _dirac(c: _Ctx):
    m = 1.0
    r_nl = r_free = r_lin = r_dh = 0.0
    fam = planewave_family(m, 8, c.rng)
    xs = c.rng.standard_normal((5, 4))
    for psi0, p in fam:
        psi0 = ga.Multivector(psi0.coeffs + c.fault() * (ga.GRADE % 2 == 0))
        for x in xs:
            r = _planewave_residuals(psi0, p, m, x)
            r_nl, r_free, r_lin, r_dh = (max(a, b) for a, b in zip((r_nl, r_free, r_lin, r_dh), r))
    c.record("plane wave: nonlinear equation", r_nl, 1e-10)
    c.record("plane wave: free nonlinear (rest frame)", r_free, 1e-10)
    c.record("plane wave: linearized", r_lin, 1e-10)
    c.record("plane wave: Dirac-Hestenes", r_dh, 1e-10)

    slopes = perturbation_slopes(fam[0][0], fam[0][1], m, xs[0], c.rng)
    c.record("perturbation slope (min)", min(slopes), 0.9, upper=False)

    t = dyn.integrate(dyn.demo_config(m=m, steps_per_period=200, periods=2))
    nl, _ = res.trajectory_residuals(t)
    c.record("nonlinear residual on trajectory", np.max(nl) + c.eps, 1e-12)
    rep = res.linearization_check(t)
    c.record("identity gap: linearized = p * Dirac-Hestenes", rep.identity_gap + c.eps, 1e-12)


def _planewave_residuals(psi0, p, m, x):
    psi, grad = res.planewave(psi0, m, x, p=p)
    v = dyn.velocity(psi).vector_components()
    psi_dot = ga.Multivector(np.tensordot(v, grad, axes=1))
    s = dyn.ParticleState(0.0, dyn.as_vector(x), psi, p)
    return (
        res.nonlinear_residual(s, psi_dot).norm(),
        res.free_nonlinear_residual(s, psi_dot, m).norm(),
        res.linearized_residual(psi, grad, p, m).norm(),
        res.dh_residual(psi, grad, m).norm(),
    )


def perturbation_slopes(psi0, p, m, x, rng, eps_grid=None):
    """Log-log slope of each residual against the amplitude of an even perturbation."""
    eps_grid = np.logspace(-8, -3, 6) if eps_grid is None else np.asarray(eps_grid)
    delta = np.where(ga.GRADE % 2 == 0, rng.standard_normal(16), 0.0)
    delta /= np.linalg.norm(delta)
    rows = [_planewave_residuals(ga.Multivector(psi0.coeffs + e * delta), p, m, x)
            for e in eps_grid]
    rows = np.array(rows)
    return [float(np.polyfit(np.log(eps_grid), np.log(rows[:, k]), 1)[0])
            for k in range(rows.shape[1])]


SUITES: Dict[str, Callable[[_Ctx], None]] = {
    "algebra": _algebra,
    "dynamics": _dynamics,
    "geometry": _geometry,
    "dirac": _dirac,
}


def run_suite(name: str, seed: int = DEFAULT_SEED, perturb: float = 0.0) -> List[CheckResult]:
    """Run one suite (or ``all``) and return every check result."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    out = []
    for n in names:
        ctx = _Ctx(seed, perturb)
        SUITES[n](ctx)
        out.extend(CheckResult(f"{n}: {r.name}", r.value, r.tol, r.passed)
                   for r in ctx.results)
    return out
