"""Integrator against the closed-form free solution in the matrix representation."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SimConfig, _components, integrate
from .matrix_rep import bz_analytic_evolution, columns, slash, spinor_to_column

__all__ = ["OracleResult", "oracle_error", "oracle_bound", "run_oracle", "RATIO_RANGE"]

RATIO_RANGE = (12.0, 20.0)


@dataclass(frozen=True)
class OracleResult:
    error: float          # max |z_int - z_exact| at the configured step
    error_half: float     # same with the step halved
    bound: float
    integrator: str

    @property
    def ratio(self) -> float:
        if self.error_half == 0.0:
            return math.inf if self.error > 0.0 else float("nan")
        return self.error / self.error_half

    @property
    def ratio_ok(self) -> bool:
        return RATIO_RANGE[0] <= self.ratio <= RATIO_RANGE[1]

    @property
    def passed(self) -> bool:
        return self.ratio_ok and self.error <= self.bound


def oracle_error(cfg: SimConfig) -> float:
    """Largest deviation of the integrated Dirac column from the exact one."""
    if not cfg.field.is_free:
        raise ValueError("the closed-form oracle exists for free motion only")
    t = integrate(cfg)
    z0 = spinor_to_column(cfg.psi0)
    p = _components(cfg.p0)
    m = cfg.mass
    phase = m * (t.tau - cfg.tau0)
    # closed form z(tau) = cos(m tau) z0 - i sin(m tau) (slash p / m) z0, batched
    exact = (np.cos(phase)[:, None] * z0[None, :]
             - 1j * np.sin(phase)[:, None] * (slash(p) / m @ z0)[None, :])
    # spot-check the batched form against the reference routine
    for k in (0, len(t) - 1):
        ref = bz_analytic_evolution(z0, p, m, float(t.tau[k] - cfg.tau0))
        if not np.allclose(ref, exact[k], rtol=0.0, atol=1e-14):
            raise ArithmeticError("batched closed form disagrees with the reference")
    z = columns(t.psi)
    return float(np.max(np.linalg.norm(z - exact, axis=1)))


def oracle_bound(cfg: SimConfig) -> float:
    """Ten times the leading RK4 phase error (m h)^4 m tau / 120, plus round-off."""
    mh = cfg.mass * cfg.step
    mtau = cfg.mass * cfg.step * cfg.n_steps
    amp = max(1.0, float(np.linalg.norm(spinor_to_column(cfg.psi0))))
    return 10.0 * amp * mh ** 4 * mtau / 120.0 + 1e-12


def run_oracle(cfg: SimConfig, integrator: str | None = None) -> OracleResult:
    """Error at the configured step and at half of it."""
    if integrator is not None:
        cfg = dataclasses.replace(cfg, integrator=integrator)
    half = dataclasses.replace(cfg, steps_per_period=2 * cfg.steps_per_period)
    return OracleResult(oracle_error(cfg), oracle_error(half), oracle_bound(cfg),
                        cfg.integrator)
