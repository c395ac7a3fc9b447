"""Dirac-matrix representation of Cl(1,3) and the Barut-Zanghi spinor.

gamma_0 = diag(1, 1, -1, -1) and gamma_i = [[0, -sigma_i], [sigma_i, 0]].
With these, ``psi * (1 + gamma_0)/2`` has a single non-trivial column pair,
and the first column is the Barut-Zanghi spinor z.  Right-multiplying psi
by gamma_2 gamma_1 multiplies z by the imaginary unit.
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import EVEN_MASKS, NBLADES, Multivector, _coeffs

__all__ = [
    "SIGMA", "gamma_matrix", "gamma_upper", "mv_to_matrix", "spinor_to_column",
    "column_to_spinor", "columns", "slash", "dirac_bar", "bz_velocity", "bz_analytic_evolution",
    "MassShellError", "EPSILON",
]

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)


class MassShellError(ValueError):
    pass


def _build_gammas():
    g0 = np.block([[_I2, _Z2], [_Z2, -_I2]])
    gs = [np.block([[_Z2, -s], [s, _Z2]]) for s in SIGMA]
    out = (g0, *gs)
    for g in out:
        g.setflags(write=False)
    return out


_GAMMAS = _build_gammas()


def gamma_matrix(mu: int) -> np.ndarray:
    if mu not in range(4):
        raise IndexError(f"gamma index must be 0..3, got {mu}")
    return _GAMMAS[mu]


def gamma_upper(mu: int) -> np.ndarray:
    """gamma^mu = eta^{mu mu} gamma_mu."""
    return gamma_matrix(mu) if mu == 0 else -gamma_matrix(mu)


def _build_blade_matrices():
    mats = np.zeros((NBLADES, 4, 4), dtype=complex)
    for mask in range(NBLADES):
        m = np.eye(4, dtype=complex)
        for i in range(4):
            if mask >> i & 1:
                m = m @ _GAMMAS[i]
        mats[mask] = m
    mats.setflags(write=False)
    return mats


BLADE_MATRICES = _build_blade_matrices()


def mv_to_matrix(a) -> np.ndarray:
    """Linear extension of blade -> product of gamma matrices."""
    return np.tensordot(_coeffs(a), BLADE_MATRICES, axes=1)


EPSILON = Multivector(np.eye(NBLADES)[0] * 0.5 + np.eye(NBLADES)[1] * 0.5)

# (Re z, Im z) as a real-linear function of the 8 even coefficients
_EVEN = np.array(EVEN_MASKS)
_COL_MAP = np.concatenate(
    [BLADE_MATRICES[_EVEN, :, 0].real.T, BLADE_MATRICES[_EVEN, :, 0].imag.T]
)
_COL_INV = np.linalg.inv(_COL_MAP)


def spinor_to_column(psi) -> np.ndarray:
    """First column of the matrix of psi (equivalently of psi * epsilon)."""
    c = _coeffs(psi)
    z = _COL_MAP @ c[_EVEN]
    return z[:4] + 1j * z[4:]


def columns(psis) -> np.ndarray:
    """Batched spinor_to_column for an (n, 16) coefficient array."""
    c = np.asarray(psis, dtype=float)
    z = c[:, _EVEN] @ _COL_MAP.T
    return z[:, :4] + 1j * z[:, 4:]


def column_to_spinor(z) -> Multivector:
    z = np.asarray(z, dtype=complex)
    if z.shape != (4,):
        raise ValueError("a Dirac column has 4 components")
    even = _COL_INV @ np.concatenate([z.real, z.imag])
    c = np.zeros(NBLADES)
    c[_EVEN] = even
    return Multivector(c)


def dirac_bar(z) -> np.ndarray:
    """z-bar = z^dagger gamma^0, as a row vector."""
    z = np.asarray(z, dtype=complex)
    return z.conj() @ _GAMMAS[0]


def bz_velocity(z) -> np.ndarray:
    """Contravariant components v^mu = z-bar gamma^mu z (real)."""
    zb = dirac_bar(z)
    return np.array([(zb @ gamma_upper(mu) @ z).real for mu in range(4)])


def slash(p_components) -> np.ndarray:
    """gamma^mu p_mu = gamma_mu p^mu for contravariant components p^mu."""
    p = np.asarray(p_components, dtype=float)
    return sum(p[mu] * _GAMMAS[mu] for mu in range(4))


def bz_analytic_evolution(z0, p_components, m: float, tau: float) -> np.ndarray:
    """Free solution z(tau) = [cos(m tau) - i gamma^mu p_mu/m sin(m tau)] z(0)."""
    if not m > 0:
        raise MassShellError(f"mass must be positive, got {m}")
    p = np.asarray(p_components, dtype=float)
    p2 = p[0] ** 2 - p[1] ** 2 - p[2] ** 2 - p[3] ** 2
    if abs(p2 - m * m) > 1e-9 * m * m:
        raise MassShellError(f"p^2 = {p2!r} is off the mass shell m^2 = {m * m!r}")
    op = math.cos(m * tau) * np.eye(4) - 1j * slash(p) / m * math.sin(m * tau)
    return op @ np.asarray(z0, dtype=complex)
