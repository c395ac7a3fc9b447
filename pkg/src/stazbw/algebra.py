"""Dense arithmetic for the spacetime algebra Cl(1,3), metric (+,-,-,-).

A multivector is 16 real coefficients indexed by a blade bitmask: bit ``i``
set means the basis vector gamma_i is a factor, factors taken in increasing
index order (mask ``0b0110`` is gamma_1 gamma_2).

Two layers live here.  The array kernels (``gp``, ``rev``, ``grade``, ...)
work on ``(..., 16)`` float arrays and broadcast over leading axes, which is
what the integrator and trajectory post-processing use.  ``Multivector`` is a
small immutable wrapper with operator overloads for interactive and test use.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "METRIC", "NBLADES", "GRADE", "EVEN_MASKS", "Multivector", "DegenerateSpinorError",
    "SeriesDivergenceError", "gp", "rev", "grade", "wedge_arrays", "dot_arrays",
    "geometric_product", "reverse", "grade_project", "wedge", "dot", "exp_even",
    "sandwich", "invert", "scalar", "vector", "basis_vector", "blade", "pseudoscalar",
    "format_multivector", "parse_multivector", "norm", "log_simple_rotor", "exp_array",
    "invert_array",
]

METRIC = (1.0, -1.0, -1.0, -1.0)
NBLADES = 16
GRADE = np.array([bin(b).count("1") for b in range(NBLADES)])
EVEN_MASKS = tuple(b for b in range(NBLADES) if GRADE[b] % 2 == 0)
_REVERSE_SIGN = np.array([(-1.0) ** (g * (g - 1) // 2) for g in GRADE])


class DegenerateSpinorError(ValueError):
    """Spinor with psi * reverse(psi) numerically zero (light-like)."""


class SeriesDivergenceError(ArithmeticError):
    pass


def _blade_sign(a: int, b: int) -> float:
    # transpositions needed to sort the concatenated factor lists
    swaps = 0
    t = a >> 1
    while t:
        swaps += bin(t & b).count("1")
        t >>= 1
    sign = -1.0 if swaps % 2 else 1.0
    common = a & b
    for i in range(4):
        if common >> i & 1:
            sign *= METRIC[i]
    return sign


def _build_tables():
    sign = np.zeros((NBLADES, NBLADES))
    cayley = np.zeros((NBLADES, NBLADES, NBLADES))
    for a in range(NBLADES):
        for b in range(NBLADES):
            s = _blade_sign(a, b)
            sign[a, b] = s
            cayley[a, b, a ^ b] = s
    return sign, cayley


BLADE_SIGN, CAYLEY = _build_tables()
BLADE_SIGN.setflags(write=False)
CAYLEY.setflags(write=False)

# grade-selection tensors for the inner/outer products of homogeneous pieces
_WEDGE_T = np.zeros_like(CAYLEY)
_DOT_T = np.zeros_like(CAYLEY)
for _a in range(NBLADES):
    for _b in range(NBLADES):
        _k = _a ^ _b
        if GRADE[_k] == GRADE[_a] + GRADE[_b]:
            _WEDGE_T[_a, _b, _k] = BLADE_SIGN[_a, _b]
        if GRADE[_k] == abs(GRADE[_a] - GRADE[_b]):
            _DOT_T[_a, _b, _k] = BLADE_SIGN[_a, _b]
_WEDGE_T.setflags(write=False)
_DOT_T.setflags(write=False)


# ---------------------------------------------------------------- array kernels

def _bilinear(tensor, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1 and b.ndim == 1:
        return (a @ tensor.reshape(NBLADES, -1)).reshape(NBLADES, NBLADES).T @ b
    left = np.tensordot(a, tensor, axes=([-1], [0]))  # (..., j, k)
    return np.einsum("...jk,...j->...k", left, b)


def gp(a, b):
    """Geometric product of coefficient arrays (broadcasts over leading axes)."""
    return _bilinear(CAYLEY, a, b)


def wedge_arrays(a, b):
    return _bilinear(_WEDGE_T, a, b)


def dot_arrays(a, b):
    # The grade-|r-s| part for homogeneous inputs; includes scalar*X terms,
    # which matches <A_r B_s>_{|r-s|} literally.
    return _bilinear(_DOT_T, a, b)


def rev(a):
    return np.asarray(a, dtype=float) * _REVERSE_SIGN


def grade(a, r: int):
    if not 0 <= r <= 4:
        raise ValueError(f"grade must be in 0..4, got {r}")
    return np.where(GRADE == r, np.asarray(a, dtype=float), 0.0)


def norm(a) -> float:
    """Euclidean norm of the coefficient array (not a metric norm)."""
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


# ---------------------------------------------------------------- value type

def _coeffs(x) -> np.ndarray:
    if isinstance(x, Multivector):
        return x.coeffs
    if isinstance(x, np.ndarray) and x.shape == (NBLADES,):
        return x.astype(float)
    out = np.zeros(NBLADES)
    out[0] = float(x)
    return out


class Multivector:
    """Immutable element of Cl(1,3).

    ``*`` is the geometric product, ``^`` the outer product, ``|`` the
    grade-|r-s| inner product and ``~a`` the reverse.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[float] = ()):
        c = np.zeros(NBLADES)
        given = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                           dtype=float)
        if given.size:
            if given.shape != (NBLADES,):
                raise ValueError(f"expected 16 coefficients, got shape {given.shape}")
            c[:] = given
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __getitem__(self, mask: int) -> float:
        return float(self._c[mask])

    def __add__(self, other):
        return Multivector(self._c + _coeffs(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Multivector(self._c - _coeffs(other))

    def __rsub__(self, other):
        return Multivector(_coeffs(other) - self._c)

    def __neg__(self):
        return Multivector(-self._c)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return Multivector(gp(self._c, other._c))
        return Multivector(self._c * float(other))

    def __rmul__(self, other):
        return Multivector(self._c * float(other))

    def __truediv__(self, other):
        return Multivector(self._c / float(other))

    def __xor__(self, other):
        return Multivector(wedge_arrays(self._c, _coeffs(other)))

    def __or__(self, other):
        return Multivector(dot_arrays(self._c, _coeffs(other)))

    def __invert__(self):
        return Multivector(rev(self._c))

    def __eq__(self, other):
        if not isinstance(other, (Multivector, int, float)):
            return NotImplemented
        return bool(np.array_equal(self._c, _coeffs(other)))

    def __hash__(self):
        return hash(self._c.tobytes())

    def grade(self, r: int) -> "Multivector":
        return Multivector(grade(self._c, r))

    def scalar_part(self) -> float:
        return float(self._c[0])

    def vector_components(self) -> np.ndarray:
        """Contravariant components a^mu of the grade-1 part a^mu gamma_mu."""
        return self._c[[1, 2, 4, 8]].copy()

    def norm(self) -> float:
        return norm(self._c)

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, _coeffs(other), rtol=0.0, atol=atol))

    def is_even(self, atol: float = 0.0) -> bool:
        odd = self._c[GRADE % 2 == 1]
        return bool(np.all(np.abs(odd) <= atol))

    def __repr__(self):
        return f"Multivector('{format_multivector(self)}')"

    def __str__(self):
        return format_multivector(self)


def scalar(s: float) -> Multivector:
    return Multivector(_coeffs(s))


def basis_vector(mu: int) -> Multivector:
    if mu not in range(4):
        raise ValueError(f"vector index must be 0..3, got {mu}")
    c = np.zeros(NBLADES)
    c[1 << mu] = 1.0
    return Multivector(c)


def vector(components: Sequence[float]) -> Multivector:
    """The vector a^mu gamma_mu from contravariant components."""
    comps = np.asarray(components, dtype=float)
    if comps.shape != (4,):
        raise ValueError("a 4-vector needs exactly 4 components")
    c = np.zeros(NBLADES)
    c[[1, 2, 4, 8]] = comps
    return Multivector(c)


def blade(*indices: int) -> Multivector:
    """Product gamma_i gamma_j ... of basis vectors in the order given."""
    out = scalar(1.0)
    for i in indices:
        out = out * basis_vector(i)
    return out


def pseudoscalar() -> Multivector:
    return blade(0, 1, 2, 3)


# ------------------------------------------------------------- named operations

def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    return Multivector(gp(_coeffs(a), _coeffs(b)))


def reverse(a: Multivector) -> Multivector:
    return Multivector(rev(_coeffs(a)))


def grade_project(a: Multivector, r: int) -> Multivector:
    return Multivector(grade(_coeffs(a), r))


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return Multivector(wedge_arrays(_coeffs(a), _coeffs(b)))


def dot(a: Multivector, b: Multivector) -> Multivector:
    return Multivector(dot_arrays(_coeffs(a), _coeffs(b)))


def sandwich(r: Multivector, a: Multivector) -> Multivector:
    """R a reverse(R)."""
    rc = _coeffs(r)
    return Multivector(gp(gp(rc, _coeffs(a)), rev(rc)))


def _simple_bivector_exp(c: np.ndarray, tol: float = 1e-13):
    sq = gp(c, c)
    scale = max(1.0, float(np.dot(c, c)))
    if np.max(np.abs(sq[1:])) > tol * scale:
        return None
    s = sq[0]
    one = np.zeros(NBLADES)
    one[0] = 1.0
    if s < -tol * scale:
        th = math.sqrt(-s)
        return one * math.cos(th) + c * (math.sin(th) / th)
    if s > tol * scale:
        al = math.sqrt(s)
        return one * math.cosh(al) + c * (math.sinh(al) / al)
    return one + c


def exp_array(c, *, method: str = "auto", term_tol: float = 1e-15, max_terms: int = 60):
    """Exponential of an even coefficient array.

    ``method="auto"`` takes the closed form for bivectors squaring to a
    scalar and falls back to scaled-and-squared Taylor series otherwise.
    """
    c = np.asarray(c, dtype=float)
    if method not in ("auto", "series"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and np.all(GRADE[np.nonzero(c)[0]] == 2):
        closed = _simple_bivector_exp(c)
        if closed is not None:
            return closed
    mag = norm(c)
    if not math.isfinite(mag) or mag > 700.0:
        raise SeriesDivergenceError(f"exponent magnitude {mag!r} too large for series")
    squarings = max(0, int(math.ceil(math.log2(mag / 0.25)))) if mag > 0.25 else 0
    x = c / 2.0 ** squarings
    term = np.zeros(NBLADES)
    term[0] = 1.0
    total = term.copy()
    for k in range(1, max_terms + 1):
        term = gp(term, x) / k
        total = total + term
        if norm(term) <= term_tol * norm(total):
            break
    else:
        raise SeriesDivergenceError(f"series did not converge in {max_terms} terms")
    for _ in range(squarings):
        total = gp(total, total)
    return total


def exp_even(b: Multivector, *, method: str = "auto") -> Multivector:
    return Multivector(exp_array(_coeffs(b), method=method))


def log_simple_rotor(r: Multivector, tol: float = 1e-10) -> Multivector:
    """Bivector B with exp(B) = r, for r = scalar + simple bivector.

    Rotations return the principal angle in (-pi, pi]; boosts need a
    positive scalar part.
    """
    c = _coeffs(r)
    a = c[0]
    biv = grade(c, 2)
    rest = float(np.max(np.abs(c - biv - np.eye(NBLADES)[0] * a)))
    if rest > tol:
        raise ValueError(f"not a scalar + bivector element (residue {rest:.3g})")
    sq = gp(biv, biv)
    if abs(sq[15]) > tol * max(1.0, float(np.dot(biv, biv))):
        raise ValueError("bivector part is not simple")
    s = sq[0]
    if s < 0:
        mag = math.sqrt(-s)
        theta = math.atan2(mag, a)
        return Multivector(biv * (theta / mag))
    if s > 0:
        if a <= 0:
            raise ValueError("boost rotor must have a positive scalar part")
        mag = math.sqrt(s)
        return Multivector(biv * (math.asinh(mag) / mag))
    return Multivector(biv / a)


def invert_array(psi, rel_tol: float = 1e-12):
    """Inverse of an even element via psi~ (s - p g5) / (s^2 + p^2)."""
    psi = np.asarray(psi, dtype=float)
    q = gp(psi, rev(psi))
    s, p = q[0], q[15]
    det = s * s + p * p
    mag2 = float(np.dot(psi, psi))
    if mag2 == 0.0 or math.sqrt(det) <= rel_tol * mag2:
        raise DegenerateSpinorError("psi * reverse(psi) vanishes; spinor is not invertible")
    conj = np.zeros(NBLADES)
    conj[0], conj[15] = s / det, -p / det
    return gp(rev(psi), conj)


def invert(psi: Multivector) -> Multivector:
    return Multivector(invert_array(_coeffs(psi)))


# ------------------------------------------------------------------- text form

def _blade_name(mask: int) -> str:
    if mask == 0:
        return "s"
    return "g" + "".join(str(i) for i in range(4) if mask >> i & 1)


def format_multivector(a) -> str:
    """Text form such as ``1.0*s - 0.5*g12``; ``repr`` floats round-trip exactly."""
    c = _coeffs(a)
    parts = []
    for mask in sorted(range(NBLADES), key=lambda m: (GRADE[m], m)):
        v = float(c[mask])
        if v == 0.0:
            continue
        name = _blade_name(mask)
        if not parts:
            parts.append(f"{v!r}*{name}")
        elif v < 0 or (v == 0 and math.copysign(1, v) < 0):
            parts.append(f"- {-v!r}*{name}")
        else:
            parts.append(f"+ {v!r}*{name}")
    return " ".join(parts) if parts else "0"


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan)\s*(?:\*\s*)?)?
        (?P<blade>s|g\d*)?\s*""",
    re.VERBOSE,
)


def parse_multivector(text: str) -> Multivector:
    """Inverse of :func:`format_multivector`.

    Blades may name indices in any order (``g21`` is -``g12``); a bare
    number is a scalar and a bare blade has unit coefficient.
    """
    src = text.strip()
    if not src:
        raise ValueError("empty multivector text")
    out = np.zeros(NBLADES)
    pos = 0
    first = True
    while pos < len(src):
        m = _TERM.match(src, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse multivector text at {src[pos:]!r}")
        sign, coef, name = m.group("sign"), m.group("coef"), m.group("blade")
        if coef is None and name is None:
            raise ValueError(f"dangling sign in multivector text {src!r}")
        if sign is None and not first:
            raise ValueError(f"missing operator between terms in {src!r}")
        value = float(coef) if coef is not None else 1.0
        if sign == "-":
            value = -value
        if name is None or name == "s":
            out[0] += value
        else:
            digits = [int(ch) for ch in name[1:]]
            if any(d > 3 for d in digits):
                raise ValueError(f"blade index out of range in {name!r}")
            if len(set(digits)) != len(digits):
                raise ValueError(f"repeated index in blade {name!r}")
            term = blade(*digits).coeffs * value
            out += term
        pos = m.end()
        first = False
    return Multivector(out)
