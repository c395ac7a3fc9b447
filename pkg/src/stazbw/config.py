"""Flat ``key = value`` run configuration.

Example::

    mass = 1.0
    charge = 0.0
    p0 = 1.0*g0
    psi0.exp = 0.25*g10        # psi0 = exp(bivector); or give psi0 directly
    psi0.normalize = hamiltonian
    field.kind = free
    steps_per_period = 1000
    periods = 10
    outputs = trajectory, report

``#`` starts a comment.  Multivector values use the text form of
:func:`stazbw.algebra.parse_multivector`.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import algebra as ga
from .dynamics import FieldSpec, SimConfig, normalize_hamiltonian, uniform_potential

__all__ = ["ConfigError", "RunSpec", "parse_config", "load_config", "KNOWN_KEYS"]

KNOWN_KEYS = {
    "mass", "charge", "p0", "x0", "psi0", "psi0.exp", "psi0.normalize", "field.kind",
    "field.F", "field.A", "steps_per_period", "periods", "integrator", "tau0", "outputs",
}
OUTPUTS = ("trajectory", "report")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    sim: SimConfig
    outputs: tuple
    text: str
    values: dict


def _split(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _mv(values, key, default=None):
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return ga.parse_multivector(values[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _num(values, key, kind=float, default=None):
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return kind(values[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot read {values[key]!r} as {kind.__name__}") from None


def parse_config(text: str) -> RunSpec:
    values = _split(text)
    mass = _num(values, "mass")
    charge = _num(values, "charge", default=0.0)
    p0 = _mv(values, "p0")
    x0 = _mv(values, "x0", default=ga.Multivector())

    if "psi0" in values and "psi0.exp" in values:
        raise ConfigError("give either psi0 or psi0.exp, not both")
    if "psi0.exp" in values:
        gen = _mv(values, "psi0.exp")
        try:
            psi0 = ga.exp_even(gen)
        except ArithmeticError as exc:
            raise ConfigError(f"psi0.exp: {exc}") from None
    else:
        psi0 = _mv(values, "psi0")

    kind = values.get("field.kind", "free")
    F = _mv(values, "field.F", default=ga.Multivector()) if "field.F" in values else None
    A = None
    if kind == "potential_A":
        if values.get("field.A", "uniform") != "uniform":
            raise ConfigError("field.A: only 'uniform' (A = x.F/2) is available from a file")
        if F is None:
            raise ConfigError("potential_A with field.A = uniform needs field.F")
        A = uniform_potential(F)
        A.__name__ = "uniform"
    try:
        field = FieldSpec(kind=kind, F=F, A=A, charge=charge)
    except ValueError as exc:
        raise ConfigError(f"field: {exc}") from None

    normalize = values.get("psi0.normalize", "none")
    if normalize == "hamiltonian":
        try:
            psi0 = normalize_hamiltonian(psi0, p0, mass)
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"psi0.normalize: {exc}") from None
    elif normalize != "none":
        raise ConfigError(f"psi0.normalize must be 'hamiltonian' or 'none', got {normalize!r}")

    outputs = tuple(o.strip() for o in values.get("outputs", ",".join(OUTPUTS)).split(",")
                    if o.strip())
    bad = [o for o in outputs if o not in OUTPUTS]
    if bad:
        raise ConfigError(f"outputs: unknown {bad}")

    try:
        sim = SimConfig(
            mass=mass, psi0=psi0, p0=p0, x0=x0, field=field,
            steps_per_period=_num(values, "steps_per_period", int, default=1000),
            periods=_num(values, "periods", float, default=10.0),
            integrator=values.get("integrator", "rk4"),
            tau0=_num(values, "tau0", float, default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunSpec(sim=sim, outputs=outputs, text=text, values=values)


def load_config(path) -> RunSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
