import os

import numpy as np
import pytest

import stazbw.algebra as ga
from stazbw.config import ConfigError, load_config, parse_config
from stazbw.dynamics import ParticleState, hamiltonian

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")

BASE = """
mass = 1.0
p0 = 1.0*g0
psi0 = 1
"""


def test_minimal_defaults():
    spec = parse_config(BASE)
    sim = spec.sim
    assert sim.mass == 1.0 and sim.steps_per_period == 1000 and sim.periods == 10.0
    assert sim.field.kind == "free" and sim.field.charge == 0.0
    assert sim.integrator == "rk4"
    assert spec.outputs == ("trajectory", "report")
    assert sim.psi0.allclose(1)


def test_comments_and_blank_lines():
    spec = parse_config(BASE + "\n# a comment\nperiods = 2  # trailing\n\n")
    assert spec.sim.periods == 2.0


@pytest.mark.parametrize("text, match", [
    (BASE + "colour = red\n", "unknown key"),
    (BASE + "mass = 2\n", "duplicate"),
    (BASE + "periods\n", "expected"),
    ("p0 = 1*g0\npsi0 = 1\n", "mass"),
    ("mass = 1\npsi0 = 1\n", "p0"),
    ("mass = 1\np0 = 1*g0\n", "psi0"),
    (BASE + "periods = many\n", "periods"),
    (BASE + "steps_per_period = 10.5\n", "steps_per_period"),
    (BASE.replace("psi0 = 1", "psi0 = 1 + g7"), "psi0"),
    (BASE + "psi0.exp = 0.1*g12\n", "either"),
    (BASE + "psi0.normalize = unit\n", "normalize"),
    (BASE + "outputs = trajectory, plots\n", "outputs"),
    (BASE + "field.kind = gravity\n", "field"),
    (BASE + "field.kind = constant_F\n", "field"),
    (BASE + "field.kind = potential_A\n", "field.F"),
    (BASE + "field.kind = potential_A\nfield.F = g12\nfield.A = coulomb\n", "uniform"),
    (BASE.replace("1.0*g0", "2.0*g0"), None),
    (BASE + "integrator = leapfrog\n", None),
])
def test_rejects(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_config_error_is_value_error():
    assert issubclass(ConfigError, ValueError)


def test_psi0_exp_and_normalize():
    text = "mass = 2\np0 = 2*g0\npsi0.exp = 0.25*g10\npsi0.normalize = hamiltonian\n"
    sim = parse_config(text).sim
    assert hamiltonian(ParticleState(0.0, sim.x0, sim.psi0, sim.p0)) == pytest.approx(2.0, abs=1e-14)
    raw = parse_config(text.replace("hamiltonian", "none")).sim
    assert raw.psi0.allclose(ga.exp_even(0.25 * ga.blade(1, 0)))


def test_uniform_potential_field():
    sim = parse_config(BASE + "charge = 1\nfield.kind = potential_A\nfield.F = 0.2*g12\n").sim
    A = sim.field.A
    x = ga.vector([0.0, 0.3, -0.5, 0.0])
    want = ga.dot(x, 0.2 * ga.blade(1, 2)).vector_components() * 0.5
    assert np.allclose(A(x.vector_components()), want, atol=1e-15)
    assert sim.field.describe()["A"] == "uniform"


def test_outputs_subset():
    assert parse_config(BASE + "outputs = report\n").outputs == ("report",)


def test_shipped_configs_parse():
    names = sorted(f for f in os.listdir(CONFIG_DIR) if f.endswith(".cfg"))
    assert names
    for name in names:
        spec = load_config(os.path.join(CONFIG_DIR, name))
        assert np.isfinite(spec.sim.psi0.coeffs).all()


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.cfg")
