import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephnet import (EXPLICIT_BATH, REDUCED, DimensionMismatchError,
                     GraphConstructionError, RateSet, UnsupportedFormError,
                     apply_generator, assemble_generator, clamp_bath, dephase,
                     empty_state, make_pentagon, make_wire,
                     vectorize_generator)
from conftest import random_density_matrix


def test_rate_set_defaults_fix_unit_flux():
    rates = RateSet(gamma_D=0.3)
    assert rates.source_flux == 1.0
    assert rates.delta == 0.3
    with pytest.raises(GraphConstructionError):
        RateSet(gamma_D=-0.1)
    with pytest.raises(GraphConstructionError):
        RateSet(gamma_D=0.0, gamma_bath=0.0)


def test_assemble_generator_validates():
    c = make_wire(2)
    with pytest.raises(UnsupportedFormError):
        assemble_generator(c, 0.0, form="banana")
    with pytest.raises(GraphConstructionError):
        assemble_generator(c, 1.0, rates=RateSet(gamma_D=2.0))
    g = assemble_generator(c, 1.0)
    assert g.dim == 2
    assert assemble_generator(c, 1.0, form=EXPLICIT_BATH).dim == 4


def test_wire1_derivative_is_scalar_filling_law():
    # single site, source = sink: drho/dt = 1 - 2 rho
    g = assemble_generator(make_wire(1), 0.0)
    for value in (0.0, 0.25, 0.5):
        d = apply_generator(g, np.array([[value]], dtype=complex))
        assert d[0, 0] == pytest.approx(1.0 - 2.0 * value, abs=1e-14)
    m, c = vectorize_generator(g)
    assert m[0, 0] == -2.0 and c[0] == 1.0


def test_reduced_trace_derivative_is_injection_minus_ejection():
    c = make_pentagon()
    g = assemble_generator(c, 0.7)
    rng = np.random.default_rng(3)
    rho = random_density_matrix(rng, 5, trace=2.0)
    d = apply_generator(g, rho)
    expected = 1.0 - 2.0 * rho[c.sink, c.sink].real
    assert np.trace(d).real == pytest.approx(expected, abs=1e-12)
    assert abs(np.trace(d).imag) < 1e-12


def test_dim_mismatch_rejected():
    g = assemble_generator(make_wire(3), 0.0)
    with pytest.raises(DimensionMismatchError):
        apply_generator(g, np.zeros((2, 2)))


@given(st.floats(min_value=0.0, max_value=20.0), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=40, deadline=None)
def test_generator_preserves_hermiticity(delta, seed):
    c = make_pentagon()
    g = assemble_generator(c, delta)
    rho = random_density_matrix(np.random.default_rng(seed), 5, trace=1.5)
    d = apply_generator(g, rho)
    assert np.abs(d - d.conj().T).max() < 1e-12


@given(st.floats(min_value=0.0, max_value=20.0), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=40, deadline=None)
def test_vectorized_form_matches_apply(delta, seed):
    c = make_pentagon()
    g = assemble_generator(c, delta)
    rng = np.random.default_rng(seed)
    rho = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m, vec_c = vectorize_generator(g)
    direct = apply_generator(g, rho)
    via_matrix = (m @ rho.flatten(order="F") + vec_c).reshape((5, 5), order="F")
    assert np.abs(direct - via_matrix).max() < 1e-12


def test_vectorize_rejects_explicit_form():
    g = assemble_generator(make_wire(2), 0.0, form=EXPLICIT_BATH)
    with pytest.raises(UnsupportedFormError):
        vectorize_generator(g)


def test_explicit_bath_clamping():
    c = make_wire(3)
    g = assemble_generator(c, 0.5, form=EXPLICIT_BATH)
    rho0 = empty_state(g)
    assert rho0[3, 3] == 0.5  # input bath starts at its pinned value
    assert rho0[4, 4] == 0.0
    rng = np.random.default_rng(11)
    noisy = random_density_matrix(rng, 5, trace=2.0)
    clamped = clamp_bath(g, noisy)
    assert clamped[3, 3] == 0.5 and clamped[4, 4] == 0.0
    assert np.abs(clamped[3:, :3]).max() == 0.0
    # the derivative never moves the bath entries
    d = apply_generator(g, noisy)
    assert np.abs(d[3:, :]).max() == 0.0
    assert np.abs(d[:, 3:]).max() == 0.0


def test_explicit_matches_reduced_on_system_block():
    c = make_wire(3)
    rng = np.random.default_rng(7)
    system = random_density_matrix(rng, 3, trace=1.2)
    for delta in (0.0, 1.3):
        g_r = assemble_generator(c, delta)
        g_x = assemble_generator(c, delta, form=EXPLICIT_BATH)
        full = empty_state(g_x)
        full[:3, :3] = system
        d_r = apply_generator(g_r, system)
        d_x = apply_generator(g_x, full)
        assert np.abs(d_r - d_x[:3, :3]).max() < 1e-12


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=30, deadline=None)
def test_dephase_idempotent_and_trace_preserving(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 4, trace=1.0)
    once = dephase(rho)
    assert np.array_equal(once, dephase(once))
    assert np.trace(once) == pytest.approx(np.trace(rho).real, abs=1e-12)
    off = once - np.diag(np.diag(once))
    assert np.abs(off).max() == 0.0
