from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import layered_T
from scatterbound.errors import DomainError
from scatterbound.model import (
    Delta,
    DoubleDelta,
    Free,
    Sech2,
    SquareBarrier,
    Tanh,
    build_dispersion,
)
from scatterbound.solver import (
    MonodromyMatrix,
    SolverConfig,
    beta_lower_bound,
    bogoliubov_from_monodromy,
    monodromy_matrix,
    solve_scattering,
)


def test_free():
    res = solve_scattering(build_dispersion(Free(), 1.3))
    assert res.T == pytest.approx(1.0, abs=1e-14)
    assert abs(res.r) <= 1e-14
    assert res.t == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("E", [0.5, 0.99, 1.0, 1.01, 2.0, 5.0])
def test_square_barrier_against_layers(E):
    res = solve_scattering(build_dispersion(SquareBarrier(1.0, 1.0), E))
    T_ref, R_ref = layered_T([E, E - 1.0, E], [0.0, 1.0])
    assert res.T == pytest.approx(T_ref, rel=1e-8)
    assert res.R == pytest.approx(R_ref, rel=1e-7, abs=1e-12)
    assert abs(res.T + res.R - 1) <= 1e-10
    assert abs(abs(res.alpha) ** 2 - abs(res.beta) ** 2 - 1) <= 1e-9


def test_delta_interface():
    res = solve_scattering(build_dispersion(Delta(2.0), 1.0))
    assert res.T == pytest.approx(0.5, abs=1e-8)


def test_delta_override_argument():
    d = build_dispersion(Free(), 1.0)
    res = solve_scattering(d, deltas=[(0.0, 2.0)])
    assert res.T == pytest.approx(0.5, abs=1e-8)


def test_double_delta_against_layers():
    E = 0.7
    res = solve_scattering(build_dispersion(DoubleDelta(1.0, 1.5), E))
    T_ref, _ = layered_T([E, E, E], [-0.75, 0.75], [1.0, 1.0])
    assert res.T == pytest.approx(T_ref, rel=1e-9)


def test_amplitude_phases_match_layers():
    # t carries a phase as well; compare against the layer oracle's t.
    E = 1.7
    res = solve_scattering(build_dispersion(SquareBarrier(1.0, 1.0), E))
    k = math.sqrt(E)
    q = math.sqrt(E - 1.0)
    # Textbook amplitude for a barrier on [0, L]:
    den = math.cos(q) - 1j * (k * k + q * q) / (2 * k * q) * math.sin(q)
    t_ref = np.exp(-1j * k) / den
    assert res.t == pytest.approx(t_ref, abs=1e-8)


def test_left_normalized_pair():
    res = solve_scattering(build_dispersion(Tanh(0.0, 1.0, 1.0), 2.0))
    a, b = res.left_normalized()
    assert abs(a) ** 2 - abs(b) ** 2 == pytest.approx(1.0, abs=1e-9)
    # |alpha| is the same from either side.
    assert abs(a) == pytest.approx(abs(res.alpha), rel=1e-9)


def test_err_estimate_small():
    res = solve_scattering(build_dispersion(Sech2(0.25, 1.0), 1.0))
    assert 0 < res.err_estimate <= 1e-8
    assert res.errEstimate == res.err_estimate


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        SolverConfig(abs_tol=0.5)
    with pytest.raises(DomainError):
        SolverConfig(window_padding=-1.0)


def test_window_padding_is_harmless():
    d = build_dispersion(SquareBarrier(1.0, 1.0), 2.0)
    a = solve_scattering(d).T
    b = solve_scattering(d, cfg=SolverConfig(window_padding=3.0)).T
    assert a == pytest.approx(b, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(V0=st.floats(-2, 2), L=st.floats(0.1, 3), E=st.floats(0.05, 6))
def test_unitarity_property(V0, L, E):
    res = solve_scattering(build_dispersion(SquareBarrier(V0, L), E))
    assert abs(res.T + res.R - 1) <= 1e-10
    T_ref, _ = layered_T([E, E - V0, E], [0.0, L])
    assert res.T == pytest.approx(T_ref, rel=1e-7)


# -- time domain ----------------------------------------------------------------------


def test_constant_frequency_is_rotation():
    w0, tau = 1.3, 2.1
    M = monodromy_matrix(lambda t: w0 * w0, 0.0, tau, w0)
    ref = np.array([[math.cos(w0 * tau), math.sin(w0 * tau)], [-math.sin(w0 * tau), math.cos(w0 * tau)]])
    assert np.allclose(M.matrix, ref, atol=1e-9)
    assert abs(M.det - 1) <= 1e-12
    a2, b2 = bogoliubov_from_monodromy(M)
    assert a2 == pytest.approx(1.0, abs=1e-9) and b2 == pytest.approx(0.0, abs=1e-9)


def test_bogoliubov_hand_arithmetic():
    assert bogoliubov_from_monodromy(MonodromyMatrix(1, 0, 0, 1)) == (1.0, 0.0)
    assert bogoliubov_from_monodromy(MonodromyMatrix(2, 0, 0, 0.5)) == pytest.approx((1.5625, 0.5625))
    c, s = math.cos(0.4), math.sin(0.4)
    assert bogoliubov_from_monodromy(MonodromyMatrix(c, s, -s, c)) == pytest.approx((1.0, 0.0), abs=1e-15)


def test_beta_lower_bound_examples():
    assert beta_lower_bound(MonodromyMatrix(0, 1, -1, 0)) == 0.0
    assert beta_lower_bound(MonodromyMatrix(2, 0, 0, 0.5)) == pytest.approx(0.5625)
    assert beta_lower_bound(MonodromyMatrix(1, 0, 0, 1)) == 0.0


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-3, 3),
    b=st.floats(-3, 3),
    c=st.floats(-3, 3),
)
def test_beta_lower_bound_is_below_trace_value(a, b, c):
    if abs(a) < 0.1:
        return
    d = (1 + b * c) / a
    M = MonodromyMatrix(a, b, c, d)
    assert beta_lower_bound(M) <= bogoliubov_from_monodromy(M)[1] + 1e-9


def test_square_pulse_against_space_solver():
    w0, w1, t0, t1 = 1.0, 0.6, 0.0, 2.0

    def w2(t):
        return w1 * w1 if t0 <= t <= t1 else w0 * w0

    M = monodromy_matrix(w2, -1.0, 3.0, w0, breakpoints=(t0, t1))
    _, b2 = bogoliubov_from_monodromy(M)
    # Same profile as k^2(x): a barrier of height w0^2 - w1^2 at energy w0^2.
    E = w0 * w0
    res = solve_scattering(build_dispersion(SquareBarrier(E - w1 * w1, t1 - t0), E))
    assert b2 == pytest.approx(abs(res.beta) ** 2, rel=1e-6)
    assert abs(M.det - 1) <= 1e-9
    assert M.det_drift <= 1e-9


def test_monodromy_rejects_bad_interval():
    with pytest.raises(DomainError):
        monodromy_matrix(lambda t: 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        monodromy_matrix(lambda t: 1.0, 0.0, 1.0, 0.0)
