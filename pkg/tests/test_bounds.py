import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from langevin_tails import (ConcentrationEnvelope, DomainError, EnvelopeKind,
                            EnvelopeUnavailableError, SuperlinearFit, contraction_coefficient,
                            exact_stationary_1d_quadratic, stationary_mgf_bound_convex,
                            stationary_mgf_bound_sc, subexp_constants, subexp_envelope,
                            subgaussian_envelope, variance_proxy)


def test_contraction_examples():
    assert contraction_coefficient(1, 1, 0.1) == pytest.approx(0.9)
    assert contraction_coefficient(1, 4, 0.4) == pytest.approx(0.6)
    assert contraction_coefficient(0, 3, 0.5) == 1.0
    assert contraction_coefficient(0, 3, 2 / 3) == 1.0


@given(m=st.floats(0.0, 10.0), ratio=st.floats(1.0, 100.0), frac=st.floats(0.01, 1.0))
def test_contraction_simplifies_below_one_over_M(m, ratio, frac):
    M = max(m * ratio, 1e-3)
    eta = frac / M
    assert contraction_coefficient(m, M, eta) == pytest.approx(1 - eta * m, abs=1e-15)


def test_contraction_rejects_transient():
    with pytest.raises(DomainError):
        contraction_coefficient(1, 1, 2.5)
    with pytest.raises(DomainError):
        contraction_coefficient(2, 1, 0.1)


def test_subgaussian_examples():
    assert subgaussian_envelope(2, 0.1, 0.9, math.exp(-1)) == pytest.approx(12.0)
    for d, m in [(1, 1.0), (5, 0.3), (20, 2.0)]:
        eta = 0.5 / m
        c = contraction_coefficient(m, m, eta)
        expected = 4 / math.sqrt(m) * (math.sqrt(2 * d) + math.sqrt(math.log(100)))
        assert subgaussian_envelope(d, eta, c, 0.01) == pytest.approx(expected, rel=1e-14)
    limit = 4 * math.sqrt(0.1 / 0.1) * math.sqrt(6)
    assert subgaussian_envelope(3, 0.1, 0.9, 1 - 1e-15) == pytest.approx(limit, rel=1e-6)


def test_subgaussian_unavailable():
    with pytest.raises(EnvelopeUnavailableError, match="m>0"):
        subgaussian_envelope(2, 0.1, 1.0)
    with pytest.raises(EnvelopeUnavailableError):
        variance_proxy(0.1, 1.0)


def test_envelope_object():
    env = subgaussian_envelope(2, 0.1, 0.9)
    assert env.kind is EnvelopeKind.SUBGAUSSIAN
    assert env.constants["variance_proxy"] == pytest.approx(2.0)
    r = env.radius(np.array([0.3, 0.1, 0.01]))
    assert r.shape == (3,)
    with pytest.raises(DomainError):
        env.radius(0.0)


def test_exact_stationary_examples():
    assert exact_stationary_1d_quadratic(1, 0.1) == pytest.approx(0.2 / 0.19)
    assert exact_stationary_1d_quadratic(1, 0.1) == pytest.approx(1.0526316, abs=1e-7)
    assert exact_stationary_1d_quadratic(1, 1e-9) == pytest.approx(1.0, rel=1e-8)
    assert exact_stationary_1d_quadratic(1, 1.0) == 2.0
    with pytest.raises(DomainError):
        exact_stationary_1d_quadratic(1, 2.0)


def test_subexp_example_constants():
    # independent re-evaluation of each closed form
    beta, alpha, eta, r0 = 1.0, 0.5, 0.5, math.log(3) / 2
    lam = beta / 16
    C = 2 / lam
    r1 = 2 * alpha / beta
    R = max(r0 / lam + eta * beta / 4, r1)
    q = eta * beta**2 / 256
    A = math.exp(q) / (1 - math.exp(-q))
    radius, env = subexp_envelope(1, eta, SuperlinearFit(alpha, beta), r0, 0.01)
    k = env.constants
    assert env.kind is EnvelopeKind.SUBEXPONENTIAL
    assert (k["lambda"], k["C"], k["r1"]) == (1 / 16, 32.0, 1.0)
    assert k["R"] == pytest.approx(R, rel=1e-15)
    assert k["R"] == pytest.approx(8.914, abs=1e-3)
    assert k["A"] == pytest.approx(A, rel=1e-9)
    assert k["A"] == pytest.approx(513.5, abs=0.05)
    assert radius == pytest.approx(R + C * math.log(A / 0.01), rel=1e-12)
    assert radius == pytest.approx(355.9, abs=0.15)


def test_subexp_radius_at_formal_delta_A():
    env = subexp_constants(1, 0.5, SuperlinearFit(0.5, 1.0), 0.55)
    k = env.constants
    # radius(A) lies outside (0, 1); evaluate the formula directly
    assert k["R"] + k["C"] * math.log(k["A"] / k["A"]) == k["R"]


def test_subexp_beta_scaling():
    a = subexp_constants(1, 0.1, SuperlinearFit(0.3, 0.5), 0.55).constants
    b = subexp_constants(1, 0.1, SuperlinearFit(0.3, 1.0), 0.55).constants
    assert b["C"] == pytest.approx(a["C"] / 2)
    assert b["r1"] == pytest.approx(a["r1"] / 2)


def test_subexp_unavailable():
    class Flat:
        alpha, beta = 0.0, 0.0

    with pytest.raises(EnvelopeUnavailableError):
        subexp_constants(1, 0.1, Flat(), 0.5)


def test_mgf_bound_sc():
    assert stationary_mgf_bound_sc(0.1, 0.9, 0.0) == 0.0
    assert stationary_mgf_bound_sc(0.1, 0.9, 1.0) == pytest.approx(1.0)
    assert stationary_mgf_bound_sc(0.1, 0.9, 2.0) == pytest.approx(
        4 * stationary_mgf_bound_sc(0.1, 0.9, 1.0))
    with pytest.raises(EnvelopeUnavailableError):
        stationary_mgf_bound_sc(0.1, 1.0, 1.0)


def test_mgf_bound_convex():
    env = ConcentrationEnvelope(EnvelopeKind.SUBEXPONENTIAL, {
        "lambda": 1 / 16, "A": 513.5, "C": 32.0, "R": 16.0, "r0": 0.55, "dim": 1})
    expected = math.log(513.5) + math.log(math.cosh(1.0))
    assert stationary_mgf_bound_convex(env) == pytest.approx(expected, rel=1e-14)
    assert stationary_mgf_bound_convex(env) == pytest.approx(6.675, abs=1e-3)
    limit = ConcentrationEnvelope(EnvelopeKind.SUBEXPONENTIAL, {
        "lambda": 1.0, "A": 1 + 1e-12, "C": 1.0, "R": 1e-12, "r0": 0.0, "dim": 3})
    assert stationary_mgf_bound_convex(limit) == pytest.approx(0.0, abs=1e-11)


def test_mgf_bound_convex_warns_below_r0():
    env = ConcentrationEnvelope(EnvelopeKind.SUBEXPONENTIAL, {
        "lambda": 0.01, "A": 2.0, "C": 1.0, "R": 1.0, "r0": 0.55, "dim": 1})
    with pytest.warns(RuntimeWarning, match="r0"):
        stationary_mgf_bound_convex(env)
    ok = subexp_constants(1, 1.0, SuperlinearFit(0.375, 0.5), 0.55)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        stationary_mgf_bound_convex(ok)


@given(d=st.integers(1, 100), eta=st.floats(0.01, 1.0), c=st.floats(0.0, 0.99),
       d1=st.floats(1e-6, 0.98), gap=st.floats(1e-3, 0.5))
def test_subgaussian_strictly_decreasing(d, eta, c, d1, gap):
    d2 = min(d1 + gap, 0.999)
    env = subgaussian_envelope(d, eta, c)
    assert env.radius(d1) > env.radius(d2)


@given(alpha=st.floats(0.0, 10.0), beta=st.floats(0.01, 10.0), eta=st.floats(0.01, 1.0),
       d1=st.floats(1e-6, 0.98), gap=st.floats(1e-3, 0.5))
def test_subexp_strictly_decreasing(alpha, beta, eta, d1, gap):
    d2 = min(d1 + gap, 0.999)
    env = subexp_constants(2, eta, SuperlinearFit(alpha, beta), 1.16)
    assert env.radius(d1) > env.radius(d2)


def test_constants_are_pure():
    fit = SuperlinearFit(0.3, 0.4)
    assert subexp_constants(3, 0.2, fit, 2.0) == subexp_constants(3, 0.2, fit, 2.0)
    assert subgaussian_envelope(3, 0.2, 0.8) == subgaussian_envelope(3, 0.2, 0.8)


@given(rho=st.floats(0.01, 100.0), frac=st.floats(0.001, 1.0))
def test_tightness_bracket(rho, frac):
    eta = frac / rho
    c = contraction_coefficient(rho, rho, eta)
    exact = exact_stationary_1d_quadratic(rho, eta)
    proxy = variance_proxy(eta, c)
    assert exact <= proxy * (1 + 1e-12)
    assert proxy <= 2 * exact * (1 + 1e-12)
