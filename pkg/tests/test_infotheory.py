"""Tests for entropic functionals, divergences, and closed-form terms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertqkd import fockcore as fc
from covertqkd import infotheory as it


def rand_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return fc.DensityOperator(m / np.trace(m).real, (d,))


def diag_density(p):
    p = np.asarray(p, dtype=float)
    return fc.DensityOperator(np.diag(p / p.sum()).astype(complex), (len(p),))


def rand_isometry(rng, din, dout):
    g = rng.normal(size=(dout, din)) + 1j * rng.normal(size=(dout, din))
    q, _ = np.linalg.qr(g)
    return q[:, :din]


class TestEntropy:
    def test_pure_state_zero(self):
        assert it.von_neumann_entropy(fc.vacuum_ket(6).density()) < 1e-12

    def test_maximally_mixed(self):
        d = 8
        rho = fc.DensityOperator(np.eye(d, dtype=complex) / d, (d,))
        assert abs(it.von_neumann_entropy(rho) - 3.0) < 1e-12

    def test_thermal_closed_form(self):
        # (nbar+1) log2(nbar+1) - nbar log2(nbar) = 2 at nbar = 1
        rho = fc.thermal_state(1.0, 80)
        assert abs(it.von_neumann_entropy(rho) - 2.0) < 1e-6


class TestRelativeEntropy:
    def test_self_zero(self):
        rng = np.random.default_rng(0)
        rho = rand_density(rng, 5)
        assert abs(it.relative_entropy(rho, rho).value) < 1e-9

    def test_commuting_matches_classical_kl(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            p = rng.uniform(0.05, 1.0, 6)
            q = rng.uniform(0.05, 1.0, 6)
            p, q = p / p.sum(), q / q.sum()
            # classical KL by direct summation
            kl = float(np.sum(p * np.log2(p / q)))
            d = it.relative_entropy(diag_density(p), diag_density(q))
            assert abs(d.value - kl) < 1e-9

    def test_orthogonal_support_infinite(self):
        rho = fc.vacuum_ket(3).density()
        sigma = fc.DensityOperator(np.diag([0.0, 0.5, 0.5]).astype(complex), (3,))
        assert it.relative_entropy(rho, sigma).is_infinite

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a, b = rand_density(rng, 4), rand_density(rng, 4)
            assert it.relative_entropy(a, b).value >= -1e-9

    def test_data_processing(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            din, denv = 4, 3
            a, b = rand_density(rng, din), rand_density(rng, din)
            v = rand_isometry(rng, din, din * denv)
            out = []
            for m in (a.matrix, b.matrix):
                j = (v @ m @ v.conj().T).reshape(din, denv, din, denv)
                out.append(fc.DensityOperator(np.einsum("aebe->ab", j), (din,)))
            assert (
                it.relative_entropy(out[0], out[1]).value
                <= it.relative_entropy(a, b).value + 1e-8
            )

    def test_pinsker_full_norm(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a, b = rand_density(rng, 5), rand_density(rng, 5)
            td = fc.trace_distance(a, b)
            d_bits = it.relative_entropy(a, b).value
            assert 0.5 * td <= math.sqrt(math.log(2) / 2 * d_bits) + 1e-8

    def test_unitary_invariance(self):
        rng = np.random.default_rng(5)
        a, b = rand_density(rng, 5), rand_density(rng, 5)
        u = rand_isometry(rng, 5, 5)
        au = fc.DensityOperator(u @ a.matrix @ u.conj().T, (5,))
        bu = fc.DensityOperator(u @ b.matrix @ u.conj().T, (5,))
        assert abs(it.relative_entropy(au, bu).value - it.relative_entropy(a, b).value) < 1e-9
        assert abs(it.chi2_divergence(au, bu).value - it.chi2_divergence(a, b).value) < 1e-8
        assert abs(it.von_neumann_entropy(au) - it.von_neumann_entropy(a)) < 1e-9


class TestChi2:
    def test_self_zero(self):
        rng = np.random.default_rng(6)
        rho = rand_density(rng, 5)
        assert abs(it.chi2_divergence(rho, rho).value) < 1e-9

    def test_diagonal_matches_classical(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p = rng.uniform(0.05, 1.0, 5)
            q = rng.uniform(0.05, 1.0, 5)
            p, q = p / p.sum(), q / q.sum()
            expected = float(np.sum(p * p / q)) - 1.0
            got = it.chi2_divergence(diag_density(p), diag_density(q)).value
            assert abs(got - expected) < 1e-9

    def test_support_violation_infinite(self):
        rho = fc.DensityOperator(np.diag([0.5, 0.5, 0.0]).astype(complex), (3,))
        sigma = fc.DensityOperator(np.diag([1.0, 0.0, 0.0]).astype(complex), (3,))
        assert it.chi2_divergence(rho, sigma).is_infinite

    def test_dominates_relative_entropy(self):
        # D_nats <= log(1 + chi2) on random pairs
        rng = np.random.default_rng(8)
        for _ in range(20):
            a, b = rand_density(rng, 4), rand_density(rng, 4)
            d_nats = it.relative_entropy(a, b).value * math.log(2)
            chi2 = it.chi2_divergence(a, b).value
            assert d_nats <= math.log1p(chi2) + 1e-8


class TestDisplacedThermalChi2:
    def test_closed_form_small(self):
        # independently derived: chi2 + 1 = exp(|beta|^2 (1 - s^2) / s)
        beta, nbar = 0.2683281572999748, 0.1
        s = nbar / (1 + nbar)
        expected = math.exp(abs(beta) ** 2 * (1 - s * s) / s) - 1.0
        got = it.displaced_thermal_chi2(beta, nbar, cutoff=60)
        assert abs(got - expected) / expected < 1e-10

    def test_matches_generic_spectral_path(self):
        beta, nbar, d = 0.3, 0.5, 40
        rho = fc.displaced_thermal(beta, nbar, d)
        sigma = fc.thermal_state(nbar, d)
        generic = it.chi2_divergence(rho, sigma).value
        kernel = it.displaced_thermal_chi2(beta, nbar, cutoff=d)
        assert abs(generic - kernel) / kernel < 1e-6

    def test_argument_orders_coincide_at_desk_scale(self):
        beta, nbar, d = 0.3, 0.5, 40
        rho = fc.displaced_thermal(beta, nbar, d)
        sigma = fc.thermal_state(nbar, d)
        fwd = it.chi2_divergence(rho, sigma).value
        rev = it.chi2_divergence(sigma, rho).value
        assert abs(fwd - rev) / fwd < 1e-6

    def test_table_monotone_and_convergent(self):
        rows, converged = it.displaced_thermal_chi2_table(0.59982, 0.0066, start=8, step=8)
        values = [v for _, v, _ in rows]
        assert converged
        assert all(b >= a for a, b in zip(values, values[1:]))
        # the log column matches the value column where both are finite
        for _, v, log1p in rows:
            if math.isfinite(v):
                assert abs(math.log1p(v) - log1p) < 1e-9

    def test_degenerate_cases(self):
        assert it.displaced_thermal_chi2(0.0, 0.5, 30) == 0.0
        assert it.displaced_thermal_chi2(0.3, 0.0, 30) == math.inf


class TestCDistance:
    def test_self(self):
        rng = np.random.default_rng(9)
        rho = rand_density(rng, 4)
        assert it.c_distance(rho, rho) < 1e-6

    def test_orthogonal_pures(self):
        a = fc.vacuum_ket(3).density()
        b = fc.DensityOperator(np.diag([0.0, 1.0, 0.0]).astype(complex), (3,))
        assert abs(it.c_distance(a, b) - 1.0) < 1e-12

    def test_triangle_inequality(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            a, b, c = (rand_density(rng, 4) for _ in range(3))
            assert it.c_distance(a, c) <= it.c_distance(a, b) + it.c_distance(b, c) + 1e-8


class TestScalarFormulas:
    def test_binary_entropy_endpoints(self):
        assert it.binary_entropy(0.0) == 0.0
        assert it.binary_entropy(1.0) == 0.0
        assert abs(it.binary_entropy(0.5) - 1.0) < 1e-15

    def test_binary_entropy_value(self):
        # frozen from an independent 50-digit Decimal evaluation
        assert abs(it.binary_entropy(0.11) - 0.4999159581645280) < 1e-12

    @given(st.floats(min_value=1e-6, max_value=0.5))
    @settings(max_examples=50, deadline=None)
    def test_binary_entropy_symmetry(self, p):
        assert abs(it.binary_entropy(p) - it.binary_entropy(1 - p)) < 1e-12

    def test_finite_size_hand_value(self):
        # (2*1+3) sqrt((log2(2)+1)/1) = 5 sqrt(2)
        assert abs(it.finite_size_term(1.0, 1, 0.5) - 5.0 * math.sqrt(2)) < 1e-9

    def test_finite_size_limit(self):
        assert it.finite_size_term(1.0, 10 ** 12, 0.5) < 1e-4

    def test_finite_size_sqrt_scaling(self):
        a = it.finite_size_term(2.0, 100, 1e-3)
        b = it.finite_size_term(2.0, 200, 1e-3)
        assert abs(a / b - math.sqrt(2)) < 1e-12

    def test_aleph_at_zero(self):
        for y in (0.1, 0.5, 1.0):
            assert it.aleph(0.0, y) == 1.0

    def test_aleph_decreasing_in_x(self):
        xs = np.linspace(0.0, 1.0, 40)
        for y in (0.3, 0.7, 1.0):
            vals = [it.aleph(float(x), y) for x in xs]
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_aleph_y_one_literal(self):
        # with sqrt(1-y) = 0 the formula collapses to 1 - x^2 - 2x*x - x^2
        for x in (0.1, 0.3, 0.7):
            literal = 1 - x ** 2 - 2 * math.sqrt(x ** 2) * x - x ** 2
            assert abs(it.aleph(x, 1.0) - literal) < 1e-15

    def test_aleph_domain(self):
        with pytest.raises(ValueError):
            it.aleph(0.1, 0.0)
