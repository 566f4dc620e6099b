"""
Unit tests for the complex special functions and NH distributions.
"""

import mpmath
import numpy as np
import pytest

from src.numerics.special_functions import (
    EULER_GAMMA,
    digamma,
    f_eff_beta,
    f_eff_zero,
    fermi_dirac,
    log_gamma,
    log_lower,
    log_upper,
)
from src.utils.errors import DomainError, PassivityError, PoleError

mpmath.mp.dps = 30


def _grid():
    real_parts = [0.05, 0.5, 1.3, 3.7, 11.0, 25.0, -0.7, -3.4]
    imag_parts = [-40.0, -7.5, -1.0, -0.2, 0.3, 2.0, 15.0]
    return np.array([complex(x, y) for x in real_parts for y in imag_parts])


class TestLogGamma:
    """Test cases for log_gamma."""

    @pytest.mark.parametrize("z", list(_grid()))
    def test_matches_high_precision(self, z):
        expected = complex(mpmath.loggamma(mpmath.mpc(z.real, z.imag)))
        got = log_gamma(z)
        assert abs(got - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_real_axis(self):
        for x in [0.5, 1.5, 4.25, 30.0]:
            assert log_gamma(x) == pytest.approx(complex(mpmath.loggamma(x)), rel=1e-12, abs=1e-13)

    def test_recurrence(self):
        z = _grid()
        residual = np.abs(log_gamma(z + 1.0) - log_gamma(z) - np.log(z))
        assert np.max(residual) <= 1e-10

    def test_array_shape_preserved(self):
        z = np.full((2, 3), 0.5 + 1.0j)
        assert log_gamma(z).shape == (2, 3)

    def test_scalar_returns_complex(self):
        assert isinstance(log_gamma(2.5), complex)

    @pytest.mark.parametrize("pole", [0.0, -1.0, -7.0])
    def test_poles_raise(self, pole):
        with pytest.raises(PoleError):
            log_gamma(pole)


class TestDigamma:
    """Test cases for digamma."""

    @pytest.mark.parametrize("z", list(_grid()))
    def test_matches_high_precision(self, z):
        expected = complex(mpmath.digamma(mpmath.mpc(z.real, z.imag)))
        got = digamma(z)
        assert abs(got - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_value_at_one(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-14)

    def test_recurrence(self):
        z = _grid()
        residual = np.abs(digamma(z + 1.0) - digamma(z) - 1.0 / z)
        assert np.max(residual) <= 1e-10

    def test_reflection(self):
        z = np.array([0.3 + 0.4j, 0.7 - 1.2j, 0.25 + 3.0j])
        residual = np.abs(digamma(1.0 - z) - digamma(z) - np.pi / np.tan(np.pi * z))
        assert np.max(residual) <= 1e-10

    def test_derivative_of_log_gamma(self):
        z = 0.5 + 2.0j
        h = 1e-6
        numeric = (log_gamma(z + h) - log_gamma(z - h)) / (2 * h)
        assert abs(numeric - digamma(z)) < 1e-8

    def test_pole_raises(self):
        with pytest.raises(PoleError):
            digamma(-3.0)


class TestSideAwareLogarithms:
    """Test cases for log_lower / log_upper."""

    def test_negative_real_axis(self):
        assert log_lower(-1.0) == pytest.approx(-1j * np.pi)
        assert log_upper(-1.0) == pytest.approx(1j * np.pi)

    def test_lower_half_plane_matches_principal(self):
        z = np.array([1.0 - 1.0j, -2.0 - 0.5j, 0.3 - 4.0j])
        assert np.allclose(log_lower(z), np.log(z))

    def test_small_positive_imaginary_part_is_clamped(self):
        assert log_lower(-2.0 + 1e-12j) == pytest.approx(np.log(2.0) - 1j * np.pi)

    def test_passivity_violation_raises(self):
        with pytest.raises(PassivityError):
            log_lower(1.0 + 0.1j)

    def test_zero_raises(self):
        with pytest.raises(DomainError):
            log_lower(0.0)

    def test_upper_is_conjugate_mirror(self):
        z = np.array([1.0 + 1.0j, -2.0 + 0.5j])
        assert np.allclose(log_upper(z), np.conj(log_lower(np.conj(z))))


class TestDistributions:
    """Test cases for f_eff and fermi_dirac."""

    def test_zero_temperature_hermitian_limit(self):
        energies = np.array([-2.0, -0.5, 0.5, 2.0])
        assert np.allclose(np.imag(f_eff_zero(energies - 1e-14j)), [1.0, 1.0, 0.0, 0.0])

    @pytest.mark.parametrize("beta", [0.5, 2.0, 10.0])
    def test_finite_temperature_hermitian_limit(self, beta):
        energies = np.linspace(-3.0, 3.0, 13)
        assert np.allclose(np.imag(f_eff_beta(energies, beta)), fermi_dirac(energies, beta), atol=1e-12)

    def test_finite_temperature_rejects_bad_beta(self):
        with pytest.raises(DomainError):
            f_eff_beta(-1.0, 0.0)

    def test_fermi_dirac_zero_temperature_counts_zero_as_occupied(self):
        assert fermi_dirac(0.0) == 1.0
        assert fermi_dirac(1e-9) == 0.0

    def test_fermi_dirac_does_not_overflow(self):
        values = fermi_dirac(np.array([-5.0, 5.0]), 1e4)
        assert np.all(np.isfinite(values))
        assert values[0] == pytest.approx(1.0)
        assert values[1] == pytest.approx(0.0)
