"""
Complex special functions and the non-Hermitian Fermi-Dirac distribution.

All functions accept a Python scalar or a numpy array and return the same
shape (scalars come back as ``complex``). log-gamma uses Stirling's series
after an upward recurrence shift, digamma uses the matching asymptotic series
plus reflection for Re z < 0.
"""

from typing import Optional, Union

import numpy as np

from src.utils.errors import DomainError, PassivityError, PoleError

ComplexLike = Union[complex, float, np.ndarray]

EULER_GAMMA = 0.57721566490153286061
TOL_IM = 1e-9

_HALF_LOG_TWO_PI = 0.5 * np.log(2.0 * np.pi)
# Re z is shifted up to this value before the asymptotic series is used.
_SHIFT_TARGET = 12.0
# B_2, B_4, ..., B_20
_BERNOULLI_EVEN = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)
_STIRLING_COEFFS = tuple(b / ((2 * k) * (2 * k - 1)) for k, b in enumerate(_BERNOULLI_EVEN, start=1))
_DIGAMMA_COEFFS = tuple(b / (2 * k) for k, b in enumerate(_BERNOULLI_EVEN, start=1))


def _as_complex_array(z: ComplexLike) -> np.ndarray:
    return np.atleast_1d(np.array(z, dtype=complex, copy=True))


def _restore_shape(result: np.ndarray, original: ComplexLike) -> ComplexLike:
    result = np.asarray(result)
    if np.ndim(original) == 0:
        return complex(result.reshape(-1)[0])
    return result.reshape(np.shape(original))


def _check_poles(z: np.ndarray, name: str) -> None:
    poles = (z.imag == 0.0) & (z.real <= 0.0) & (z.real == np.round(z.real))
    if np.any(poles):
        bad = z[poles].flat[0]
        raise PoleError(f"{name} has a pole at z = {bad.real:g}")


def _shift_counts(real_part: np.ndarray) -> np.ndarray:
    return np.where(real_part < _SHIFT_TARGET, np.ceil(_SHIFT_TARGET - real_part), 0.0).astype(int)


def _clamp_passive(z: np.ndarray, tol_im: float) -> np.ndarray:
    if np.any(z.imag > tol_im):
        worst = float(np.max(z.imag))
        raise PassivityError(f"Im z = {worst:.3e} exceeds passivity tolerance {tol_im:.1e}")
    return z.real + 1j * np.minimum(z.imag, 0.0)


def log_lower(z: ComplexLike, tol_im: float = TOL_IM) -> ComplexLike:
    """
    Logarithm with the branch cut pushed into the upper half-plane.

    Args:
        z: Argument with Im z <= tol_im
        tol_im: Positive imaginary parts up to this size are clamped to zero

    Returns:
        ln|z| + i arg z with arg z in [-pi, 0]; the negative real axis maps to -pi
    """
    values = _clamp_passive(_as_complex_array(z), tol_im)
    modulus = np.hypot(values.real, values.imag)
    if np.any(modulus == 0.0):
        raise DomainError("logarithm of zero is undefined")

    angle = np.arctan2(values.imag, values.real)
    angle = np.where(angle > 0.0, angle - 2.0 * np.pi, angle)
    return _restore_shape(np.log(modulus) + 1j * angle, z)


def log_upper(z: ComplexLike, tol_im: float = TOL_IM) -> ComplexLike:
    """Mirror image of :func:`log_lower`: arg z in [0, pi], for Im z >= -tol_im."""
    mirrored = np.conj(log_lower(np.conj(_as_complex_array(z)), tol_im))
    return _restore_shape(mirrored, z)


def log_gamma(z: ComplexLike) -> ComplexLike:
    """
    Principal branch of log Gamma(z).

    Uses logGamma(z) = logGamma(z + n) - sum_k Log(z + k) with Stirling's series
    at z + n. Summing principal logarithms reproduces the principal branch
    everywhere off the negative real axis, so no reflection is required.

    Args:
        z: Argument, not a nonpositive integer

    Returns:
        log Gamma(z)
    """
    values = _as_complex_array(z)
    _check_poles(values, "log_gamma")

    shifts = _shift_counts(values.real)
    correction = np.zeros_like(values)
    for k in range(int(shifts.max(initial=0))):
        active = shifts > k
        correction[active] += np.log(values[active] + k)

    w = values + shifts
    inv_w2 = 1.0 / (w * w)
    series = np.zeros_like(w)
    for coeff in reversed(_STIRLING_COEFFS):
        series = series * inv_w2 + coeff
    stirling = (w - 0.5) * np.log(w) - w + _HALF_LOG_TWO_PI + series / w

    return _restore_shape(stirling - correction, z)


def digamma(z: ComplexLike) -> ComplexLike:
    """
    Digamma function Psi(z) = d/dz log Gamma(z).

    Args:
        z: Argument, not a nonpositive integer

    Returns:
        Psi(z)
    """
    values = _as_complex_array(z)
    _check_poles(values, "digamma")

    reflect = values.real < 0.0
    base = np.where(reflect, 1.0 - values, values)

    shifts = _shift_counts(base.real)
    correction = np.zeros_like(base)
    for k in range(int(shifts.max(initial=0))):
        active = shifts > k
        correction[active] += 1.0 / (base[active] + k)

    w = base + shifts
    inv_w2 = 1.0 / (w * w)
    series = np.zeros_like(w)
    for coeff in reversed(_DIGAMMA_COEFFS):
        series = series * inv_w2 + coeff
    psi = np.log(w) - 0.5 / w - series * inv_w2 - correction

    if np.any(reflect):
        # Psi(z) = Psi(1 - z) - pi cot(pi z)
        psi = np.where(reflect, psi - np.pi / np.tan(np.pi * np.where(reflect, values, 0.5)), psi)

    return _restore_shape(psi, z)


def f_eff_zero(energy: ComplexLike, tol_im: float = TOL_IM) -> ComplexLike:
    """Zero-temperature non-Hermitian Fermi-Dirac distribution -(1/pi) ln eps."""
    return _restore_shape(-np.asarray(log_lower(energy, tol_im)) / np.pi, energy)


def f_eff_beta(energy: ComplexLike, beta: float, tol_im: float = TOL_IM) -> ComplexLike:
    """
    Finite-temperature non-Hermitian Fermi-Dirac distribution.

    Args:
        energy: Eigenvalue(s) with Im eps <= tol_im
        beta: Inverse temperature, > 0
        tol_im: Passivity clamp

    Returns:
        -(1/pi) [Psi(1/2 + i beta eps / 2pi) - i pi / 2]
    """
    if not beta > 0.0:
        raise DomainError(f"inverse temperature must be positive, got {beta}")

    values = _clamp_passive(_as_complex_array(energy), tol_im)
    argument = 0.5 + 1j * beta * values / (2.0 * np.pi)
    result = -(np.asarray(digamma(argument)) - 0.5j * np.pi) / np.pi
    return _restore_shape(result, energy)


def fermi_dirac(energy: Union[float, np.ndarray], beta: Optional[float] = None) -> Union[float, np.ndarray]:
    """
    Ordinary Fermi-Dirac occupation of real energies.

    ``beta=None`` selects zero temperature, where eps = 0 counts as occupied.
    """
    values = np.asarray(energy, dtype=float)
    if beta is None:
        occupation = (values <= 0.0).astype(float)
    else:
        occupation = 0.5 * (1.0 - np.tanh(0.5 * beta * values))
    if np.ndim(energy) == 0:
        return float(occupation)
    return occupation
