"""Feynman kernels of the exactly solvable systems from their thimbles.

Free particle, particle on a circle with a theta term, harmonic oscillator
with its Maslov phase, and the free particle along a Wick-rotated time.
Kernels depend on the real duration T through the complex time

    T_c = -i e^{i phi} T,

so phi = pi/2 is real time and phi = 0 the heat kernel.
"""

import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from .errors import CausticError, ConfigError, TruncationWarning

here = os.path.dirname(os.path.realpath(__file__))
sys.path.append(os.path.join(here, "../.."))

import config

FREE = "free"
CIRCLE = "circle"
HARMONIC = "harmonic"
WICK = "wick"
SYSTEMS = (FREE, CIRCLE, HARMONIC, WICK)

REAL_TIME_PHI = np.pi / 2


@dataclass(frozen=True)
class KernelParams:
    xi: float
    xf: float
    T: float
    hbar: float = 1.0
    theta: float = 0.0
    w_max: int = None
    phi: float = REAL_TIME_PHI

    def __post_init__(self):
        if not self.hbar > 0:
            raise ConfigError(f"hbar must be positive, got {self.hbar}.")
        if not self.T > 0:
            raise ConfigError(f"Duration T must be positive, got {self.T}.")
        if not 0.0 <= self.phi <= np.pi / 2:
            raise ConfigError(f"Wick angle must lie in [0, pi/2], got {self.phi}.")
        if self.w_max is not None and self.w_max < 0:
            raise ConfigError(f"w_max must be non-negative, got {self.w_max}.")

    @property
    def complex_duration(self):
        if self.phi == REAL_TIME_PHI:
            return complex(self.T)
        return -1j * np.exp(1j * self.phi) * self.T

    def shifted(self, **changes):
        values = {**self.__dict__, **changes}
        return KernelParams(**values)


@dataclass(frozen=True)
class KernelValue:
    amplitude: complex
    classicalAction: complex
    maslov: int = 0
    truncation_error: float = 0.0
    fluctuation_phase: complex = np.exp(1j * np.pi / 4)


# FREE PARTICLE


def _free_term(displacement, duration, hbar):
    action = 1j * displacement**2 / (2.0 * duration)
    prefactor = np.sqrt(1.0 / (2j * np.pi * hbar * duration))
    return prefactor * np.exp(action / hbar), action


def _value(x):
    # positions may be arrays when kernels are used as integrands
    return complex(x) if np.ndim(x) == 0 else np.asarray(x, dtype=complex)


def _displacement(p):
    return _value(p.xf) - _value(p.xi)


def freeKernel(p):
    """sqrt(1/(2 pi i hbar T)) exp(i (xf - xi)^2 / (2 hbar T)), principal root."""
    amplitude, action = _free_term(_displacement(p), complex(p.T), p.hbar)
    return KernelValue(_value(amplitude), _value(action), 0)


def wickFluctuationPhase(phi):
    """Phase of the thimble directions along the Wick ray."""
    return np.exp(1j * phi / 2.0)


def wickKernel(p):
    """Free kernel at the complex duration -i e^{i phi} T."""
    amplitude, action = _free_term(_displacement(p), p.complex_duration, p.hbar)
    return KernelValue(
        _value(amplitude), _value(action), 0, fluctuation_phase=wickFluctuationPhase(p.phi)
    )


# CIRCLE


def _decay(p):
    # Gaussian damping of the winding terms; none at all in real time
    return 0.0 if p.phi == REAL_TIME_PHI else float(np.cos(p.phi))


def default_windings(p):
    """Smallest w_max with Gaussian tail below the configured bound."""
    settings = config.KERNEL_SETTINGS
    decay = _decay(p)
    if decay <= 0:
        return settings["real_time_windings"]
    spread = np.sqrt(2.0 * p.hbar * p.T * np.log(1.0 / settings["winding_tail_bound"]) / decay)
    return int(min(np.ceil(spread / (2.0 * np.pi)) + 1, settings["max_windings"]))


def _winding_tail(p, w_max):
    # largest neglected term relative to the prefactor
    decay = _decay(p)
    if decay <= 0:
        return np.inf
    distance = 2.0 * np.pi * w_max
    return float(np.exp(-(distance**2) * decay / (2.0 * p.hbar * p.T)))


def circleKernel(p):
    """Sum over windings w of e^{-i theta w} K_free(xf + 2 pi w - xi).

    Written in the gauge psi(x + 2 pi) = e^{i theta} psi(x). The window of
    windings is centred on the shortest displacement.

    Warns:
        TruncationWarning: tail estimate above the configured bound (always in
        real time, where the winding sum does not converge).
    """
    w_max = default_windings(p) if p.w_max is None else int(p.w_max)
    duration = p.complex_duration
    base = complex(p.xf) - complex(p.xi)
    centre = int(np.round(-base.real / (2.0 * np.pi)))
    windings = np.arange(centre - w_max, centre + w_max + 1)
    terms, actions = _free_term(base + 2.0 * np.pi * windings, duration, p.hbar)
    amplitude = np.sum(np.exp(-1j * p.theta * windings) * terms)
    tail = _winding_tail(p, w_max)
    if tail > config.KERNEL_SETTINGS["winding_tail_bound"]:
        warnings.warn(
            f"Winding sum truncated at w_max = {w_max} with tail estimate {tail:.2e}.",
            TruncationWarning,
            stacklevel=2,
        )
    return KernelValue(
        complex(amplitude), complex(actions[w_max]), 0, truncation_error=tail,
        fluctuation_phase=wickFluctuationPhase(p.phi),
    )


# HARMONIC OSCILLATOR


def _check_caustic(T):
    window = config.KERNEL_SETTINGS["caustic_window"]
    nearest = np.round(T / np.pi)
    if nearest >= 1 and abs(T - nearest * np.pi) < window:
        raise CausticError(f"T = {T} lies within {window} of the caustic {int(nearest)} pi.")


def maslovIndex(T):
    """Largest non-negative integer strictly below T/pi."""
    if not T > 0:
        raise ConfigError(f"Duration T must be positive, got {T}.")
    _check_caustic(T)
    return int(np.ceil(T / np.pi) - 1)


def harmonicAction(xi, xf, T):
    return 1j * ((xf**2 + xi**2) * np.cos(T) - 2.0 * xf * xi) / (2.0 * np.sin(T))


def harmonicKernel(p):
    """sqrt(1/(2 pi i hbar |sin T|)) exp(I_cl/hbar - i pi nu/2)."""
    nu = maslovIndex(p.T)
    action = harmonicAction(_value(p.xi), _value(p.xf), p.T)
    prefactor = np.sqrt(1.0 / (2j * np.pi * p.hbar * abs(np.sin(p.T))))
    amplitude = prefactor * np.exp(action / p.hbar - 1j * np.pi * nu / 2.0)
    return KernelValue(_value(amplitude), _value(action), nu)


def kernel(system, p):
    """Dispatch on the system name."""
    kernels = {FREE: freeKernel, CIRCLE: circleKernel, HARMONIC: harmonicKernel, WICK: wickKernel}
    if system not in kernels:
        raise ConfigError(f"Unknown system: {system}. Use one of {', '.join(SYSTEMS)}.")
    return kernels[system](p)


def gaussianProductPrefactor(system, T, n_modes):
    """Harmonic over free mode product, prod_l |1 - (T/(pi l))^2|^{-1/2}.

    Only the magnitude is returned; it converges to sqrt(T/|sin T|). The phase (-i)^nu of the negative factors is the Maslov
    phase, see maslovIndex. The free/free ratio is 1.
    """
    if n_modes < 1:
        raise ConfigError(f"n_modes must be at least 1, got {n_modes}.")
    if system == FREE:
        return 1.0 + 0j
    if system != HARMONIC:
        raise ConfigError(f"No mode product for system {system}.")
    ell = np.arange(1, n_modes + 1)
    factors = 1.0 - (T / (np.pi * ell)) ** 2
    if np.any(np.abs(factors) < config.KERNEL_SETTINGS["caustic_window"]):
        raise CausticError(f"T = {T} makes a mode factor vanish.")
    return complex(np.exp(-0.5 * np.sum(np.log(np.abs(factors)))))


# CONSISTENCY CHECKS


def _hamiltonian_potential(system, x):
    if system == HARMONIC:
        return x * x / 2.0
    return 0.0


def _time_factor(system, p):
    # d/dT = eta d/dT_c
    if system in (WICK, CIRCLE):
        return -1j * np.exp(1j * p.phi) if p.phi != REAL_TIME_PHI else 1.0
    return 1.0


def schrodingerResidual(system, p, h=1e-3):
    """|i hbar dK/dT_c + (hbar^2/2) K'' - V(xf) K| by fourth-order central
    differences in (xf, T)."""
    def amplitude(**changes):
        return kernel(system, p.shifted(**changes)).amplitude

    xf, T = p.xf, p.T
    d_time = (
        -amplitude(T=T + 2 * h) + 8 * amplitude(T=T + h) - 8 * amplitude(T=T - h) + amplitude(T=T - 2 * h)
    ) / (12.0 * h)
    centre = amplitude()
    d2_space = (
        -amplitude(xf=xf + 2 * h)
        + 16 * amplitude(xf=xf + h)
        - 30 * centre
        + 16 * amplitude(xf=xf - h)
        - amplitude(xf=xf - 2 * h)
    ) / (12.0 * h**2)
    eta = _time_factor(system, p)
    residual = (
        1j * p.hbar * d_time / eta
        + p.hbar**2 / 2.0 * d2_space
        - _hamiltonian_potential(system, xf) * centre
    )
    return float(abs(residual))


def _classical_position(system, p, s):
    if system == HARMONIC:
        return (p.xi * np.sin(p.T - s) + p.xf * np.sin(s)) / np.sin(p.T)
    return p.xi + (p.xf - p.xi) * s / p.T


def _rotation(system, p, s):
    # direction in which the y^2 coefficient of the product turns Gaussian
    if system == HARMONIC:
        curvature = np.sin(p.T) / (np.sin(s) * np.sin(p.T - s))
        return np.exp(1j * np.pi / 4 * np.sign(curvature))
    return np.exp(1j * np.pi / 4)


def composeKernels(system, p, split=0.5, rotation=None):
    """Integral over y of K(xf, T - s; y) K(y, s; xi) with s = split T.

    The y contour runs through the classical position at time s along the
    ray e^{i alpha} on which the integrand is a decaying Gaussian.
    """
    if system not in (FREE, HARMONIC):
        raise ConfigError(f"Composition is available for free and harmonic kernels, not {system}.")
    if not 0 < split < 1:
        raise ConfigError(f"split must lie in (0, 1), got {split}.")
    s = split * p.T
    direction = _rotation(system, p, s) if rotation is None else rotation
    centre = _classical_position(system, p, s)

    def integrand(r):
        y = centre + r * direction
        later = kernel(system, p.shifted(xi=y, T=p.T - s)).amplitude
        earlier = kernel(system, p.shifted(xf=y, T=s)).amplitude
        value = later * earlier * direction
        return np.array([value.real, value.imag])

    result, _ = integrate.quad_vec(integrand, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)
    return complex(result[0], result[1])


@dataclass(frozen=True)
class WavePacket:
    x0: float = 0.0
    k0: float = 0.0
    width: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        norm = (2.0 * np.pi * self.width**2) ** -0.25
        return norm * np.exp(-((x - self.x0) ** 2) / (4.0 * self.width**2) + 1j * self.k0 * x)


def propagatePacket(system, p, packet=None, points=801):
    """Propagate a Gaussian packet over duration p.T and return its norm.

    psi_T(x) = integral K(x, T; y) psi_0(y) dy on a grid wide enough for the
    spread packet; the norm is integrated with Simpson's rule.
    """
    if system not in (FREE, HARMONIC):
        raise ConfigError(f"Packet propagation is available for free and harmonic kernels, not {system}.")
    packet = packet or WavePacket()
    if system == HARMONIC:
        centre = packet.x0 * np.cos(p.T) + p.hbar * packet.k0 * np.sin(p.T)
        spread = max(packet.width, p.hbar / (2.0 * packet.width))
    else:
        centre = packet.x0 + p.hbar * packet.k0 * p.T
        spread = packet.width * np.sqrt(1.0 + (p.hbar * p.T / (2.0 * packet.width**2)) ** 2)
    x = np.linspace(centre - 12.0 * spread, centre + 12.0 * spread, points)
    source = 12.0 * packet.width

    def integrand(y):
        values = kernel(system, p.shifted(xi=y, xf=x)).amplitude * packet(y)
        return np.concatenate([values.real, values.imag])

    result, _ = integrate.quad_vec(
        integrand, packet.x0 - source, packet.x0 + source, epsabs=1e-12, epsrel=1e-10, limit=2000
    )
    psi = result[:points] + 1j * result[points:]
    return float(integrate.simpson(np.abs(psi) ** 2, x=x))


# FINITE-N THIMBLE


def _lattice_quadratic_action(system, N, p):
    """I(z) = 1/2 z^T Q z + j^T z on N interior sites between xi and xf."""
    if not 2 <= N <= 12:
        raise ConfigError(f"Lattice size must lie in [2, 12], got {N}.")
    if system not in (FREE, HARMONIC):
        raise ConfigError(f"No lattice action for system {system}.")
    h = p.T / (N + 1)
    stiffness = 2.0 * np.eye(N) - np.eye(N, k=1) - np.eye(N, k=-1)
    linear = 1.0 if system == HARMONIC else 0.0
    Q = 1j * (stiffness / h - h * linear * np.eye(N))
    j = np.zeros(N, dtype=complex)
    j[0] -= 1j * p.xi / h
    j[-1] -= 1j * p.xf / h
    return Q, j


def _thimble_basis(Q):
    # Negative eigenvectors of Re(z^T Q z) in (Re z, Im z) span the thimble.
    N = len(Q)
    real_form = np.block([[Q.real, -Q.imag], [-Q.imag, -Q.real]])
    values, vectors = linalg.eigh(real_form)
    lowest = vectors[:, np.argsort(values)[:N]]
    return lowest[:N] + 1j * lowest[N:]


def _thimble_moments(system, N, p, epsilon):
    Q, j = _lattice_quadratic_action(system, N, p)
    saddle = linalg.solve(Q, -j)
    shift = np.broadcast_to(np.asarray(epsilon, dtype=complex), (N,))
    basis = _thimble_basis(Q)
    gram = basis.T @ Q @ basis
    linear = basis.T @ Q @ shift
    # exponent 1/2 a^T gram a + linear^T a, so <a> = -gram^{-1} linear
    mean = -linalg.solve(gram, linear)
    return Q, j, saddle, shift, basis, gram, linear, mean


def schwingerDysonCheck(system, N, p, epsilon=0.0):
    """max_i |<dI/dz_i>| over the (optionally shifted) lattice thimble,
    from the exact Gaussian first moment."""
    Q, j, saddle, shift, basis, _, _, mean = _thimble_moments(system, N, p, epsilon)
    expectation = Q @ (saddle + shift + basis @ mean) + j
    return float(np.max(np.abs(expectation)))


def thimbleShiftRatio(system, N, p, epsilon):
    """|Z_{sigma, epsilon} / Z_{sigma, 0} - 1| for a shifted thimble."""
    Q, _, _, shift, _, gram, linear, _ = _thimble_moments(system, N, p, epsilon)
    exponent = 0.5 * shift @ Q @ shift - 0.5 * linear @ linalg.solve(gram, linear)
    return float(abs(np.exp(exponent / p.hbar) - 1.0))
