import numpy as np
import pytest

from thimble import kernels
from thimble.errors import CausticError, ConfigError, TruncationWarning
from thimble.kernels import KernelParams


def random_params(count, T_range, seed=0, **extra):
    rng = np.random.default_rng(seed)
    return [
        KernelParams(xi=rng.uniform(-1, 1), xf=rng.uniform(-1, 1), T=rng.uniform(*T_range), **extra)
        for _ in range(count)
    ]


def test_free_kernel_closed_form():
    p = KernelParams(xi=0.3, xf=-0.4, T=1.5, hbar=0.7)
    value = kernels.freeKernel(p)
    expected = np.sqrt(1 / (2j * np.pi * 0.7 * 1.5)) * np.exp(1j * 0.49 / (2 * 0.7 * 1.5))
    assert value.amplitude == pytest.approx(expected)
    assert value.classicalAction == pytest.approx(1j * 0.49 / 3.0)
    assert value.fluctuation_phase == pytest.approx(np.exp(1j * np.pi / 4))


def test_kernel_params_validation():
    with pytest.raises(ConfigError):
        KernelParams(xi=0, xf=0, T=-1.0)
    with pytest.raises(ConfigError):
        KernelParams(xi=0, xf=0, T=1.0, hbar=0.0)
    with pytest.raises(ConfigError):
        KernelParams(xi=0, xf=0, T=1.0, phi=2.0)
    with pytest.raises(ConfigError):
        kernels.kernel("quartic", KernelParams(xi=0, xf=0, T=1.0))


@pytest.mark.parametrize("T, expected", [(3.0, 0), (4.0, 1), (7.0, 2), (0.5, 0)])
def test_maslov_index(T, expected):
    assert kernels.maslovIndex(T) == expected


def test_maslov_index_at_caustic():
    with pytest.raises(CausticError):
        kernels.maslovIndex(np.pi)
    with pytest.raises(CausticError):
        kernels.harmonicKernel(KernelParams(xi=0, xf=0, T=2 * np.pi))


def test_maslov_phase_jump():
    before = kernels.harmonicKernel(KernelParams(xi=0, xf=0, T=np.pi - 0.01)).amplitude
    after = kernels.harmonicKernel(KernelParams(xi=0, xf=0, T=np.pi + 0.01)).amplitude
    assert np.angle(after / before) == pytest.approx(-np.pi / 2, abs=1e-4)


def test_harmonic_kernel_is_mehler():
    x, y, T = 0.4, -0.2, 1.2
    value = kernels.harmonicKernel(KernelParams(xi=y, xf=x, T=T)).amplitude
    expected = np.sqrt(1 / (2j * np.pi * np.sin(T))) * np.exp(
        1j * ((x * x + y * y) * np.cos(T) - 2 * x * y) / (2 * np.sin(T))
    )
    assert value == pytest.approx(expected)


def test_harmonic_tends_to_free_at_short_times():
    p = KernelParams(xi=0.3, xf=0.5, T=1e-3)
    ratio = kernels.harmonicKernel(p).amplitude / kernels.freeKernel(p).amplitude
    assert abs(ratio - 1.0) < 1e-2


@pytest.mark.parametrize("p", random_params(20, (0.5, 2.5)))
@pytest.mark.parametrize("system", ["free", "harmonic"])
def test_schrodinger_residual(system, p):
    assert kernels.schrodingerResidual(system, p) < 1e-6


@pytest.mark.parametrize("theta", [0.0, np.pi / 3])
@pytest.mark.parametrize("p", random_params(10, (0.5, 2.5), seed=1))
def test_schrodinger_residual_circle(theta, p):
    assert kernels.schrodingerResidual("circle", p.shifted(theta=theta, phi=0.8)) < 1e-6


@pytest.mark.parametrize("phi", [0.0, 0.4, 1.2])
def test_schrodinger_residual_wick(phi):
    p = KernelParams(xi=0.2, xf=-0.3, T=1.0, phi=phi)
    assert kernels.schrodingerResidual("wick", p) < 1e-6


@pytest.mark.parametrize("system, T", [("free", 1.3), ("harmonic", 2.5), ("harmonic", 4.0)])
def test_composition(system, T):
    p = KernelParams(xi=0.3, xf=-0.5, T=T)
    composed = kernels.composeKernels(system, p, split=0.5)
    direct = kernels.kernel(system, p).amplitude
    assert abs(composed - direct) < 1e-6


def test_composition_validation():
    p = KernelParams(xi=0.3, xf=-0.5, T=1.0)
    with pytest.raises(ConfigError):
        kernels.composeKernels("circle", p)
    with pytest.raises(ConfigError):
        kernels.composeKernels("free", p, split=1.5)


def test_wick_kernel_endpoints():
    heat = kernels.wickKernel(KernelParams(xi=0.2, xf=0.9, T=1.5, phi=0.0))
    expected = np.exp(-(0.7**2) / (2 * 1.5)) / np.sqrt(2 * np.pi * 1.5)
    assert heat.amplitude == pytest.approx(expected)
    assert abs(heat.amplitude.imag) < 1e-14
    real_time = KernelParams(xi=0.2, xf=0.9, T=1.5)
    assert kernels.wickKernel(real_time).amplitude == pytest.approx(
        kernels.freeKernel(real_time).amplitude
    )
    assert heat.fluctuation_phase == pytest.approx(1.0)


def test_wick_kernel_is_continuous_in_angle():
    angles = np.linspace(0.0, np.pi / 2, 101)
    values = np.array([
        kernels.wickKernel(KernelParams(xi=0.2, xf=0.9, T=1.5, phi=phi)).amplitude for phi in angles
    ])
    assert np.max(np.abs(np.diff(values))) < 0.05 * np.max(np.abs(values))


def test_circle_twisted_periodicity():
    p = KernelParams(xi=0.3, xf=0.7, T=1.0, theta=0.9, phi=0.8)
    base = kernels.circleKernel(p).amplitude
    shifted = kernels.circleKernel(p.shifted(xf=0.7 + 2 * np.pi)).amplitude
    assert shifted == pytest.approx(np.exp(1j * 0.9) * base, rel=1e-10)


def test_circle_windings_converge():
    p = KernelParams(xi=0.3, xf=0.7, T=1.0, theta=0.4, phi=0.5)
    default = kernels.circleKernel(p)
    w_max = kernels.default_windings(p)
    doubled = kernels.circleKernel(p.shifted(w_max=2 * w_max))
    assert abs(default.amplitude - doubled.amplitude) < 1e-10
    assert default.truncation_error <= 1e-12


def test_circle_real_time_warns():
    p = KernelParams(xi=0.3, xf=0.7, T=1.0)
    with pytest.warns(TruncationWarning):
        value = kernels.circleKernel(p)
    assert value.truncation_error == np.inf


def test_circle_heat_kernel_theta_zero_is_positive():
    value = kernels.circleKernel(KernelParams(xi=0.0, xf=3.0, T=2.0, phi=0.0)).amplitude
    assert value.real > 0 and abs(value.imag) < 1e-14


def test_gaussian_product_prefactor():
    assert kernels.gaussianProductPrefactor("free", 2.0, 10) == 1
    below = kernels.gaussianProductPrefactor("harmonic", 1.0, 10_000)
    assert abs(below - np.sqrt(1.0 / np.sin(1.0))) < 1e-3
    above = kernels.gaussianProductPrefactor("harmonic", 4.0, 10_000)
    assert above.imag == 0 and above.real > 0
    assert abs(above - np.sqrt(4.0 / abs(np.sin(4.0)))) < 1e-3
    phased = above * (-1j) ** kernels.maslovIndex(4.0)
    assert np.angle(phased) == pytest.approx(-np.pi / 2)
    with pytest.raises(CausticError):
        kernels.gaussianProductPrefactor("harmonic", np.pi, 10)


@pytest.mark.parametrize("system, T", [("free", 1.0), ("harmonic", 2.0)])
def test_packet_norm_is_conserved(system, T):
    p = KernelParams(xi=0.0, xf=0.0, T=T)
    packet = kernels.WavePacket(x0=0.5, k0=1.0, width=0.8)
    assert kernels.propagatePacket(system, p, packet) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("N", [4, 8, 12])
@pytest.mark.parametrize("system, T", [("free", 1.0), ("harmonic", 4.0)])
def test_schwinger_dyson_on_lattice_thimble(system, T, N):
    p = KernelParams(xi=-1.0, xf=1.0, T=T)
    assert kernels.schwingerDysonCheck(system, N, p) < 1e-10
    assert kernels.schwingerDysonCheck(system, N, p, epsilon=1e-3) < 1e-10


@pytest.mark.parametrize("N", [4, 8, 12])
def test_shifted_thimble_has_same_integral(N):
    p = KernelParams(xi=-1.0, xf=1.0, T=4.0)
    assert kernels.thimbleShiftRatio("harmonic", N, p, 1e-3) < 1e-10
    assert kernels.thimbleShiftRatio("free", N, p, np.linspace(0.0, 1e-2, N)) < 1e-10


def test_lattice_size_bounds():
    p = KernelParams(xi=-1.0, xf=1.0, T=1.0)
    with pytest.raises(ConfigError):
        kernels.schwingerDysonCheck("free", 13, p)
