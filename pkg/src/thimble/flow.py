"""Gradient flows of the lattice action and the linearized flow spectrum.

Paths are sampled on a uniform real-time grid t_j = ti + j h, j = 0..N, with
pinned endpoints. The lattice action is

    I_h = i sum_j (z_{j+1} - z_j)^2 / (2h) - i h sum_j w_j V(z_j)

with trapezoid weights w_j, and the downward flow

    dz_j/du = -i e^{-i delta} (D^2 zbar + V'(zbar))_j

lowers Re(e^{i delta} I_h) while keeping Im(e^{i delta} I_h) fixed. The part
linear in zbar is diagonal in the discrete sine basis and is integrated
exactly; the remaining forcing goes through a second-order exponential
Runge-Kutta step.
"""

import os
import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy import fft, linalg, sparse

from . import saddles
from .errors import (
    ConfigError,
    DivergenceError,
    FlowInstabilityError,
    StokesDegeneracyWarning,
)

here = os.path.dirname(os.path.realpath(__file__))
sys.path.append(os.path.join(here, "../.."))

import config
from utils.general_utils import report

FREE = "free"
HARMONIC = "harmonic"
DOUBLE_WELL = "doubleWell"

DOWNWARD = 1
UPWARD = -1

MIN_GRID_POINTS = 32
MIN_SPECTRUM_GRID_POINTS = 64


# POTENTIALS


@dataclass(frozen=True)
class Potential:
    """V(z) split as V'(z) = c z + g(z); c is diagonalized with D^2."""

    name: str
    linear: float

    def value(self, z):
        if self.name == FREE:
            return np.zeros_like(z)
        if self.name == HARMONIC:
            return z * z / 2.0
        return (z * z - 1.0) ** 2 / 2.0

    def derivative(self, z):
        if self.name == FREE:
            return np.zeros_like(z)
        if self.name == HARMONIC:
            return z
        return 2.0 * z * (z * z - 1.0)

    def curvature(self, z):
        if self.name == FREE:
            return np.zeros_like(z)
        if self.name == HARMONIC:
            return np.ones_like(z)
        return 6.0 * z * z - 2.0

    def remainder(self, z):
        # V'(z) - c z
        if self.name == DOUBLE_WELL:
            return 2.0 * z**3
        return np.zeros_like(z)


POTENTIALS = {
    FREE: Potential(FREE, 0.0),
    HARMONIC: Potential(HARMONIC, 1.0),
    DOUBLE_WELL: Potential(DOUBLE_WELL, -2.0),
}


def get_potential(potential):
    if isinstance(potential, Potential):
        return potential
    aliases = {"free": FREE, "harmonic": HARMONIC, "doublewell": DOUBLE_WELL}
    key = aliases.get(str(potential).replace("_", "").replace("-", "").lower())
    if key is None:
        raise ConfigError(f"Unknown potential: {potential}. Use free, harmonic or doubleWell.")
    return POTENTIALS[key]


# STATES


@dataclass(frozen=True)
class FlowState:
    samples: np.ndarray
    u: float
    bc: saddles.BoundaryData
    history: pd.DataFrame = field(default=None, compare=False, repr=False)

    @property
    def grid_n(self):
        return len(self.samples) - 1

    @property
    def spacing(self):
        return self.bc.duration / self.grid_n

    @property
    def times(self):
        return np.linspace(self.bc.ti, self.bc.tf, len(self.samples))


@dataclass(frozen=True)
class SpectralPair:
    lambda_: float
    f: np.ndarray


def _check_real_time(bc):
    if bc.time.kind != saddles.REAL_TIME:
        raise ConfigError("Flows are only defined for real-time boundary data.")


def _check_grid(grid_n, minimum=MIN_GRID_POINTS):
    if int(grid_n) < minimum:
        raise ConfigError(f"Grid needs at least {minimum} intervals, got {grid_n}.")
    return int(grid_n)


def _sine_modes(grid_n):
    # sin(pi l j / N) for l = 1..N-1 (rows) at interior j = 1..N-1 (columns)
    index = np.arange(1, grid_n)
    return np.sin(np.pi * np.outer(index, index) / grid_n)


def _laplacian_eigenvalues(grid_n, spacing):
    ell = np.arange(1, grid_n)
    return -(4.0 / spacing**2) * np.sin(np.pi * ell / (2.0 * grid_n)) ** 2


def _boundary_line(bc, grid_n):
    weights = np.linspace(0.0, 1.0, grid_n + 1)
    return complex(bc.xi) * (1.0 - weights) + complex(bc.xf) * weights


def _dst(values):
    return fft.dst(values.real, type=1, norm="ortho") + 1j * fft.dst(
        values.imag, type=1, norm="ortho"
    )


def saddleState(system, bc, grid_n=None, label=None, eigen_tolerance=None):
    """Exact saddle of the lattice action for free and harmonic systems; the
    double-well solution for `label` sampled on the grid otherwise."""
    potential = get_potential(system)
    _check_real_time(bc)
    grid_n = _check_grid(grid_n or config.FLOW_SETTINGS["grid_n"])
    if potential.name == DOUBLE_WELL:
        if label is None:
            raise ConfigError("The double-well saddle needs a label.")
        return solutionState(saddles.solveModulus(label, bc), grid_n)
    line = _boundary_line(bc, grid_n)
    samples = line.copy()
    if potential.linear != 0.0:
        # (D^2 + c) w = -c line on the interior
        spacing = bc.duration / grid_n
        mu = _laplacian_eigenvalues(grid_n, spacing) + potential.linear
        if np.any(np.abs(mu) < (eigen_tolerance or config.TOLERANCES["eigen"])):
            raise ConfigError("Lattice saddle is degenerate (caustic on the grid).")
        forcing = _dst(-potential.linear * line[1:-1])
        samples[1:-1] += _dst(forcing / mu)
    return FlowState(samples=samples, u=0.0, bc=bc)


def solutionState(sol, grid_n=None):
    """A double-well classical solution sampled on the flow grid."""
    _check_real_time(sol.bc)
    grid_n = _check_grid(grid_n or config.FLOW_SETTINGS["grid_n"])
    times = np.linspace(sol.bc.ti, sol.bc.tf, grid_n + 1)
    functions = None if sol.is_zero else sol.functions()
    samples = np.asarray(saddles.trajectory(sol, times, functions), dtype=complex)
    samples[0], samples[-1] = complex(sol.bc.xi), complex(sol.bc.xf)
    return FlowState(samples=samples, u=0.0, bc=sol.bc)


def perturbedState(state, mode, amplitude, phase=np.exp(1j * np.pi / 4)):
    """Add amplitude * phase * sin(pi l (t - ti) / T) to a state."""
    if mode < 1:
        raise ConfigError(f"Mode index must be positive, got {mode}.")
    j = np.arange(state.grid_n + 1)
    bump = np.sin(np.pi * mode * j / state.grid_n)
    return replace(state, samples=state.samples + amplitude * phase * bump, history=None)


def modeAmplitude(state, reference, mode):
    """Complex coefficient of sin(pi l (t - ti) / T) in state - reference."""
    difference = state.samples[1:-1] - reference.samples[1:-1]
    j = np.arange(1, state.grid_n)
    return complex(2.0 / state.grid_n * np.sum(difference * np.sin(np.pi * mode * j / state.grid_n)))


# ACTION


def discreteAction(state, potential, stokes_phase=0.0):
    """e^{i delta} I_h for the sampled path."""
    potential = get_potential(potential)
    z = state.samples
    h = state.spacing
    kinetic = np.sum(np.diff(z) ** 2) / (2.0 * h)
    weights = np.ones(len(z))
    weights[0] = weights[-1] = 0.5
    potential_term = h * np.sum(weights * potential.value(z))
    return complex(np.exp(1j * stokes_phase) * 1j * (kinetic - potential_term))


# INTEGRATOR


class ExponentialFlowIntegrator:
    """Flow dw/du = a (D^2 + c) wbar + F(w) for the interior deviation w from
    the straight line between the endpoints, a = -direction i e^{-i delta}.

    In sine-mode coordinates (x, y) = (Re w_l, Im w_l) the linear part is
    M = [[wr, wi], [wi, -wr]] with wr + i wi = a mu_l, and M^2 = |a mu_l|^2.
    """

    def __init__(self, potential, bc, grid_n, du, direction=DOWNWARD, stokes_phase=0.0):
        self.potential = get_potential(potential)
        self.bc = bc
        self.grid_n = grid_n
        self.du = du
        self.a = -direction * 1j * np.exp(-1j * stokes_phase)
        spacing = bc.duration / grid_n
        coefficient = self.a * (_laplacian_eigenvalues(grid_n, spacing) + self.potential.linear)
        self.wr, self.wi = coefficient.real, coefficient.imag
        self.omega = np.abs(coefficient)
        self.line = _boundary_line(bc, grid_n)[1:-1]
        self._propagators()

    def _propagators(self):
        # exp(M du) = C I + S M, du phi1 = S I + P M, du phi2 = (P I + Q M) / du
        du = self.du
        x = self.omega * du
        small = x < 1e-3
        omega = np.where(small, 1.0, self.omega)
        omega_sq = self.omega**2
        self.C = np.cosh(x)
        self.S = np.where(small, du + omega_sq * du**3 / 6.0, np.sinh(x) / omega)
        self.P = np.where(small, du**2 / 2.0 + omega_sq * du**4 / 24.0, (np.cosh(x) - 1.0) / omega**2)
        self.Q = np.where(
            small, du**3 / 6.0 + omega_sq * du**5 / 120.0, (np.sinh(x) / omega - du) / omega**2
        )

    def _apply(self, diagonal, mixing, coefficients):
        x, y = coefficients.real, coefficients.imag
        mx = self.wr * x + self.wi * y
        my = self.wi * x - self.wr * y
        return diagonal * coefficients + mixing * (mx + 1j * my)

    def forcing(self, w_hat):
        """Sine coefficients of a (c line + g(line + w))bar."""
        w = _dst(w_hat)
        z_bar = np.conj(self.line + w)
        values = self.a * (self.potential.linear * np.conj(self.line) + self.potential.remainder(z_bar))
        return _dst(values)

    def step(self, w_hat):
        forcing = self.forcing(w_hat)
        predictor = self._apply(self.C, self.S, w_hat) + self._apply(self.S, self.P, forcing)
        if self.potential.name != DOUBLE_WELL:
            # constant forcing: the exponential Euler step is exact
            return predictor
        correction = self.forcing(predictor) - forcing
        return predictor + self._apply(self.P / self.du, self.Q / self.du, correction)


def _flow(initial, potential, du, steps, direction, stokes_phase, verbose):
    settings = config.FLOW_SETTINGS
    potential = get_potential(potential)
    du = settings["du"] if du is None else du
    steps = settings["steps"] if steps is None else steps
    stokes_phase = settings["stokes_phase"] if stokes_phase is None else stokes_phase
    if not du > 0:
        raise ConfigError(f"Flow step du must be positive, got {du}.")
    _check_real_time(initial.bc)
    grid_n = _check_grid(initial.grid_n)

    integrator = ExponentialFlowIntegrator(
        potential, initial.bc, grid_n, du, direction, stokes_phase
    )
    w_hat = _dst(initial.samples[1:-1] - integrator.line)
    samples = initial.samples.copy()
    u = initial.u
    regulated = discreteAction(initial, potential, stokes_phase)
    records = [_record(0, u, initial, potential, regulated)]
    for step in range(1, steps + 1):
        w_hat = integrator.step(w_hat)
        samples = samples.copy()
        samples[1:-1] = integrator.line + _dst(w_hat)
        u += direction * du
        if not np.all(np.isfinite(samples)) or np.max(np.abs(samples)) > settings["divergence_cap"]:
            raise DivergenceError(f"Flow diverged at step {step} (u = {u}).")
        state = FlowState(samples=samples, u=u, bc=initial.bc)
        current = discreteAction(state, potential, stokes_phase)
        change = direction * (current.real - regulated.real)
        if change > settings["instability_tolerance"] * max(1.0, abs(current)):
            raise FlowInstabilityError(
                f"Re I moved against the flow at step {step} (u = {u}).",
                {"step": step, "u": u, "previous": regulated, "current": current, "du": du},
            )
        regulated = current
        records.append(_record(step, u, state, potential, current))
    history = pd.DataFrame(records)
    report(
        f"+++ {'Downward' if direction == DOWNWARD else 'Upward'} flow complete: "
        f"{steps} steps, Re I = {regulated.real:.6g}",
        verbose,
    )
    return FlowState(samples=samples, u=u, bc=initial.bc, history=history)


def _record(step, u, state, potential, regulated):
    plain = discreteAction(state, potential, 0.0)
    return {
        "step": step,
        "u": u,
        "re_action": plain.real,
        "im_action": plain.imag,
        "re_regulated": regulated.real,
        "im_regulated": regulated.imag,
    }


def downwardFlow(initial, potential, du=None, steps=None, stokes_phase=None, verbose=False):
    """Integrate the downward flow; Re(e^{i delta} I) never increases.

    Flow time u is counted positive along the downward flow.

    Raises:
        FlowInstabilityError: Re I increased beyond tolerance (diagnostic attached).
        DivergenceError: the path left the divergence cap.
    """
    return _flow(initial, potential, du, steps, DOWNWARD, stokes_phase, verbose)


def upwardFlow(initial, potential, du=None, steps=None, stokes_phase=None, verbose=False):
    """Integrate the upward flow; Re(e^{i delta} I) never decreases."""
    return _flow(initial, potential, du, steps, UPWARD, stokes_phase, verbose)


# SPECTRUM


def _saddle_samples(saddle, grid_n, potential):
    if isinstance(saddle, FlowState):
        if potential is None:
            raise ConfigError("A potential is required for a sampled saddle.")
        return saddle, get_potential(potential)
    grid_n = grid_n or config.FIGURE_DEFAULTS["grid_n"]
    return solutionState(saddle, grid_n), POTENTIALS[DOUBLE_WELL]


def linearizedSpectrum(saddle, grid_n=None, potential=None, eigen_tolerance=None):
    """Eigenpairs of L = -(D^2 + Omega^2) sigma3 - Gamma^2 sigma1 on the interior,
    Omega^2 + i Gamma^2 = V''(conj z_sigma), sorted by eigenvalue.

    `saddle` is either a ClassicalSolution of the double well or a FlowState
    together with its potential. Eigenfunctions f = f1 + i f2 vanish at the
    endpoints and satisfy h sum |f|^2 = 1.
    """
    state, potential = _saddle_samples(saddle, grid_n, potential)
    grid_n = _check_grid(state.grid_n, MIN_SPECTRUM_GRID_POINTS)
    h = state.spacing
    size = grid_n - 1
    laplacian = sparse.diags(
        [np.ones(size - 1), -2.0 * np.ones(size), np.ones(size - 1)], [-1, 0, 1]
    ) / h**2
    curvature = potential.curvature(np.conj(state.samples[1:-1]))
    shifted = (laplacian + sparse.diags(curvature.real)).toarray()
    gamma = np.diag(curvature.imag)
    operator = np.block([[-shifted, -gamma], [-gamma, shifted]])
    eigenvalues, vectors = linalg.eigh(operator)

    eigen_tolerance = eigen_tolerance or config.TOLERANCES["eigen"]
    if np.any(np.abs(eigenvalues) < eigen_tolerance):
        warnings.warn(
            "Near-zero eigenvalue: the saddle sits on a Stokes-degenerate direction.",
            StokesDegeneracyWarning,
            stacklevel=2,
        )
    pairs = []
    for value, vector in zip(eigenvalues, vectors.T):
        f = np.zeros(grid_n + 1, dtype=complex)
        f[1:-1] = vector[:size] + 1j * vector[size:]
        f /= np.sqrt(h * np.sum(np.abs(f) ** 2))
        pairs.append(SpectralPair(float(value), f))
    return pairs


def pairingResiduals(spectrum):
    """lambda_j + lambda_{rev(j)} of a sorted spectrum."""
    values = np.array([pair.lambda_ for pair in spectrum])
    return values + values[::-1]


def pairingPartner(f):
    """Image of f = f1 + i f2 under (f1, f2) -> (f2, -f1), eigenvalue -lambda."""
    return -1j * np.asarray(f)


def thimbleTangentBasis(spectrum):
    """e^{i pi/4} f for every positive eigenvalue."""
    phase = np.exp(1j * np.pi / 4)
    return [phase * pair.f for pair in spectrum if pair.lambda_ > 0]


def gaussianActionExpansion(saddle, spectrum, coefficients, potential=None, action_value=None):
    """I[z_sigma] - sum lambda_n a_n^2 / 2 for z_sigma + sum a_n e^{i pi/4} f_n.

    The saddle action is the lattice action when `saddle` is a FlowState and
    the continuum action of the classical solution otherwise.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if len(coefficients) != len(spectrum):
        raise ConfigError(
            f"Got {len(coefficients)} coefficients for {len(spectrum)} spectral pairs."
        )
    if action_value is None:
        if isinstance(saddle, FlowState):
            action_value = discreteAction(saddle, potential)
        else:
            action_value = saddles.action(saddle).value
    eigenvalues = np.array([pair.lambda_ for pair in spectrum])
    return complex(action_value - np.sum(eigenvalues * coefficients**2) / 2.0)


def expandedState(saddle, spectrum, coefficients):
    """The path z_sigma + sum a_n e^{i pi/4} f_n on the saddle's grid."""
    phase = np.exp(1j * np.pi / 4)
    samples = saddle.samples.copy()
    for pair, a in zip(spectrum, coefficients):
        samples = samples + a * phase * pair.f
    return replace(saddle, samples=samples, history=None)
