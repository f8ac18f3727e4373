"""Complex classical solutions of the quartic double well.

The action is I[z] = i * integral (1/2 zdot^2 - 1/2 (z^2 - 1)^2) dt. Every
solution with boundary data (xi, xf) is

    z(t) = (k k' / s) sd(eta (t - ti) / s + u_i, k),   s = sqrt((2k^2 - 1)/2),

labelled by an integer pair (n, m) through the boundary relation

    n omega1 + m omega3 = T_eff/2 + (s/2) (sd^-1(s xi / kk') - (-1)^(n+m) sd^-1(s xf / kk')).

Here eta is 1 in real time, -i in imaginary time and -i e^{i phi} on a Wick
ray, and T_eff = eta (tf - ti).
"""

import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate

from . import elliptic
from .errors import (
    ConfigError,
    DivergenceError,
    LabelExcludedError,
    NonConvergenceError,
    NumericalError,
    PoleError,
    QuadratureError,
)

here = os.path.dirname(os.path.realpath(__file__))
sys.path.append(os.path.join(here, "../.."))

import config
from utils.general_utils import report

REAL_TIME = "real"
IMAGINARY_TIME = "imag"
WICK_TIME = "wick"

LATTICE_METHOD = "lattice"
TIME_METHOD = "time"


# DOMAIN TYPES


@dataclass(frozen=True)
class TimeDirection:
    kind: str = REAL_TIME
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in (REAL_TIME, IMAGINARY_TIME, WICK_TIME):
            raise ConfigError(f"Unknown time direction: {self.kind}.")
        if self.kind == WICK_TIME and not 0.0 <= self.phi <= np.pi / 2:
            raise ConfigError(f"Wick angle must lie in [0, pi/2], got {self.phi}.")

    @property
    def eta(self):
        """Factor mapping the real time parameter onto the complex time path."""
        if self.kind == REAL_TIME:
            return 1.0 + 0j
        if self.kind == IMAGINARY_TIME:
            return -1j
        return -1j * np.exp(1j * self.phi)

    @classmethod
    def parse(cls, text):
        """Parse `real`, `imag` or `wick:<phi>`."""
        text = str(text).strip().lower()
        if text in (REAL_TIME, IMAGINARY_TIME):
            return cls(text)
        if text.startswith("wick:"):
            try:
                return cls(WICK_TIME, float(text.split(":", 1)[1]))
            except ValueError:
                raise ConfigError(f"Invalid Wick angle in time spec: {text}.")
        raise ConfigError(f"Invalid time spec: {text}. Use real, imag or wick:<phi>.")

    def __str__(self):
        if self.kind == WICK_TIME:
            return f"{WICK_TIME}:{self.phi!r}"
        return self.kind


@dataclass(frozen=True)
class BoundaryData:
    xi: complex
    xf: complex
    ti: float = 0.0
    tf: float = 1.0
    time: TimeDirection = field(default_factory=TimeDirection)

    def __post_init__(self):
        if not self.tf > self.ti:
            raise ConfigError(f"tf must exceed ti, got ti={self.ti}, tf={self.tf}.")

    @property
    def duration(self):
        return self.tf - self.ti

    @property
    def eta(self):
        return self.time.eta

    @property
    def effective_duration(self):
        return self.eta * self.duration

    def with_duration(self, duration):
        return replace(self, tf=self.ti + duration)

    @classmethod
    def from_duration(cls, xi, xf, T, time=REAL_TIME):
        if not isinstance(time, TimeDirection):
            time = TimeDirection.parse(time)
        if not T > 0:
            raise ConfigError(f"Duration T must be positive, got {T}.")
        return cls(complex(xi), complex(xf), 0.0, float(T), time)


@dataclass(frozen=True, order=True)
class SaddleLabel:
    n: int
    m: int

    def canonical(self):
        n, m = canonicalLabel(self.n, self.m)
        return SaddleLabel(n, m)

    @property
    def parity(self):
        return (-1) ** ((self.n + self.m) % 2)

    def __str__(self):
        return f"({self.n},{self.m})"


@dataclass(frozen=True)
class ComplexAction:
    value: complex
    error: float = 0.0
    segments: tuple = ()

    @property
    def real(self):
        return self.value.real

    @property
    def imag(self):
        return self.value.imag


@dataclass(frozen=True)
class ClassicalSolution:
    """A solved saddle. `modulus` is None for the identically zero solution.

    `representation` is +1 when the label was solved as (n, m) and -1 when it
    was solved as the equivalent (-n, -m) with s -> -s. `conjugated` marks
    the complex-conjugate member of an on-cut pair.
    """

    label: SaddleLabel
    modulus: object
    p: complex
    offset: complex
    bc: BoundaryData
    representation: int = 1
    conjugated: bool = False
    residual: float = 0.0
    iterations: int = 0
    pole_tolerance: float = None

    @property
    def is_zero(self):
        return self.modulus is None

    @property
    def ksq(self):
        return None if self.modulus is None else self.modulus.ksq

    @property
    def amplitude(self):
        m = self.modulus
        return m.k * m.kprime / m.s

    def half_periods(self):
        return elliptic.halfPeriods(self.modulus)

    def functions(self):
        return elliptic.EllipticFunctions(self.modulus, self.pole_tolerance)


@dataclass(frozen=True)
class SaddleClass:
    kind: str
    reI: float
    imI: float
    nSigma: object = None


REAL_SOLUTION = "realSolution"
COMPLEX_SUPPRESSED = "complexSuppressed"
COMPLEX_EXCLUDED = "complexExcluded"
UNDETERMINED = "undetermined"


# LABELS


def inSigma(n, m):
    """True iff [(n, m)] belongs to the label set: (n/g)(m/g) is even."""
    n, m = int(n), int(m)
    g = math.gcd(n, m) if n * m != 0 else 1
    return ((n // g) * (m // g)) % 2 == 0


def canonicalLabel(n, m):
    """Representative of [(n, m)] ~ [(-n, -m)] with n > 0, or n = 0 and m >= 0."""
    if n < 0 or (n == 0 and m < 0):
        return -n, -m
    return n, m


def _as_label(label):
    if isinstance(label, SaddleLabel):
        return label
    return SaddleLabel(int(label[0]), int(label[1]))


# BOUNDARY RELATION


def _boundary_arguments(m, functions, label, bc):
    # (u_i, eps u_f): sd arguments of the two boundary points
    eps = label.parity
    scale = m.s / (m.k * m.kprime)
    u_i = elliptic.invSD(scale * complex(bc.xi), m, functions=functions)
    if complex(bc.xi) == eps * complex(bc.xf):
        return u_i, u_i
    return u_i, eps * elliptic.invSD(scale * complex(bc.xf), m, functions=functions)


def _boundary_shift(m, functions, label, bc):
    # (s/2)(u_i - eps u_f); vanishes identically when xi = eps xf.
    if complex(bc.xi) == label.parity * complex(bc.xf):
        return 0j
    u_i, u_end = _boundary_arguments(m, functions, label, bc)
    return m.s / 2.0 * (u_i - u_end)


def boundaryResidual(m, label, bc):
    """LHS - RHS of the boundary relation; zero exactly at a valid modulus."""
    label = _as_label(label)
    periods = elliptic.halfPeriods(m)
    if m.ksq == 0.5:
        shift = 0j
    else:
        shift = _boundary_shift(m, elliptic.EllipticFunctions(m), label, bc)
    return (
        label.n * periods.omega1
        + label.m * periods.omega3
        - bc.effective_duration / 2.0
        - shift
    )


def _modulus_from_s(s):
    # s = sqrt((2k^2-1)/2); s on the negative imaginary axis is the lower side
    # of the cut, on the positive imaginary axis the upper side.
    # exp(log s) leaves rounding residue on the axes.
    if abs(s.real) <= 1e-14 * abs(s):
        s = complex(0.0, s.imag)
    elif abs(s.imag) <= 1e-14 * abs(s):
        s = complex(s.real, 0.0)
    ksq = 0.5 + s * s
    if s.real == 0.0 and s.imag > 0:
        ksq = complex(ksq.real, 0.0)
        return elliptic.modulus(ksq, elliptic.UPPER_SIDE)
    if s.real == 0.0 or s.imag == 0.0:
        ksq = complex(ksq.real, 0.0)
    return elliptic.modulus(ksq, elliptic.LOWER_SIDE)


# SOLVER


class ModulusSolver:
    """Damped complex Newton on the boundary relation in lam = log s, with
    continuation in the duration from the short-time seed."""

    def __init__(self, label, bc, settings=None, tolerances=None, verbose=False):
        self.label = _as_label(label)
        self.bc = bc
        self.settings = {**config.SOLVER_SETTINGS, **(settings or {})}
        self.tolerances = {**config.TOLERANCES, **(tolerances or {})}
        self.verbose = verbose
        self.K0 = elliptic.completeK(0.5)
        self.trace = []

    # seeds

    def short_time_seed(self, label, effective_duration):
        """Small-s root of c s^2 - (n + i m) K0 s + T_eff/2 = 0."""
        c = complex(self.bc.xi) - label.parity * complex(self.bc.xf)
        w = (label.n + 1j * label.m) * self.K0
        half_t = effective_duration / 2.0
        if label.n == 0 and label.m == 0:
            return complex(np.sqrt(-half_t / c))
        linear_seed = half_t / w
        if c == 0:
            return complex(linear_seed)
        disc = np.sqrt(w * w - 4.0 * c * half_t)
        roots = [(w + disc) / (2.0 * c), (w - disc) / (2.0 * c)]
        return complex(min(roots, key=lambda r: abs(r - linear_seed)))

    # residual in lam = log s

    def residual(self, lam, label, bc):
        s = np.exp(lam)
        m = _modulus_from_s(complex(s))
        if abs(m.s - s) > 1e-8 * max(1.0, abs(s)):
            # s left the principal strip |Im lam| <= pi/2
            raise LabelExcludedError(f"s = {s} is off the principal sheet.")
        return boundaryResidual(m, label, bc)

    def _derivative(self, lam, label, bc):
        h = self.settings["derivative_step"]
        forward = self.residual(lam + h, label, bc)
        backward = self.residual(lam - h, label, bc)
        return (forward - backward) / (2.0 * h)

    def newton(self, lam, label, bc, project=False):
        """Damped Newton from lam. With `project`, Im lam is frozen (on-axis)."""
        tol = self.tolerances["residual"]
        value = self.residual(lam, label, bc)
        for iteration in range(self.settings["max_newton_iterations"]):
            self.trace.append((bc.duration, complex(np.exp(lam)), abs(value)))
            if abs(value) < tol:
                return lam, value, iteration
            slope = self._derivative(lam, label, bc)
            if slope == 0 or not np.isfinite(slope):
                raise NonConvergenceError("Vanishing derivative of the residual.", self.trace)
            step = -value / slope
            if project:
                step = complex(step.real, 0.0)
            damping = 1.0
            while damping >= self.settings["min_damping"]:
                trial = lam + damping * step
                try:
                    trial_value = self.residual(trial, label, bc)
                except (DivergenceError, PoleError, LabelExcludedError):
                    trial_value = None
                if trial_value is not None and abs(trial_value) < abs(value):
                    lam, value = trial, trial_value
                    break
                damping /= 2.0
            else:
                if abs(value) < 1e3 * tol:
                    return lam, value, iteration
                # degenerate interior iterate: perturbation restart
                kick = 1e-3 if project else 1e-3 * np.exp(1j * np.pi / 7)
                lam = lam + kick
                value = self.residual(lam, label, bc)
        if abs(value) < tol:
            return lam, value, self.settings["max_newton_iterations"]
        raise NonConvergenceError(
            f"Newton did not converge for {label} at T = {bc.duration}.", self.trace
        )

    def _on_axis(self, s):
        return s.real == 0.0 or s.imag == 0.0

    def _orient(self, s):
        # Re s < 0 is the same class solved as (-n, -m) with -s.
        if s.real < 0 or (s.real == 0.0 and s.imag > 0):
            return -s, -1
        return s, 1

    def _signed_label(self, representation):
        return SaddleLabel(representation * self.label.n, representation * self.label.m)

    def _attempt(self, lam, label, bc, project):
        if project:
            try:
                return self.newton(lam, label, bc, project=True)
            except NumericalError:
                pass
        return self.newton(lam, label, bc, project=False)

    def continuation(self, T_target):
        """Track the root from the short-time seed out to T_target."""
        T0 = min(self.settings["initial_time"], T_target / 2.0)
        seed = self.short_time_seed(self.label, self.bc.eta * T0)
        s0, representation = self._orient(seed)
        label = self._signed_label(representation)
        project = self._on_axis(s0)
        lam, _, _ = self._attempt(np.log(s0), label, self.bc.with_duration(T0), project)

        times = list(np.geomspace(T0, T_target, self.settings["continuation_steps"] + 1)[1:])
        history = [(np.log(T0), lam)]
        current = T0
        halvings = 0
        while times:
            T_next = times[0]
            if len(history) > 1:
                (x0, l0), (x1, l1) = history[-2], history[-1]
                predicted = l1 + (l1 - l0) * (np.log(T_next) - x1) / (x1 - x0)
            else:
                predicted = lam
            if project:
                predicted = complex(predicted.real, lam.imag)
            try:
                lam_next, _, _ = self._attempt(
                    predicted, label, self.bc.with_duration(T_next), project
                )
            except NumericalError:
                halvings += 1
                if halvings > self.settings["max_step_halvings"]:
                    raise
                times.insert(0, np.sqrt(current * T_next))
                continue
            lam = lam_next
            history.append((np.log(T_next), lam))
            current = times.pop(0)
            halvings = 0
        return lam, label, representation

    def solve(self, seed=None):
        bc = self.bc
        label = self.label
        if label.n == 0 and label.m == 0:
            c = complex(bc.xi) - complex(bc.xf)
            if bc.xi == 0 and bc.xf == 0:
                return zero_solution(bc)
            if c == 0:
                raise LabelExcludedError(
                    f"Label (0,0) has no non-zero solution for xi = xf = {bc.xi}."
                )
        lam = None
        representation = 1
        if seed is not None:
            s_seed, representation = self._orient(complex(np.sqrt(complex(seed) - 0.5)))
            signed = self._signed_label(representation)
            try:
                lam, _, _ = self._attempt(np.log(s_seed), signed, bc, self._on_axis(s_seed))
                label = signed
            except NumericalError:
                report(f"*** Error seeding {self.label} from k^2 = {seed}; continuing in T", self.verbose)
                lam = None
        if lam is None:
            lam, label, representation = self.continuation(bc.duration)
        return self._build(lam, label, representation)

    def _build(self, lam, label, representation):
        s = complex(np.exp(lam))
        m = _modulus_from_s(s)
        residual = abs(boundaryResidual(m, label, self.bc))
        if not residual < 1e3 * self.tolerances["residual"]:
            raise NonConvergenceError(
                f"Residual {residual:.3e} too large for {self.label}.", self.trace
            )
        functions = elliptic.EllipticFunctions(m, self.tolerances["pole"])
        offset = elliptic.invSD(
            m.s * complex(self.bc.xi) / (m.k * m.kprime), m, functions=functions
        )
        solution = ClassicalSolution(
            label=self.label,
            modulus=m,
            p=m.p,
            offset=offset,
            bc=self.bc,
            representation=representation,
            residual=residual,
            iterations=len(self.trace),
            pole_tolerance=self.tolerances["pole"],
        )
        return _break_conjugate_tie(solution, self.tolerances["reality"])


def zero_solution(bc, label=SaddleLabel(0, 0)):
    return ClassicalSolution(label=label, modulus=None, p=1.0 + 0j, offset=0j, bc=bc)


def _break_conjugate_tie(sol, reality_tolerance):
    # On the cut the label admits a complex-conjugate pair when the boundary
    # data are real; keep the member with Im z >= 0 at mid-time.
    bc = sol.bc
    if not sol.modulus.on_cut or bc.time.kind == WICK_TIME:
        return sol
    if complex(bc.xi).imag != 0 or complex(bc.xf).imag != 0:
        return sol
    mid = trajectory(sol, bc.ti + bc.duration / 2.0)
    if mid.imag < -reality_tolerance:
        return replace(sol, conjugated=True, p=np.conj(sol.p))
    return sol


def solveModulus(label, bc, seed=None, settings=None, tolerances=None, verbose=False):
    """Solve the boundary relation for `label`.

    Raises:
        ConfigError: label not in the label set.
        LabelExcludedError: no root on the principal sheet.
        NonConvergenceError: Newton or continuation failed (trace attached).
    """
    label = _as_label(label)
    if not inSigma(label.n, label.m):
        raise ConfigError(f"Label {label} is not in the label set.")
    solver = ModulusSolver(label, bc, settings, tolerances, verbose)
    solution = solver.solve(seed)
    report(f"+++ Solved {label}: k^2 = {solution.ksq}", verbose)
    return solution


# EVALUATION


def _effective_times(sol, t):
    t = np.asarray(t, dtype=float)
    return sol.bc.eta * (t - sol.bc.ti)


def _raw_trajectory(sol, t, functions=None, with_velocity=False):
    m = sol.modulus
    functions = functions or sol.functions()
    u = _effective_times(sol, t) / m.s + sol.offset
    sd, dsd = functions.sd(u, with_derivative=True)
    z = sol.amplitude * sd
    if with_velocity:
        return z, sol.amplitude / m.s * dsd
    return z


def trajectory(sol, t, functions=None):
    """z(t) for real time parameters t in [ti, tf] (array or scalar)."""
    scalar = np.ndim(t) == 0
    if sol.is_zero:
        z = np.zeros(np.shape(t), dtype=complex)
    else:
        z = _raw_trajectory(sol, t, functions)
        if sol.conjugated:
            z = np.conj(z)
    return complex(z) if scalar else z


def velocity(sol, t, functions=None):
    """dz/dt_eff along the complex time path."""
    scalar = np.ndim(t) == 0
    if sol.is_zero:
        w = np.zeros(np.shape(t), dtype=complex)
    else:
        _, w = _raw_trajectory(sol, t, functions, with_velocity=True)
        if sol.conjugated:
            eta = sol.bc.eta
            w = np.conj(eta * w) / eta
    return complex(w) if scalar else w


def sample_times(sol, samples):
    return np.linspace(sol.bc.ti, sol.bc.tf, samples)


def energyResidual(sol, samples=64):
    """max |zdot^2 + (z^2 - 1)^2 - p^2| over sampled times."""
    times = sample_times(sol, samples)
    functions = None if sol.is_zero else sol.functions()
    z = trajectory(sol, times, functions)
    w = velocity(sol, times, functions)
    return float(np.max(np.abs(w**2 + (z**2 - 1.0) ** 2 - sol.p**2)))


def maxImaginaryPart(sol, samples=201):
    return float(np.max(np.abs(np.imag(trajectory(sol, sample_times(sol, samples))))))


def weierstrassTrajectorySquared(sol, t):
    """z(t)^2 = -P(t_eff + s u_i + omega2) + 2/3 on the lattice of the modulus."""
    if sol.is_zero:
        return np.zeros(np.shape(t), dtype=complex)
    m = sol.modulus
    periods = elliptic.halfPeriods(m)
    lattice = elliptic.PeriodLattice((2 * periods.omega1, 2 * periods.omega3))
    argument = _effective_times(sol, t) + m.s * sol.offset + periods.omega2
    value = -elliptic.weierstrassP(argument, lattice) + 2.0 / 3.0
    return np.conj(value) if sol.conjugated else value


def _shoot(rhs, start, stop, initial, times, tolerance):
    if times.size == 0:
        return np.empty(0, dtype=complex)
    result = integrate.solve_ivp(
        rhs,
        (start, stop),
        initial,
        method="DOP853",
        t_eval=times,
        rtol=tolerance,
        atol=tolerance,
    )
    if not result.success:
        raise NonConvergenceError(f"Shooting integration failed: {result.message}")
    return result.y[0]


def shootingTrajectory(sol, times, tolerance=None):
    """Independent integration of the equation of motion.

    Integrates dz/dtau = eta w, dw/dtau = -eta 2 z (z^2 - 1) with DOP853,
    forward from (xi, zdot(ti)) up to mid-time and backward from
    (xf, zdot(tf)) beyond it, so an unstable stretch of the path amplifies
    the local error over half the duration only.
    """
    tolerance = tolerance or config.SOLVER_SETTINGS["shooting_tolerance"]
    times = np.asarray(times, dtype=float)
    bc = sol.bc
    eta = bc.eta
    middle = bc.ti + bc.duration / 2.0

    def rhs(tau, y):
        z, w = y
        return np.array([eta * w, -eta * 2.0 * z * (z * z - 1.0)])

    early = times <= middle
    shot = np.empty(times.shape, dtype=complex)
    forward = np.array([complex(bc.xi), velocity(sol, bc.ti)], dtype=complex)
    shot[early] = _shoot(rhs, bc.ti, middle, forward, times[early], tolerance)
    # solve_ivp wants t_eval ordered along the direction of integration
    late = np.flatnonzero(~early)[::-1]
    backward = np.array([complex(bc.xf), velocity(sol, bc.tf)], dtype=complex)
    shot[late] = _shoot(rhs, bc.tf, middle, backward, times[late], tolerance)
    return shot


def _split(value):
    return np.array([value.real, value.imag])


def _pole_radius(functions):
    if functions.degenerate:
        return 0.0
    return abs(functions.K) + abs(functions.Kp)


def _period_integrals(functions, density, tolerance):
    # The density is even with periods 2K and 2iK', so each period integral
    # is twice the integral over a quarter segment clear of the poles.
    values = []
    for end in (functions.K, 1j * functions.Kp):
        result, error = integrate.quad_vec(
            lambda x: _split(density(x * end) * end),
            0.0,
            1.0,
            epsabs=tolerance,
            epsrel=tolerance,
            limit=config.SOLVER_SETTINGS["quadrature_limit"],
        )
        values.append((2.0 * complex(result[0], result[1]), 2.0 * float(error)))
    return values


def _segment_integral(functions, density, start, stop, tolerance):
    if start == stop:
        return 0j, 0.0, ()
    direction = stop - start
    points = functions.sd_poles_near_segment(start, direction, 1.0, _pole_radius(functions))
    result, error, info = integrate.quad_vec(
        lambda x: _split(density(start + x * direction) * direction),
        0.0,
        1.0,
        epsabs=tolerance,
        epsrel=tolerance,
        points=points or None,
        limit=config.SOLVER_SETTINGS["quadrature_limit"],
        full_output=True,
    )
    segments = tuple(map(tuple, np.asarray(info.intervals)))
    return complex(result[0], result[1]), float(error), segments


def _action_density(sol, functions):
    # p^2/2 - (z^2 - 1)^2 as a function of the sd argument, before any conjugation
    p_squared = sol.modulus.p ** 2
    amplitude_squared = sol.amplitude**2

    def density(u):
        sd = functions.sd(u)
        return p_squared / 2.0 - (amplitude_squared * sd * sd - 1.0) ** 2

    return density


def _time_integral(sol, functions, tolerance):
    # along the time path u = eta tau / s + u_i itself
    stop = sol.offset + sol.bc.eta * sol.bc.duration / sol.modulus.s
    return _segment_integral(functions, _action_density(sol, functions), sol.offset, stop, tolerance)


def _lattice_integral(sol, functions, tolerance):
    # The density has zero residues, so the time path may be deformed to
    # n periods 2K, m periods 2iK' and the segment u_i -> eps u_f, with
    # (n, m) the signed label the boundary relation was solved for.
    density = _action_density(sol, functions)
    signed = SaddleLabel(sol.representation * sol.label.n, sol.representation * sol.label.m)
    u_i, u_end = _boundary_arguments(sol.modulus, functions, signed, sol.bc)
    (period1, error1), (period3, error3) = _period_integrals(functions, density, tolerance)
    remainder, error, segments = _segment_integral(functions, density, u_i, u_end, tolerance)
    value = signed.n * period1 + signed.m * period3 + remainder
    error = abs(signed.n) * error1 + abs(signed.m) * error3 + error
    return value, error, segments


def action(sol, tolerance=None, method=LATTICE_METHOD):
    """Complex action I = i eta * integral_0^T (p^2/2 - (z^2 - 1)^2) dtau.

    In the sd argument u the action is i s times the integral of
    p^2/2 - (A^2 sd^2 - 1)^2. With the default `method` that integral is
    split into whole periods of the lattice plus one segment between the
    boundary arguments; `method=TIME_METHOD` integrates along the time path
    itself with the poles of sd as break points.

    Raises:
        QuadratureError: error estimate above tolerance (segments attached).
    """
    bc = sol.bc
    eta = bc.eta
    if sol.is_zero:
        value = 1j * eta * (0.5 * sol.p**2 - 1.0) * bc.duration
        return ComplexAction(complex(value))
    if method not in (LATTICE_METHOD, TIME_METHOD):
        raise ConfigError(f"Unknown action method: {method}.")
    tolerance = tolerance or config.TOLERANCES["quadrature"]
    functions = sol.functions()
    try:
        if method == LATTICE_METHOD and not functions.degenerate:
            integral, error, segments = _lattice_integral(sol, functions, tolerance)
        else:
            integral, error, segments = _time_integral(sol, functions, tolerance)
    except PoleError as e:
        raise QuadratureError(f"Trajectory of {sol.label} runs into a pole: {e}")
    if error > 1e-6 * max(1.0, abs(integral)):
        raise QuadratureError(
            f"Action quadrature for {sol.label} failed (error {error:.2e}).", segments
        )
    value = 1j * sol.modulus.s * integral
    if sol.conjugated:
        # the conjugate path has the conjugate integrand along the same tau
        value = 1j * eta * np.conj(value / (1j * eta))
    return ComplexAction(
        value=complex(value), error=float(abs(sol.modulus.s) * error), segments=segments
    )


def classify(sol, hbar=1.0, stokes_phase=None, action_value=None, samples=201, tolerances=None):
    """Assign the intersection-number class of a solution.

    Real solutions get n_sigma = 1. Complex real-time solutions with
    Re(e^{i delta} I) > 0 get n_sigma = 0, those with negative real part stay
    undetermined (n_sigma = None).
    """
    if hbar <= 0:
        raise ConfigError(f"hbar must be positive, got {hbar}.")
    tolerances = {**config.TOLERANCES, **(tolerances or {})}
    stokes_phase = config.FLOW_SETTINGS["stokes_phase"] if stokes_phase is None else stokes_phase
    value = action(sol, tolerances["quadrature"]).value if action_value is None else action_value
    if maxImaginaryPart(sol, samples) < tolerances["reality"]:
        return SaddleClass(REAL_SOLUTION, value.real, value.imag, 1)
    if sol.bc.time.kind != REAL_TIME:
        return SaddleClass(UNDETERMINED, value.real, value.imag, None)
    weight = (np.exp(1j * stokes_phase) * value).real / hbar
    if abs(weight) <= tolerances["classification"]:
        return SaddleClass(UNDETERMINED, value.real, value.imag, None)
    if weight > 0:
        return SaddleClass(COMPLEX_EXCLUDED, value.real, value.imag, 0)
    return SaddleClass(COMPLEX_SUPPRESSED, value.real, value.imag, None)


# ENUMERATION


def atlas_labels(n_max, m_max):
    """Canonical labels in the label set with |n| <= n_max, |m| <= m_max."""
    if n_max < 0 or m_max < 0:
        raise ConfigError("nMax and mMax must be non-negative.")
    labels = []
    for n in range(0, n_max + 1):
        for m in range(-m_max, m_max + 1):
            if (n == 0 and m < 0) or not inSigma(n, m):
                continue
            labels.append(SaddleLabel(n, m))
    return sorted(labels)


def _solve_or_fail(label, bc, settings, tolerances):
    try:
        return label, solveModulus(label, bc, settings=settings, tolerances=tolerances), None
    except LabelExcludedError as e:
        return label, None, ("excluded", str(e))
    except NonConvergenceError as e:
        return label, None, ("nonconvergence", str(e))
    except NumericalError as e:
        return label, None, ("numerical", str(e))


def enumerateSaddles(
    bc, nMax, mMax, n_jobs=None, settings=None, tolerances=None, verbose=False
):
    """Solve every canonical label up to (nMax, mMax).

    Returns:
        (solutions, errors): solutions sorted by label; errors maps a failure
        kind to a list of (label, message) pairs.
    """
    labels = atlas_labels(nMax, mMax)
    n_jobs = n_jobs or int(os.getenv("THIMBLE_N_JOBS", config.SOLVER_SETTINGS["n_jobs"]))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_solve_or_fail)(label, bc, settings, tolerances) for label in labels
    )
    solutions = []
    errors = {"excluded": [], "nonconvergence": [], "numerical": []}
    for label, solution, failure in sorted(results, key=lambda r: r[0]):
        if failure is None:
            solutions.append(solution)
        else:
            errors[failure[0]].append((label, failure[1]))
            report(f"*** Error solving {label}: {failure[1]}", verbose)
    report(
        f"+++ Enumeration complete: {len(solutions)} solved, "
        f"{sum(len(v) for v in errors.values())} failed",
        verbose,
    )
    return solutions, errors
