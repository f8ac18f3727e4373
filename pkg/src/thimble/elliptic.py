"""Complex-modulus elliptic integrals and elliptic functions.

Every saddle computation of the double well goes through this module. The
modulus lives on the k^2-plane cut along (-inf, 1/2] and [1, inf); on the cut
the functions take the limit from one side, the lower one (Im k^2 -> 0-) by
default.

Complete integrals use the arithmetic-geometric mean, the Jacobi functions and
the Weierstrass function are evaluated from theta series after reducing the
argument into the fundamental cell of the period lattice.
"""

import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    BranchCutWarning,
    DivergenceError,
    NonConvergenceError,
    PoleError,
)

here = os.path.dirname(os.path.realpath(__file__))
sys.path.append(os.path.join(here, "../.."))

import config

LOWER_SIDE = -1
UPPER_SIDE = 1


@dataclass(frozen=True)
class BranchedModulus:
    """k^2 together with the square roots every formula needs.

    `side` records which limit was taken when `ksq` sits on the cut: -1 for
    Im k^2 -> 0-, +1 for Im k^2 -> 0+, 0 off the cut.
    """

    ksq: complex
    k: complex
    kprime: complex
    s: complex
    side: int = 0

    @property
    def on_cut(self):
        return self.side != 0

    @property
    def p(self):
        return 1.0 / (2.0 * self.s**2)


@dataclass(frozen=True)
class HalfPeriods:
    omega1: complex
    omega3: complex
    omega2: complex
    on_cut: bool = False


@dataclass(frozen=True)
class PeriodLattice:
    generators: tuple

    @property
    def omega1(self):
        return self.generators[0] / 2

    @property
    def omega3(self):
        return self.generators[1] / 2


def _is_on_cut(ksq):
    return ksq.imag == 0.0 and (ksq.real <= 0.5 or ksq.real >= 1.0)


def _side_sqrt(a, side):
    # Square root of a + side*i0 where the infinitesimal part matters.
    a = complex(a)
    if a.imag == 0.0 and a.real < 0.0 and side != 0:
        return side * 1j * np.sqrt(-a.real)
    return complex(np.sqrt(a))


def modulus(ksq, side=LOWER_SIDE):
    """Build a BranchedModulus for k^2.

    Args:
        ksq: the value of k^2.
        side: LOWER_SIDE or UPPER_SIDE, the limit taken when ksq is on the cut.

    Returns:
        BranchedModulus with k, k' = sqrt(1-k^2) and s = sqrt((2k^2-1)/2).
    """
    ksq = complex(ksq)
    if not np.isfinite(ksq):
        raise ValueError(f"Modulus must be finite, got {ksq}.")
    if side not in (LOWER_SIDE, UPPER_SIDE):
        raise ValueError(f"side must be -1 or +1, got {side}.")
    if not _is_on_cut(ksq):
        return BranchedModulus(
            ksq=ksq,
            k=complex(np.sqrt(ksq)),
            kprime=complex(np.sqrt(1.0 - ksq)),
            s=complex(np.sqrt((2.0 * ksq - 1.0) / 2.0)),
            side=0,
        )
    # 1 - k^2 approaches the axis from the opposite side.
    return BranchedModulus(
        ksq=ksq,
        k=_side_sqrt(ksq, side),
        kprime=_side_sqrt(1.0 - ksq, -side),
        s=_side_sqrt((2.0 * ksq - 1.0) / 2.0, side),
        side=side,
    )


def as_modulus(m, side=LOWER_SIDE):
    """Accept either a BranchedModulus or a bare k^2."""
    if isinstance(m, BranchedModulus):
        return m
    return modulus(m, side)


def agm(a, b, max_iterations=64):
    """Arithmetic-geometric mean with the right choice of square root."""
    a = complex(a)
    b = complex(b)
    for _ in range(max_iterations):
        a_next = (a + b) / 2.0
        b_next = complex(np.sqrt(a * b))
        if abs(a_next - b_next) > abs(a_next + b_next):
            b_next = -b_next
        a, b = a_next, b_next
        if abs(a - b) <= 4 * np.finfo(float).eps * abs(a):
            return (a + b) / 2.0
    raise NonConvergenceError(f"AGM did not converge for ({a}, {b}).")


def _complete_from_root(root):
    # K = pi / (2 M(1, root)) with root = k' for K(k) and root = k for K'(k).
    if root == 0:
        raise DivergenceError("Complete elliptic integral diverges at k^2 = 1.")
    return np.pi / (2.0 * agm(1.0, root))


def completeK(ksq, side=LOWER_SIDE):
    """Complete elliptic integral of the first kind K(k), parameter k^2.

    Continuous on the plane cut along [1, inf); for real ksq > 1 the limit
    from `side` is returned with a BranchCutWarning.
    """
    ksq = complex(ksq)
    if ksq == 1.0:
        raise DivergenceError("K(k) has a logarithmic singularity at k^2 = 1.")
    if ksq.imag == 0.0 and ksq.real > 1.0:
        warnings.warn(
            f"k^2 = {ksq.real} lies on the cut [1, inf) of K; using side {side}.",
            BranchCutWarning,
        )
    return _complete_from_root(_side_sqrt(1.0 - ksq, -side))


def complete_pair(m):
    """(K, K') of a branched modulus, K' = K(sqrt(1-k^2)) on the matching side."""
    if m.ksq == 1.0 or m.ksq == 0.0:
        raise DivergenceError(f"Quarter periods degenerate at k^2 = {m.ksq}.")
    return _complete_from_root(m.kprime), _complete_from_root(m.k)


def halfPeriods(m):
    """Half periods omega1 = s K(k), omega3 = i s K(k'), omega2 = omega1 + omega3.

    Both vanish at k^2 = 1/2. With this branch omega3(k) = omega1(k') holds
    in the lower half plane Im k^2 < 0 and with the opposite sign above.
    """
    m = as_modulus(m)
    if m.ksq == 0.5:
        return HalfPeriods(0j, 0j, 0j, on_cut=True)
    K, Kp = complete_pair(m)
    omega1 = m.s * K
    omega3 = 1j * m.s * Kp
    return HalfPeriods(omega1, omega3, omega1 + omega3, on_cut=m.on_cut)


def doubleWellLattice(m):
    periods = halfPeriods(m)
    return PeriodLattice((2 * periods.omega1, 2 * periods.omega3))


def _series_length(tau):
    tol = config.SOLVER_SETTINGS["theta_series_tolerance"]
    im_tau = tau.imag
    if im_tau <= 0:
        raise DivergenceError(f"Degenerate lattice, Im tau = {im_tau}.")
    n_terms = int(np.ceil(np.sqrt(-np.log(tol) / (np.pi * im_tau) + 0.25))) + 1
    return min(max(n_terms, 3), 400)


def theta_functions(v, tau):
    """Jacobi theta functions theta1..theta4 at v for nome exp(i pi tau).

    Each term is exponentiated as a whole so reduced arguments never
    overflow.
    """
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    n_terms = _series_length(tau)
    n = np.arange(n_terms)[:, None]
    half = n + 0.5
    odd = 2 * n + 1
    half_weight = 1j * np.pi * tau * half**2
    plus = np.exp(half_weight + 1j * odd * v)
    minus = np.exp(half_weight - 1j * odd * v)
    sign = (-1.0) ** n
    theta1 = np.sum(sign * (plus - minus) / 1j, axis=0)
    theta2 = np.sum(plus + minus, axis=0)

    n = n[1:]
    weight = 1j * np.pi * tau * n**2
    cos_terms = np.exp(weight + 2j * n * v) + np.exp(weight - 2j * n * v)
    theta3 = 1.0 + np.sum(cos_terms, axis=0)
    theta4 = 1.0 + np.sum((-1.0) ** n * cos_terms, axis=0)
    return theta1, theta2, theta3, theta4


def _reduce(u, K, Kp):
    # u = 2aK + 2b iK' + u_red with u_red in the centred cell.
    tau = 1j * Kp / K
    w = u / (2.0 * K)
    beta = w.imag / tau.imag
    alpha = w.real - beta * tau.real
    a = np.round(alpha)
    b = np.round(beta)
    return u - 2.0 * a * K - 2.0j * b * Kp, a.astype(int), b.astype(int), tau


class EllipticFunctions:
    """Jacobi functions of one modulus with the quarter periods and theta
    constants computed once, for repeated evaluation along trajectories."""

    def __init__(self, m, pole_tolerance=None):
        m = as_modulus(m)
        self.modulus = m
        self.pole_tolerance = pole_tolerance or config.TOLERANCES["pole"]
        self.degenerate = m.ksq in (0.0, 1.0)
        if not self.degenerate:
            self.K, self.Kp = complete_pair(m)
            self.tau = 1j * self.Kp / self.K
            _, z2, z3, z4 = theta_functions(0.0, self.tau)
            self.theta_zero = (complex(z2[0]), complex(z3[0]), complex(z4[0]))

    def sncndn(self, u):
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        if self.modulus.ksq == 0.0:
            result = (np.sin(u), np.cos(u), np.ones_like(u))
        elif self.modulus.ksq == 1.0:
            result = (np.tanh(u), 1.0 / np.cosh(u), 1.0 / np.cosh(u))
        else:
            result = self._theta_quotients(u)
        if scalar:
            return tuple(complex(x[0]) for x in result)
        return result

    def _theta_quotients(self, u):
        u_red, a, b, _ = _reduce(u, self.K, self.Kp)
        t1, t2, t3, t4 = theta_functions(np.pi * u_red / (2.0 * self.K), self.tau)
        z2, z3, z4 = self.theta_zero
        if np.any(np.abs(t4) < self.pole_tolerance * abs(z4)):
            index = int(np.argmin(np.abs(t4)))
            raise PoleError(
                f"u = {u[index]} is a pole of sn, cn, dn.",
                value=np.inf,
                residue_direction=abs(self.modulus.k) / self.modulus.k,
            )
        sn = (z3 / z2) * t1 / t4 * (-1.0) ** a
        cn = (z4 / z2) * t2 / t4 * (-1.0) ** (a + b)
        dn = (z4 / z3) * t3 / t4 * (-1.0) ** b
        return sn, cn, dn

    def sd(self, u, with_derivative=False):
        """sd = sn/dn; optionally also d(sd)/du = cn/dn^2.

        Evaluated as a theta1/theta3 quotient, so the zeros of theta4 (poles
        of sn and dn that cancel in the ratio) are regular points of sd.

        Raises:
            PoleError: when u is within pole tolerance of K + iK' modulo the
                lattice.
        """
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        if self.modulus.ksq == 0.0:
            value, slope = np.sin(u), np.cos(u)
        elif self.modulus.ksq == 1.0:
            value, slope = np.sinh(u), np.cosh(u)
        else:
            u_red, a, b, _ = _reduce(u, self.K, self.Kp)
            t1, t2, t3, t4 = theta_functions(np.pi * u_red / (2.0 * self.K), self.tau)
            z2, z3, z4 = self.theta_zero
            small = np.abs(t3) < self.pole_tolerance * abs(z3)
            if np.any(small):
                index = int(np.argmax(small))
                direction = (-1.0) ** (a[index] + b[index]) * 1j / (self.modulus.k * self.modulus.kprime)
                raise PoleError(
                    f"u = {u[index]} is a pole of sd (theta3 = 0).",
                    value=np.inf,
                    residue_direction=direction / abs(direction),
                )
            scale = (-1.0) ** (a + b) * z3**2 / (z2 * z4)
            value = scale * t1 / t3
            slope = scale * t2 * t4 / t3**2
        if scalar:
            value, slope = complex(value[0]), complex(slope[0])
        if with_derivative:
            return value, slope
        return value

    def sd_poles_near_segment(self, start, direction, length, radius):
        """Parameters t in (0, length) where start + direction*t passes within
        `radius` of a pole K + iK' of sd, modulo the lattice."""
        if self.degenerate:
            return []
        pole = self.K + 1j * self.Kp
        ends = np.array([start, start + direction * length]) - pole
        _, a, b, _ = _reduce(ends, self.K, self.Kp)
        a_range = np.arange(min(a) - 1, max(a) + 2)
        b_range = np.arange(min(b) - 1, max(b) + 2)
        aa, bb = np.meshgrid(a_range, b_range)
        poles = pole + 2.0 * aa.ravel() * self.K + 2.0j * bb.ravel() * self.Kp
        t_star = np.real(np.conj(direction) * (poles - start)) / abs(direction) ** 2
        distance = np.abs(start + direction * t_star - poles)
        keep = (t_star > 0) & (t_star < length) & (distance < radius)
        return sorted(set(np.round(t_star[keep], 12)))


def jacobiSNCNDN(u, m):
    """sn, cn, dn at complex u for the branched modulus m."""
    return EllipticFunctions(m).sncndn(u)


def jacobiSN(u, m):
    return jacobiSNCNDN(u, m)[0]


def jacobiCN(u, m):
    return jacobiSNCNDN(u, m)[1]


def jacobiDN(u, m):
    return jacobiSNCNDN(u, m)[2]


def jacobiSD(u, m, with_derivative=False):
    return EllipticFunctions(m).sd(u, with_derivative=with_derivative)


def invSD(x, m, newton_iterations=4, functions=None):
    """Principal inverse of sd: the straight-line incomplete integral.

    sd^-1(x) = x R_F(1 - k'^2 x^2, 1 + k^2 x^2, 1), polished by Newton steps
    on sd. On the cut the integral is taken just off the axis on the side of
    the modulus before polishing at the exact modulus.
    """
    m = as_modulus(m)
    x = complex(x)
    if x == 0:
        return 0j
    ksq = m.ksq
    if m.on_cut:
        ksq = ksq + m.side * 1j * config.SOLVER_SETTINGS["on_cut_offset"]
    u = x * complex(special.elliprf(1.0 - (1.0 - ksq) * x * x, 1.0 + ksq * x * x, 1.0))
    functions = functions or EllipticFunctions(m)
    for _ in range(newton_iterations):
        sd, dsd = functions.sd(u, with_derivative=True)
        step = (sd - x) / dsd
        u -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(u)):
            break
    if not np.isfinite(u):
        raise NonConvergenceError(f"sd^-1({x}) did not converge for k^2 = {m.ksq}.")
    return complex(u)


def _oriented_half_periods(L):
    omega1 = complex(L.omega1)
    omega3 = complex(L.omega3)
    tau = omega3 / omega1
    if tau.imag == 0:
        raise DivergenceError("Degenerate period lattice: Im(omega3/omega1) = 0.")
    if tau.imag < 0:
        omega3 = -omega3
        tau = -tau
    return omega1, omega3, tau


def latticeInvariants(L):
    """g2, g3 and e1 = P(omega1), e2 = P(omega1+omega3), e3 = P(omega3)."""
    omega1, _, tau = _oriented_half_periods(L)
    _, z2, _, z4 = theta_functions(0.0, tau)
    scale = np.pi**2 / (12.0 * omega1**2)
    t2, t4 = complex(z2[0]) ** 4, complex(z4[0]) ** 4
    e1 = scale * (t2 + 2.0 * t4)
    e2 = scale * (t2 - t4)
    e3 = -scale * (2.0 * t2 + t4)
    g2 = 2.0 * (e1**2 + e2**2 + e3**2)
    g3 = 4.0 * e1 * e2 * e3
    return g2, g3, e1, e2, e3


def weierstrassP(z, L):
    """Weierstrass P for the lattice generated by L.generators.

    Raises:
        PoleError: when z is within pole tolerance of a lattice point.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    omega1, omega3, tau = _oriented_half_periods(L)
    z_red, _, _, _ = _reduce(z, omega1, omega3 / 1j)
    if np.any(np.abs(z_red) < config.TOLERANCES["pole"] * abs(omega1)):
        raise PoleError("Argument is a lattice point of P.", value=np.inf, residue_direction=1.0)
    v = np.pi * z_red / (2.0 * omega1)
    t1, t2, _, _ = theta_functions(v, tau)
    _, z2, z3, z4 = theta_functions(0.0, tau)
    e1 = np.pi**2 / (12.0 * omega1**2) * (z2**4 + 2.0 * z4**4)
    value = e1 + (np.pi * z3 * z4 * t2 / (2.0 * omega1 * t1)) ** 2
    if scalar:
        return complex(value[0])
    return value
