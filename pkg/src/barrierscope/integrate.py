"""Backward integration of the stationary wave equation across the barrier.

Starting from the transmitted plane wave at x = L (unit amplitude), the
complex second-order equation

    psi''(x) = (V(x) - E) / (hbar^2/2m) * psi(x)

is integrated down to x = 0 on a uniform grid of ``steps`` intervals.  Both
the real and imaginary parts are carried; a single pass yields psi and psi'
everywhere in the barrier.  Two steppers are provided: classic fourth-order
Runge-Kutta on the (psi, psi') system, and the Numerov three-term recurrence
on psi alone (valid because the equation has no first-derivative term), with
psi'(0) reconstructed by a one-sided fourth-order finite difference.
"""

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ClosedChannelError, DivergenceError, DomainError
from .units import ELECTRON, wavevector

RK4 = "rk4"
NUMEROV = "numerov"

# abort once |psi| passes this: deep under a tall barrier the backward
# solution grows exponentially and can exhaust double precision
OVERFLOW_LIMIT = 1e150

# settings.steps below this get a low_resolution flag in solver results
LOW_RESOLUTION_STEPS = 5


@dataclass(frozen=True)
class IntegrationSettings:
    """Stepper selection for the backward integration."""

    method: str = RK4
    steps: int = 2000
    record_trajectory: bool = False

    def __post_init__(self):
        if self.method not in (RK4, NUMEROV):
            raise DomainError(f"unknown integration method {self.method!r}")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled psi and psi' on the ascending grid spanning [0, L] exactly."""

    xs: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray

    def wronskian(self):
        """Im(psi* psi') at each sample; constant for real potentials."""
        return np.imag(np.conj(self.psi) * self.dpsi)

    def __len__(self):
        return len(self.xs)


@lru_cache(maxsize=32)
def _node_potential(p, steps):
    # integration-order (descending) node positions and V values
    h = p.length / steps
    xs = p.length - h * np.arange(steps + 1)
    xs[-1] = 0.0
    return tuple(xs), tuple(p.values(np.clip(xs, 0.0, p.length)))


@lru_cache(maxsize=32)
def _mid_potential(p, steps):
    h = p.length / steps
    xs = p.length - h * (np.arange(steps) + 0.5)
    return tuple(p.values(xs))


def initial_conditions(p, E, units=ELECTRON):
    """Transmitted-wave initial data at x = L with unit amplitude.

    psi(L) = exp(i k_out L) and psi'(L) = i k_out psi(L), where k_out is the
    exit-side wavevector.  Requires a propagating exit wave (E > v_right).
    """
    k_out = wavevector(E, p.v_right, units)
    if not k_out.is_propagating or k_out.value == 0.0:
        raise ClosedChannelError(
            f"no propagating transmitted wave at E={E} eV (exit level {p.v_right} eV)"
        )
    psi = cmath.exp(1j * k_out.value * p.length)
    return psi, 1j * k_out.value * psi


def _rk4_pass(f_nodes, f_mids, h, u, v, record, x0):
    """March (psi, psi') backward over the precomputed stage values."""
    steps = len(f_mids)
    psis = [u] if record else None
    dpsis = [v] if record else None
    half = h / 2.0
    sixth = h / 6.0
    for n in range(steps):
        fa = f_nodes[n]
        fm = f_mids[n]
        fb = f_nodes[n + 1]
        k1u = v
        k1v = fa * u
        k2u = v + half * k1v
        k2v = fm * (u + half * k1u)
        k3u = v + half * k2v
        k3v = fm * (u + half * k2u)
        k4u = v + h * k3v
        k4v = fb * (u + h * k3u)
        u = u + sixth * (k1u + 2.0 * (k2u + k3u) + k4u)
        v = v + sixth * (k1v + 2.0 * (k2v + k3v) + k4v)
        if abs(u.real) + abs(u.imag) > OVERFLOW_LIMIT:
            raise DivergenceError(
                "wavefunction magnitude exceeded overflow guard", x=x0 + (n + 1) * h
            )
        if record:
            psis.append(u)
            dpsis.append(v)
    return u, v, psis, dpsis


def _rk4_seed(p, E, units, x_start, h_total, substeps, u, v):
    # a few RK4 substeps across one interval; local error well under h^5
    hh = h_total / substeps
    h2m = units.hbar2_over_2m
    for m in range(substeps):
        xa = x_start + m * hh
        fa = (p.evaluate(xa) - E) / h2m
        fm = (p.evaluate(max(xa + hh / 2.0, 0.0)) - E) / h2m
        fb = (p.evaluate(max(xa + hh, 0.0)) - E) / h2m
        k1u = v
        k1v = fa * u
        k2u = v + (hh / 2.0) * k1v
        k2v = fm * (u + (hh / 2.0) * k1u)
        k3u = v + (hh / 2.0) * k2v
        k3v = fm * (u + (hh / 2.0) * k2u)
        k4u = v + hh * k3v
        k4v = fb * (u + hh * k3u)
        u = u + (hh / 6.0) * (k1u + 2.0 * (k2u + k3u) + k4u)
        v = v + (hh / 6.0) * (k1v + 2.0 * (k2v + k3v) + k4v)
    return u, v


def _numerov_pass(p, E, units, steps, u0, v0):
    """Three-term recurrence on psi; returns the full descending psi list."""
    h = p.length / steps
    _, v_nodes = _node_potential(p, steps)
    h2m = units.hbar2_over_2m
    f = [(V - E) / h2m for V in v_nodes]
    psis = [0j] * (steps + 1)
    psis[0] = u0
    u1, v1 = _rk4_seed(p, E, units, p.length, -h, 4, u0, v0)
    psis[1] = u1
    if steps == 1:
        return psis, v1
    h2 = h * h
    c_mid = [1.0 + 5.0 * h2 * fj / 12.0 for fj in f]
    c_out = [1.0 - h2 * fj / 12.0 for fj in f]
    for j in range(1, steps):
        nxt = (2.0 * psis[j] * c_mid[j] - psis[j - 1] * c_out[j - 1]) / c_out[j + 1]
        if abs(nxt.real) + abs(nxt.imag) > OVERFLOW_LIMIT:
            raise DivergenceError(
                "wavefunction magnitude exceeded overflow guard", x=p.length - (j + 1) * h
            )
        psis[j + 1] = nxt
    return psis, None


def _numerov_dpsi(psi_asc, f_asc, h, v_at_zero, dpsi_L):
    """Reconstruct psi' on the ascending grid from Numerov psi samples."""
    n = len(psi_asc)
    dp = np.empty(n, dtype=complex)
    dp[-1] = dpsi_L
    if n >= 3:
        # fourth-order central formula with the psi''' correction written
        # through f psi (= psi'')
        dp[1:-1] = (psi_asc[2:] - psi_asc[:-2]) / (2.0 * h) - (h / 12.0) * (
            f_asc[2:] * psi_asc[2:] - f_asc[:-2] * psi_asc[:-2]
        )
    if n >= 5:
        dp[0] = (
            -25.0 * psi_asc[0] + 48.0 * psi_asc[1] - 36.0 * psi_asc[2]
            + 16.0 * psi_asc[3] - 3.0 * psi_asc[4]
        ) / (12.0 * h)
    elif n == 4:
        dp[0] = (-11.0 * psi_asc[0] + 18.0 * psi_asc[1] - 9.0 * psi_asc[2] + 2.0 * psi_asc[3]) / (6.0 * h)
    elif n == 3:
        dp[0] = (-3.0 * psi_asc[0] + 4.0 * psi_asc[1] - psi_asc[2]) / (2.0 * h)
    else:
        dp[0] = v_at_zero
    return dp


def propagate_backward(p, E, settings, units, psi_L, dpsi_L):
    """Integrate backward from arbitrary initial data at x = L.

    The equation is linear, so scaling (psi_L, dpsi_L) by a complex constant
    scales the whole trajectory by the same constant.  Most callers want
    integrate_backward, which fixes the transmitted-wave initial data.
    """
    steps = settings.steps
    h = -p.length / steps
    h2m = units.hbar2_over_2m
    nodes, v_nodes = _node_potential(p, steps)

    if settings.method == RK4:
        f_nodes = [(V - E) / h2m for V in v_nodes]
        f_mids = [(V - E) / h2m for V in _mid_potential(p, steps)]
        u, v, psis, dpsis = _rk4_pass(
            f_nodes, f_mids, h, psi_L, dpsi_L, settings.record_trajectory, p.length
        )
        if settings.record_trajectory:
            xs = np.array(nodes[::-1])
            return Trajectory(xs, np.array(psis[::-1]), np.array(dpsis[::-1]))
        xs = np.array([0.0, p.length])
        return Trajectory(xs, np.array([u, psi_L]), np.array([v, dpsi_L]))

    psis_desc, v_seed = _numerov_pass(p, E, units, steps, psi_L, dpsi_L)
    psi_asc = np.array(psis_desc[::-1])
    f_asc = np.array([(V - E) / h2m for V in v_nodes[::-1]])
    dp = _numerov_dpsi(psi_asc, f_asc, p.length / steps, v_seed, dpsi_L)
    if settings.record_trajectory:
        return Trajectory(np.array(nodes[::-1]), psi_asc, dp)
    xs = np.array([0.0, p.length])
    return Trajectory(xs, np.array([psi_asc[0], psi_L]), np.array([dp[0], dpsi_L]))


def integrate_backward(p, E, settings=None, units=ELECTRON):
    """Backward integration with transmitted-wave initial data (F = 1).

    Returns a Trajectory spanning [0, L]; with record_trajectory=False only
    the two endpoint samples are stored.  Raises ClosedChannelError when
    E <= v_right and DivergenceError if the state overflows.
    """
    if settings is None:
        settings = IntegrationSettings()
    psi_L, dpsi_L = initial_conditions(p, E, units)
    return propagate_backward(p, E, settings, units, psi_L, dpsi_L)
