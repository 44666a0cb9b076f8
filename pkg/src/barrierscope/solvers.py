"""Transmission solvers: backward integration, transfer matrix, and WKB.

All three return a ScatteringSolution with the transmission probability

    T = (k_out/k_in) |F/A|^2

for a unit-amplitude transmitted wave (F = 1).  The backward solver reads
the incident and reflected amplitudes off the integrated wavefunction at
x = 0,

    A = (psi(0) + psi'(0)/(i k_in)) / 2,    B = (psi(0) - psi'(0)/(i k_in)) / 2,

so that T = (k_out/k_in) * 4 / |psi(0) - i psi'(0)/k_in|^2 and R = |B/A|^2.
The transfer-matrix solver propagates (psi, psi') exactly through uniform
constant-potential slabs (midpoint-sampled), which is the same 2x2 matrix
composition written in state-vector form.  The WKB solver keeps only the
decaying exponential through the classically forbidden set.
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ClosedChannelError, DivergenceError, DomainError, InvalidIncidenceError
from .integrate import (
    LOW_RESOLUTION_STEPS,
    OVERFLOW_LIMIT,
    IntegrationSettings,
    Trajectory,
    integrate_backward,
)
from .units import ELECTRON, wavevector

BACKWARD = "backward"
TRANSFER_MATRIX = "transfer_matrix"
WKB = "wkb"

CLOSED_CHANNEL = "closed_channel"
LOW_RESOLUTION = "low_resolution"

# slabs with |E - V| below this use the linear (k -> 0) solution
DEGENERATE_SLAB_EV = 1e-12

# default resolutions per solver
DEFAULT_STEPS = 2000
DEFAULT_SLICES = 1000
DEFAULT_QUAD_POINTS = 2001


@dataclass(frozen=True, eq=False)
class ScatteringSolution:
    """One solved scattering problem at energy E."""

    E: float
    T: float
    R: float
    A: Optional[complex]
    B: Optional[complex]
    F: Optional[complex]
    k_in: object
    k_out: object
    trajectory: Optional[Trajectory]
    solver_tag: str
    resolution: int
    flags: tuple = ()

    @property
    def closed_channel(self):
        return CLOSED_CHANNEL in self.flags


def _check_incidence(p, E, units):
    k_in = wavevector(E, p.v_left, units)
    if not k_in.is_propagating or k_in.value == 0.0:
        raise InvalidIncidenceError(
            f"incident wave is not propagating at E={E} eV (entry level {p.v_left} eV)"
        )
    return k_in


def _closed_channel_solution(p, E, units, solver_tag, resolution):
    return ScatteringSolution(
        E=E, T=0.0, R=1.0, A=None, B=None, F=None,
        k_in=wavevector(E, p.v_left, units), k_out=wavevector(E, p.v_right, units),
        trajectory=None, solver_tag=solver_tag, resolution=resolution,
        flags=(CLOSED_CHANNEL,),
    )


def _solution_from_endpoint(p, E, units, psi0, dpsi0, k_in, k_out, trajectory,
                            solver_tag, resolution, flags=()):
    k1 = k_in.value
    k3 = k_out.value
    denom = psi0 - 1j * dpsi0 / k1
    A = 0.5 * denom
    B = 0.5 * (psi0 + 1j * dpsi0 / k1)
    T = (k3 / k1) * 4.0 / abs(denom) ** 2
    R = abs(B / A) ** 2
    return ScatteringSolution(
        E=E, T=T, R=R, A=A, B=B, F=1.0 + 0.0j, k_in=k_in, k_out=k_out,
        trajectory=trajectory, solver_tag=solver_tag, resolution=resolution, flags=flags,
    )


def solve_backward(p, E, settings=None, units=ELECTRON):
    """Transmission by backward integration (the primary method).

    Integrates from the transmitted wave at x = L down to x = 0 and reads
    A, B off psi(0), psi'(0).  E <= v_right is not an error: it returns a
    T = 0 solution flagged ``closed_channel`` so sweeps stay total.
    E <= v_left raises InvalidIncidenceError.
    """
    if settings is None:
        settings = IntegrationSettings()
    k_in = _check_incidence(p, E, units)
    k_out = wavevector(E, p.v_right, units)
    if not k_out.is_propagating or k_out.value == 0.0:
        return _closed_channel_solution(p, E, units, BACKWARD, settings.steps)
    traj = integrate_backward(p, E, settings, units)
    flags = (LOW_RESOLUTION,) if settings.steps < LOW_RESOLUTION_STEPS else ()
    return _solution_from_endpoint(
        p, E, units, complex(traj.psi[0]), complex(traj.dpsi[0]), k_in, k_out,
        traj if settings.record_trajectory else None,
        BACKWARD, settings.steps, flags,
    )


@lru_cache(maxsize=32)
def _slab_potential(p, slices):
    d = p.length / slices
    mids = d * (np.arange(slices) + 0.5)
    return tuple(p.values(mids))


def solve_transfer_matrix(p, E, slices=DEFAULT_SLICES, units=ELECTRON,
                          record_trajectory=False):
    """Transmission via piecewise-constant slabs and 2x2 matrix composition.

    [0, L] is split into ``slices`` uniform slabs with V sampled at slab
    midpoints; (psi, psi') is carried exactly through each slab.  Slabs with
    E equal to the sampled V (within 1e-12 eV) use the linear solution
    psi = a + b x instead of dividing by k = 0.
    """
    if slices < 1:
        raise DomainError("slices must be >= 1")
    k_in = _check_incidence(p, E, units)
    k_out = wavevector(E, p.v_right, units)
    if not k_out.is_propagating or k_out.value == 0.0:
        return _closed_channel_solution(p, E, units, TRANSFER_MATRIX, slices)
    h2m = units.hbar2_over_2m
    d = p.length / slices
    v_mid = _slab_potential(p, slices)
    psi = cmath.exp(1j * k_out.value * p.length)
    dpsi = 1j * k_out.value * psi
    rec = [(p.length, psi, dpsi)] if record_trajectory else None
    try:
        for j in range(slices - 1, -1, -1):
            Vj = v_mid[j]
            if abs(E - Vj) < DEGENERATE_SLAB_EV:
                psi, dpsi = psi - dpsi * d, dpsi
            else:
                k = cmath.sqrt((E - Vj) / h2m + 0j)
                c = cmath.cos(k * d)
                s = cmath.sin(k * d)
                psi, dpsi = psi * c - dpsi * s / k, psi * k * s + dpsi * c
            if abs(psi.real) + abs(psi.imag) > OVERFLOW_LIMIT:
                raise DivergenceError("slab composition overflowed", x=j * d)
            if record_trajectory:
                rec.append((j * d, psi, dpsi))
    except OverflowError:
        raise DivergenceError("slab composition overflowed", x=j * d)
    trajectory = None
    if record_trajectory:
        rec.reverse()
        trajectory = Trajectory(
            np.array([r[0] for r in rec]),
            np.array([r[1] for r in rec]),
            np.array([r[2] for r in rec]),
        )
    return _solution_from_endpoint(
        p, E, units, psi, dpsi, k_in, k_out, trajectory, TRANSFER_MATRIX, slices
    )


def _bisect_crossing(g, lo, hi, iters=100):
    # g(lo) and g(hi) straddle zero; returns the crossing to ~machine width
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        gm = g(mid)
        if (glo > 0.0) == (gm > 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def forbidden_intervals(p, E, samples=129):
    """Classically forbidden subintervals {x in [0, L] : V(x) > E}.

    Located per segment: sign changes of V(x) - E are bracketed on a sample
    grid and pinned down by bisection, so turning points are resolved to
    machine width.  Forbidden islands narrower than the sample spacing can
    be missed.  Returns (x1, x2, form) triples where ``form`` is the owning
    segment's functional form.
    """
    out = []
    for seg in p.segments:
        xs = np.linspace(seg.a, seg.b, samples)
        g = seg.form.values(xs) - E
        crossings = []
        for i in range(len(xs) - 1):
            if (g[i] > 0.0) != (g[i + 1] > 0.0):
                crossings.append(
                    _bisect_crossing(lambda x: seg.form(x) - E, xs[i], xs[i + 1])
                )
        bounds = [seg.a] + crossings + [seg.b]
        inside = g[0] > 0.0
        for lo, hi in zip(bounds, bounds[1:]):
            if inside and hi > lo:
                out.append((lo, hi, seg.form))
            inside = not inside
    return out


def _simpson(ys, h):
    # composite Simpson over an odd number of uniformly spaced samples
    return (h / 3.0) * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-2:2].sum())


def solve_wkb(p, E, quad_points=DEFAULT_QUAD_POINTS, units=ELECTRON):
    """Semiclassical estimate T = exp(-2 integral kappa dx).

    kappa = sqrt((V-E)/(hbar^2/2m)) is integrated by composite Simpson with
    ``quad_points`` samples over each forbidden interval; turning points come
    from per-segment bisection.  No prefactor and no turning-point
    corrections: pure decaying exponential.  An empty forbidden set gives
    T = 1.  R is 1 - T by definition; no amplitude decomposition exists here,
    so A and B are None.
    """
    if quad_points < 3:
        raise DomainError("quad_points must be >= 3")
    k_in = _check_incidence(p, E, units)
    k_out = wavevector(E, p.v_right, units)
    if not k_out.is_propagating or k_out.value == 0.0:
        return _closed_channel_solution(p, E, units, WKB, quad_points)
    npts = quad_points if quad_points % 2 == 1 else quad_points + 1
    h2m = units.hbar2_over_2m
    total = 0.0
    for lo, hi, form in forbidden_intervals(p, E):
        xs = np.linspace(lo, hi, npts)
        kappa = np.sqrt(np.maximum(form.values(xs) - E, 0.0) / h2m)
        total += _simpson(kappa, (hi - lo) / (npts - 1))
    T = math.exp(-2.0 * total) if total > 0.0 else 1.0
    T = min(T, 1.0)
    return ScatteringSolution(
        E=E, T=T, R=1.0 - T, A=None, B=None, F=1.0 + 0.0j,
        k_in=k_in, k_out=k_out, trajectory=None,
        solver_tag=WKB, resolution=quad_points,
    )


_ALIASES = {
    "backward": BACKWARD,
    "tmm": TRANSFER_MATRIX,
    "transfer_matrix": TRANSFER_MATRIX,
    "wkb": WKB,
}


def canonical_tag(solver):
    """Normalize a solver name or alias to its canonical tag."""
    tag = _ALIASES.get(solver)
    if tag is None:
        raise DomainError(f"unknown solver {solver!r}")
    return tag


def solve(p, E, solver=BACKWARD, resolution=None, method="rk4", units=ELECTRON,
          record_trajectory=False):
    """Dispatch to one of the three solvers by tag (aliases: tmm)."""
    tag = canonical_tag(solver)
    if tag == BACKWARD:
        settings = IntegrationSettings(
            method=method,
            steps=resolution if resolution is not None else DEFAULT_STEPS,
            record_trajectory=record_trajectory,
        )
        return solve_backward(p, E, settings, units)
    if tag == TRANSFER_MATRIX:
        return solve_transfer_matrix(
            p, E, resolution if resolution is not None else DEFAULT_SLICES,
            units, record_trajectory,
        )
    return solve_wkb(p, E, resolution if resolution is not None else DEFAULT_QUAD_POINTS, units)
