"""Energy sweeps, resonance hunting, and bound-state comparisons.

The resonance tooling targets structures like the truncated parabolic
barrier, whose transmission curve carries peaks near the eigenenergies
(n + 1/2) hbar*omega of the matching untruncated well.  Peaks are located on
a sweep, refined by golden-section maximization of T(E), and matched to
harmonic levels; a small shooting eigensolver produces the well
eigenfunctions for wavefunction comparisons.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import solvers
from .errors import (
    BracketingError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
)
from .units import ELECTRON

REFINE_TOL_EV = 1e-6
EIGEN_TOL_EV = 1e-8


@dataclass(frozen=True, eq=False)
class TransmissionCurve:
    """Sampled T(E) on a strictly increasing energy grid."""

    energies: np.ndarray
    T: np.ndarray
    solver_tag: str
    resolution: int
    diagnostics: tuple = ()

    def __post_init__(self):
        if len(self.energies) != len(self.T):
            raise DomainError("energies and T must have the same length")
        if len(self.energies) >= 2 and not np.all(np.diff(self.energies) > 0.0):
            raise DomainError("energy grid must be strictly increasing")

    def __len__(self):
        return len(self.energies)


@dataclass(frozen=True)
class ResonancePeak:
    """A refined transmission maximum, optionally matched to a harmonic level."""

    E_peak: float
    T_peak: float
    fwhm: Optional[float]
    n_match: Optional[int] = None
    E_eigen: Optional[float] = None
    deviation: Optional[float] = None


@dataclass(frozen=True, eq=False)
class BoundState:
    """A well eigenstate: index, energy, and its sampled density.

    ``psi`` is scaled so max|psi| = 1 and ``density`` = psi^2 normalized to
    a maximum of one.
    """

    n: int
    E: float
    xs: np.ndarray
    psi: np.ndarray
    density: np.ndarray


def sweep(p, E_min, E_max, n_points, solver=solvers.BACKWARD, resolution=None,
          units=ELECTRON, method="rk4", workers=1):
    """Solve T on a uniform energy grid; one solver call per grid point.

    Closed-channel points (E <= v_right) are recorded as T = 0.  A solver
    divergence at one point does not abort the sweep: the point records
    T = 0 and a diagnostic entry (index, energy, message).  Results are
    assembled in grid order regardless of worker count, so a parallel sweep
    is element-wise identical to a serial one.
    """
    if n_points < 2:
        raise DomainError("a sweep needs at least 2 points")
    if not E_max > E_min:
        raise DomainError("E_max must exceed E_min")
    if E_min <= p.v_left:
        raise DomainError("sweep energies must exceed the entry-side level v_left")
    energies = np.linspace(E_min, E_max, n_points)
    diagnostics = []

    def one(iE):
        i, E = iE
        try:
            return solvers.solve(p, float(E), solver=solver, resolution=resolution,
                                 method=method, units=units).T
        except DivergenceError as exc:
            diagnostics.append((i, float(E), str(exc)))
            return 0.0

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            Ts = list(pool.map(one, enumerate(energies)))
    else:
        Ts = [one(iE) for iE in enumerate(energies)]
    sol_tag = solvers.canonical_tag(solver)
    if resolution is None:
        resolution = {solvers.BACKWARD: solvers.DEFAULT_STEPS,
                      solvers.TRANSFER_MATRIX: solvers.DEFAULT_SLICES,
                      solvers.WKB: solvers.DEFAULT_QUAD_POINTS}[sol_tag]
    return TransmissionCurve(energies, np.array(Ts), sol_tag, resolution,
                             tuple(sorted(diagnostics)))


def _golden_max(f, a, b, tol, max_iters):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1 = f(x1)
    f2 = f(x2)
    for _ in range(max_iters):
        if b - a < tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _half_crossing(energies, T, i_peak, half, direction):
    if not T[i_peak] > half:
        # the grid never reaches half of the refined height: the peak is
        # narrower than the sampling and its width cannot be read off
        return None
    i = i_peak
    while 0 <= i + direction < len(T):
        j = i + direction
        if T[j] < half:
            # linear interpolation between samples j and i
            frac = (half - T[j]) / (T[i] - T[j])
            return energies[j] + frac * (energies[i] - energies[j])
        i = j
    return None


def find_resonances(curve, p=None, refine_iters=60, solver=None, resolution=None,
                    method="rk4", units=ELECTRON):
    """Locate and refine transmission maxima on a sweep curve.

    Local maxima come from a three-point test (plateaus resolve to their
    leftmost point); each is refined by golden-section maximization of T(E)
    with fresh solver calls down to 1e-6 eV, capped at ``refine_iters``
    iterations.  Passing p=None skips refinement and reports the grid maxima
    as-is (useful for curves with no potential behind them).  The FWHM is
    interpolated from the curve at half the refined peak height and is None
    when the grid cannot resolve it.  Matching fields stay None until
    compare_to_harmonic fills them.
    """
    if len(curve) < 3:
        raise DomainError("resonance search needs a curve with at least 3 points")
    solver = solver if solver is not None else curve.solver_tag
    resolution = resolution if resolution is not None else curve.resolution
    E = curve.energies
    T = curve.T

    def T_at(energy):
        return solvers.solve(p, float(energy), solver=solver, resolution=resolution,
                             method=method, units=units).T

    peaks = []
    i = 1
    n = len(T)
    while i < n - 1:
        if not T[i] > T[i - 1]:
            i += 1
            continue
        j = i
        while j + 1 < n and T[j + 1] == T[i]:
            j += 1
        if j == n - 1 or T[j + 1] > T[i]:
            i = j + 1
            continue
        # leftmost point i of a (possibly one-point) plateau maximum
        if p is not None:
            lo = E[i - 1]
            hi = E[min(j + 1, n - 1)]
            E_ref, T_ref = _golden_max(T_at, lo, hi, REFINE_TOL_EV, refine_iters)
            if T_ref < T[i]:
                E_ref, T_ref = float(E[i]), float(T[i])
        else:
            E_ref, T_ref = float(E[i]), float(T[i])
        half = T_ref / 2.0
        left = _half_crossing(E, T, i, half, -1)
        right = _half_crossing(E, T, j, half, +1)
        fwhm = (right - left) if (left is not None and right is not None) else None
        peaks.append(ResonancePeak(E_peak=float(E_ref), T_peak=float(T_ref), fwhm=fwhm))
        i = j + 1
    return peaks


def scan_resonances(p, E_min, E_max, coarse_points=2000, solver=solvers.BACKWARD,
                    resolution=None, units=ELECTRON, method="rk4", workers=1,
                    refine_iters=60, hot_factor=10.0, fine_factor=100,
                    median_window=31, max_fine_points=4001):
    """Two-stage resonance hunt: coarse sweep plus fine scans of hot spots.

    Resonances much narrower than the coarse grid still lift their nearest
    samples orders of magnitude above the local background; any sample
    exceeding ``hot_factor`` times the local median triggers a fine re-sweep
    at ``fine_factor`` times the coarse density around it.  Broad peaks are
    picked up directly on the coarse curve.  Returns refined peaks sorted by
    energy.
    """
    coarse = sweep(p, E_min, E_max, coarse_points, solver=solver,
                   resolution=resolution, units=units, method=method, workers=workers)
    E = coarse.energies
    T = coarse.T
    n = len(T)
    half_w = median_window // 2
    hot = np.zeros(n, dtype=bool)
    for i in range(n):
        lo = max(0, i - half_w)
        window = T[lo: min(n, i + half_w + 1)]
        med = float(np.median(window))
        hot[i] = T[i] > max(hot_factor * med, 1e-15)

    # contiguous hot runs, padded by two coarse samples
    regions = []
    i = 0
    while i < n:
        if hot[i]:
            j = i
            while j + 1 < n and hot[j + 1]:
                j += 1
            lo = max(0, i - 2)
            hi = min(n - 1, j + 2)
            if regions and lo <= regions[-1][1]:
                regions[-1] = (regions[-1][0], hi)
            else:
                regions.append((lo, hi))
            i = j + 1
        else:
            i += 1

    spacing = (E[-1] - E[0]) / (n - 1)
    found = []
    for lo, hi in regions:
        width = E[hi] - E[lo]
        n_fine = min(int(round(width / spacing * fine_factor)) + 1, max_fine_points)
        if n_fine < 5:
            n_fine = 5
        fine = sweep(p, float(E[lo]), float(E[hi]), n_fine, solver=solver,
                     resolution=coarse.resolution, units=units, method=method,
                     workers=workers)
        found.extend(find_resonances(fine, p, refine_iters=refine_iters,
                                     method=method, units=units))
    for peak in find_resonances(coarse, p, refine_iters=refine_iters,
                                method=method, units=units):
        if not any(abs(peak.E_peak - q.E_peak) < spacing for q in found):
            found.append(peak)
    found.sort(key=lambda q: q.E_peak)
    deduped = []
    for peak in found:
        if deduped and abs(peak.E_peak - deduped[-1].E_peak) < spacing:
            if peak.T_peak > deduped[-1].T_peak:
                deduped[-1] = peak
        else:
            deduped.append(peak)
    return deduped


def compare_to_harmonic(peaks, hbar_omega):
    """Match peaks to harmonic levels E_n = (n + 1/2) hbar_omega.

    Peaks are processed in increasing energy and each takes the nearest
    level index not already used (greedy, injective, order preserving);
    deviation is (E_peak - E_n)/E_n.  Returns new ResonancePeak instances.
    """
    if not hbar_omega > 0.0:
        raise DomainError("hbar_omega must be positive")
    matched = []
    last_n = -1
    for peak in sorted(peaks, key=lambda q: q.E_peak):
        raw = int(round(peak.E_peak / hbar_omega - 0.5))
        n = max(raw, last_n + 1, 0)
        E_n = (n + 0.5) * hbar_omega
        matched.append(replace(peak, n_match=n, E_eigen=E_n,
                               deviation=(peak.E_peak - E_n) / E_n))
        last_n = n
    return matched


def harmonic_omega_from_parabola(curvature, units=ELECTRON):
    """hbar*omega (eV) for the well V = curvature (x - x0)^2.

    From m omega^2 / 2 = curvature: hbar*omega = sqrt(4 curvature hbar^2/2m).
    """
    if not curvature > 0.0:
        raise DomainError("curvature must be positive")
    return 2.0 * math.sqrt(curvature * units.hbar2_over_2m)


def default_bracket(n, hbar_omega):
    """Energy bracket (n + 1/2 -+ 0.4) hbar_omega around the n-th level."""
    center = (n + 0.5) * hbar_omega
    return (center - 0.4 * hbar_omega, center + 0.4 * hbar_omega)


def _extended_well(p):
    # segment forms continued past [0, L]: the outermost forms extend outward
    segs = p.segments
    def well(x):
        for s in segs[:-1]:
            if x < s.b:
                return s.form(x)
        return segs[-1].form(x)
    return well


def _forward_rk4(fs_nodes, fs_mids, h, u, v, keep):
    out = [u] if keep else None
    for i in range(len(fs_mids)):
        fa = fs_nodes[i]
        fm = fs_mids[i]
        fb = fs_nodes[i + 1]
        k1u = v
        k1v = fa * u
        k2u = v + (h / 2.0) * k1v
        k2v = fm * (u + (h / 2.0) * k1u)
        k3u = v + (h / 2.0) * k2v
        k3v = fm * (u + (h / 2.0) * k2u)
        k4u = v + h * k3v
        k4v = fb * (u + h * k3u)
        u = u + (h / 6.0) * (k1u + 2.0 * (k2u + k3u) + k4u)
        v = v + (h / 6.0) * (k1v + 2.0 * (k2v + k3v) + k4v)
        if keep:
            out.append(u)
    return u, out


def shoot_eigenstate(p, n, E_bracket=None, units=ELECTRON, grid_points=4000):
    """Eigenstate of the untruncated well underlying a parabolic barrier.

    The potential's segment forms are continued past [0, L] (so the Eq-style
    truncated parabola becomes the full harmonic well), and the n-th
    eigenvalue is found by bisection on the shooting mismatch: integrate
    from the deep left tail with decaying initial data and read psi at the
    right edge, whose sign flips across the eigenvalue.  The default bracket
    comes from the harmonic spectrum of the well's vertex curvature.  The
    integration half-width grows with n so the tails stay negligible at the
    1e-8 eV bisection tolerance.
    """
    if n < 0:
        raise DomainError("state index must be nonnegative")
    well = _extended_well(p)
    xs_probe = np.linspace(0.0, p.length, 1001)
    probe_vals = [well(x) for x in xs_probe]
    i0 = int(np.argmin(probe_vals))
    lo = xs_probe[max(i0 - 1, 0)]
    hi = xs_probe[min(i0 + 1, len(xs_probe) - 1)]
    x0, _ = _golden_max(lambda x: -well(x), lo, hi, 1e-12, 200)
    d = 1e-3 * p.length
    rise_r = well(x0 + d) - well(x0)
    rise_l = well(x0 - d) - well(x0)
    # a parabolic vertex rises on both sides, symmetrically; flat bottoms and
    # discontinuity edges do not
    if (rise_r <= 0.0 or rise_l <= 0.0
            or abs(rise_r - rise_l) > 0.5 * (rise_r + rise_l)):
        raise DomainError("the potential has no parabolic well at its minimum")
    curvature = (rise_r + rise_l) / (2.0 * d * d)
    hw = harmonic_omega_from_parabola(curvature, units)
    sigma = math.sqrt(2.0 * units.hbar2_over_2m / hw)
    if E_bracket is None:
        E_bracket = default_bracket(n, hw)
    half_width = max(4.0, math.sqrt(2.0 * n + 1.0) + 3.0) * sigma
    xl = x0 - half_width
    xr = x0 + half_width
    h = (xr - xl) / grid_points
    v_nodes = [well(xl + i * h) for i in range(grid_points + 1)]
    v_mids = [well(xl + (i + 0.5) * h) for i in range(grid_points)]
    h2m = units.hbar2_over_2m
    v_floor = well(x0)

    def mismatch(E, keep=False):
        fs_nodes = [(V - E) / h2m for V in v_nodes]
        fs_mids = [(V - E) / h2m for V in v_mids]
        kappa = math.sqrt(max(v_nodes[0] - E, 0.0) / h2m)
        u0 = 1e-20
        return _forward_rk4(fs_nodes, fs_mids, h, u0, kappa * u0, keep)

    a, b = E_bracket
    if not (a < b and a > v_floor):
        raise DomainError(f"bad energy bracket {E_bracket!r}")
    fa, _ = mismatch(a)
    fb, _ = mismatch(b)
    if (fa > 0.0) == (fb > 0.0):
        raise BracketingError(
            f"no shooting sign change in bracket ({a:.6g}, {b:.6g}) eV for n={n}"
        )
    while b - a > EIGEN_TOL_EV:
        mid = 0.5 * (a + b)
        fm, _ = mismatch(mid)
        if (fa > 0.0) == (fm > 0.0):
            a, fa = mid, fm
        else:
            b = mid
    E_star = 0.5 * (a + b)
    _, samples = mismatch(E_star, keep=True)
    psi = np.array(samples)
    peak = np.max(np.abs(psi))
    if peak == 0.0:
        raise DegenerateInputError("shooting produced an identically zero state")
    psi = psi / peak
    xs = xl + h * np.arange(grid_points + 1)
    return BoundState(n=n, E=float(E_star), xs=xs, psi=psi, density=psi**2)


def density_profile(trajectory):
    """|psi|^2 over the trajectory grid, normalized to a maximum of one."""
    if len(trajectory) == 0:
        raise DegenerateInputError("empty trajectory")
    dens = np.abs(trajectory.psi) ** 2
    peak = float(dens.max())
    if peak == 0.0:
        raise DegenerateInputError("trajectory wave is identically zero")
    return dens / peak


def density_peak_positions(xs, density):
    """Positions of interior local maxima of a sampled density."""
    idx = [i for i in range(1, len(density) - 1)
           if density[i] > density[i - 1] and density[i] > density[i + 1]]
    return np.asarray(xs)[idx]
