"""Why resonance energies drift above the harmonic ladder.

At a resonance the wave trapped in the parabolic well looks almost exactly
like the bound eigenstate of the untruncated well; overlaying the two
probability densities (each normalized to unit maximum) makes them nearly
indistinguishable lobe by lobe.  The difference hides at the edges: the
eigenstate decays to zero, but the tunneling wave must match an oscillating
exterior at the truncation points, and the extra bending costs energy.  The
higher the state, the closer its turning points sit to the edges and the
larger the upward shift - visible here as the n = 9 mismatch.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from barrierscope import (
    IntegrationSettings,
    builtin_parabolic,
    compare_to_harmonic,
    density_profile,
    harmonic_omega_from_parabola,
    scan_resonances,
    shoot_eigenstate,
    solve_backward,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

barrier = builtin_parabolic()
hw = harmonic_omega_from_parabola(10.0)

print("locating resonances...")
peaks = scan_resonances(barrier, 0.05, 14.0, coarse_points=1200, resolution=1500)

fig, axes = plt.subplots(2, 1, figsize=(7.0, 6.4), sharex=True)
for ax, n in zip(axes, (5, 9)):
    peak = peaks[n]  # consecutive peaks track consecutive levels
    sol = solve_backward(barrier, peak.E_peak,
                         IntegrationSettings(steps=2000, record_trajectory=True))
    dens = density_profile(sol.trajectory)
    state = shoot_eigenstate(barrier, n)
    inside = (state.xs >= 0.0) & (state.xs <= barrier.length)

    ax.plot(sol.trajectory.xs, dens, "-", lw=1.2,
            label=f"resonant wave at {peak.E_peak:.3f} eV")
    ax.plot(state.xs[inside], state.density[inside], "--", lw=1.2,
            label=f"eigenstate at {state.E:.3f} eV")
    ax.set_ylabel("|psi|^2 / max")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"n = {n}: shift {(peak.E_peak - state.E) / state.E:+.2%}", fontsize=10)
    print(f"n={n}: resonance {peak.E_peak:.4f} eV, eigenstate {state.E:.4f} eV")

axes[-1].set_xlabel("x  (nm)")
fig.tight_layout()
path = os.path.join(OUT_DIR, "eigenfunction_comparison.png")
fig.savefig(path, dpi=160)
print(f"\nwrote {path}")
