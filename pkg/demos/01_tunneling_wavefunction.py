"""Tunneling through a lumpy, asymmetric barrier: T and the inside wave.

The backward trick: fix the outgoing plane wave on the far side (there is
nothing arbitrary about its amplitude, every observable scales out), then
integrate the stationary equation right-to-left through the barrier.  One
pass yields the wavefunction everywhere inside and, from psi(0) and psi'(0),
the transmission probability.  Both the real and imaginary parts matter:
with only one of them you cannot separate the incident and reflected waves.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from barrierscope import IntegrationSettings, builtin_arbitrary, solve_backward

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

barrier = builtin_arbitrary()
print("barrier: two overlapping humps on [0, %.1f] nm, peak %.2f eV" % (
    barrier.length, max(barrier.evaluate(x) for x in np.linspace(0, barrier.length, 2001))))

print(f"\n{'E (eV)':>8} {'T':>12} {'R':>12} {'T+R':>10}")
for E in (2.0, 4.0, 6.0, 7.5, 9.0):
    sol = solve_backward(barrier, E, IntegrationSettings(steps=2000))
    print(f"{E:>8.2f} {sol.T:>12.6g} {sol.R:>12.6g} {sol.T + sol.R:>10.6f}")

# the wave inside the barrier at one mid-height energy
E_show = 7.5
sol = solve_backward(barrier, E_show,
                     IntegrationSettings(steps=2000, record_trajectory=True))
t = sol.trajectory

fig, (ax_v, ax_w) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
xs_v = np.linspace(0.0, barrier.length, 800)
ax_v.plot(xs_v, barrier.values(xs_v), "k-", lw=1.5)
ax_v.axhline(E_show, color="tab:red", ls="--", lw=1.0, label=f"E = {E_show} eV")
ax_v.set_ylabel("V(x)  (eV)")
ax_v.legend(loc="upper right")
ax_v.set_title(f"T = {sol.T:.4f} at {E_show} eV")

ax_w.plot(t.xs, t.psi.real, "-", label="Re psi")
ax_w.plot(t.xs, t.psi.imag, "--", label="Im psi")
ax_w.set_xlabel("x  (nm)")
ax_w.set_ylabel("psi (transmitted wave = 1)")
ax_w.legend(loc="upper right")

fig.tight_layout()
path = os.path.join(OUT_DIR, "tunneling_wavefunction.png")
fig.savefig(path, dpi=160)
print(f"\nwrote {path}")
