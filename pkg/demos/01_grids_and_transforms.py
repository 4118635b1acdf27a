"""Frame geometry and the unitary transform pair.

Walks the resource grids end to end: physical frame parameters, the
lattice transform between the delay-Doppler and time-frequency views,
and the slot modulator that turns grids into samples.  Everything here
is exact linear algebra — the printed residuals are all at machine
precision.
"""

import numpy as np

import otfsim as ot
from otfsim.transforms import ambiguity, basis_waveform, heisenberg, isfft, sfft, wigner


def rule(title):
    print(f"\n--- {title} " + "-" * max(0, 60 - len(title)))


rng = np.random.default_rng(7)

rule("frame parameters")
params = ot.make_frame(M=32, N=16, delta_f=15e3)
print(f"grid: {params.M} subcarriers x {params.N} slots ({params.dof} symbols)")
print(f"slot duration T = {params.T * 1e6:.2f} us, bandwidth = {params.bandwidth / 1e3:.0f} kHz")
print(f"frame duration  = {params.block_duration * 1e3:.3f} ms")
print(f"delay resolution   = {params.delay_resolution * 1e9:.1f} ns (1/bandwidth)")
print(f"doppler resolution = {params.doppler_resolution:.1f} Hz (1/frame duration)")

rule("lattice transform is unitary")
x_dd = rng.normal(size=(params.N, params.M)) + 1j * rng.normal(size=(params.N, params.M))
X_tf = isfft(x_dd)
print(f"delay-Doppler grid {x_dd.shape} -> time-frequency grid {X_tf.shape}")
print(f"energy in  = {np.linalg.norm(x_dd) ** 2:.6f}")
print(f"energy out = {np.linalg.norm(X_tf) ** 2:.6f}")
print(f"round-trip |sfft(isfft(x)) - x| = {np.abs(sfft(X_tf) - x_dd).max():.2e}")

# one delay-Doppler impulse spreads over the whole time-frequency plane
imp = np.zeros_like(x_dd)
imp[2, 5] = 1.0
spread = isfft(imp)
print(
    f"a single delay-Doppler symbol occupies all {spread.size} TF cells, "
    f"|cell| = {np.abs(spread[0, 0]):.4f} = 1/sqrt(MN) = {1 / np.sqrt(params.M * params.N):.4f}"
)

rule("slot modulator and its inverse")
for cp in (0, 8):
    sig = heisenberg(X_tf, params, cp_len=cp)
    back = wigner(sig, params)
    print(
        f"cp_len={cp}: {sig.samples.size} samples "
        f"({params.N} slots x {params.M + cp}), demod residual {np.abs(back - X_tf).max():.2e}"
    )

rule("basis pulses")
b = basis_waveform(m=3, n=1, params=params)
slot = b.samples[params.M : 2 * params.M]
print(f"pulse (m=3, n=1): unit energy = {np.linalg.norm(b.samples) ** 2:.6f}")
print(f"constant envelope inside its slot: |s| = {np.abs(slot[0]):.6f} everywhere "
      f"(spread {np.ptp(np.abs(slot)):.2e})")
print(f"silent outside its slot: {np.abs(b.samples[: params.M]).max():.2e}")

rule("rectangular-pulse ambiguity at lattice offsets")
print("A(delay samples, Doppler bins); the ideal pulse pair would be 1 at the")
print("origin and 0 elsewhere — the rectangular pair leaks along delay:")
for l, k in [(0, 0), (0, 1), (0, 3), (1, 0), (1, 1), (4, 2)]:
    a = ambiguity(l, k, params)
    print(f"  A({l:2d}, {k:2d}) = {a.real:+.4f} {a.imag:+.4f}j   |A| = {abs(a):.4f}")
