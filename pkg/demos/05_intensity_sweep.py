"""Scanning pulse intensity, with the binned two-path variant alongside.

Low intensity starves the detectors, high intensity floods the cutoff
and multi-photon terms help the adversary, so the certified rate peaks
in between.  The same scan also bins each three-path table down to two
detectors and certifies the reduced instrument on the matching weaker
pulse, which is how a two-path data set is extracted from three-path
hardware.

Writes sweep.csv and sweep.svg next to this script under out/.
"""

from pathlib import Path

from mdiqrng.pipeline import RunConfig, run_sweep

grid = (0.3, 0.7, 1.0, 1.22, 1.5, 1.85)
config = RunConfig(modes=3, cutoff=3, mu_grid=grid, visibility=0.992)

out = Path(__file__).parent / "out"
result = run_sweep(config, workers=2, out=out)

print(f"{'mu':>5}  {'h three-path':>12}    {'mu binned':>9}  {'h two-path':>10}")
for p in result.points:
    print(f"{p.mu:>5}  {p.h_qutrit:>12.4f}    {p.mu_qubit:>9.3f}  {p.h_qubit:>10.4f}")
print()

best = max(result.points, key=lambda p: p.h_qutrit)
print(f"three-path optimum on this grid: {best.h_qutrit:.4f} bits at mu = {best.mu}")
print(f"files written: {', '.join(result.written)}")
print()
print("binning keeps detectors 1 and 2, discards rounds the dropped")
print("detector absorbed, and certifies against pulses at two thirds of")
print("the original intensity, so its curve peaks at a higher source mu.")
