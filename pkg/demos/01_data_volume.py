"""How much mouse data is enough?

Generates a long synthetic speed stream, then watches the KL divergence
between the density of the first n samples and the first n+200 samples.
Once adding more data stops moving the estimated distribution, we call
the prefix length the "proper volume" and stop collecting.

Run from the repo root:  python3 demos/01_data_volume.py
"""

import numpy as np

from mouseauth.sufficiency import sufficiency_point
from mouseauth.synth import SynthSpec, generate

spec = SynthSpec("gaussian_iid", {"mean": 10.0, "std": 1.0}, 50000, seed=7)
vel = generate(spec)
print(f"stream: {len(vel.v)} speed samples, mean {vel.v.mean():.2f}")

report = sufficiency_point(vel, step_m=200, eps1=1e-4, eps2=1e-6)

print("\n  n      KL(n+200 || n)")
for n, kl in report.kl_trajectory:
    marker = "  <- converged" if n == report.n_hat else ""
    print(f"  {n:6d} {kl:14.3e}{marker}")
    if n >= report.n_hat:
        break

print(f"\nproper volume n_hat = {report.n_hat} "
      f"({report.n_hat / len(vel.v):.0%} of the stream)")
print("everything after that point adds bookkeeping, not information")
