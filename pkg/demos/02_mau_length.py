"""Picking the window length for authentication units.

A MAU (minimum authentication unit) is a short window of consecutive
speed samples fed to the classifier. Too short and it carries no
behavioral signal; too long and authentication gets slow. The rule used
here: compute approximate entropy (ApEn) at a range of candidate
lengths and stop where the ApEn-vs-length curve flattens out.

Run from the repo root:  python3 demos/02_mau_length.py
"""

from mouseauth.mau import apen_profile, segment
from mouseauth.synth import SynthSpec, generate

spec = SynthSpec("ar1", {"phi": 0.9, "sigma": 1.0, "mean": 10.0}, 30000, seed=101)
vel = generate(spec)

profile = apen_profile(vel)

print("length   ApEn      slope to next")
for i, (L, a) in enumerate(zip(profile.candidate_lengths, profile.apen_values)):
    slope = profile.slopes[i] if i < len(profile.slopes) else None
    slope_txt = f"{slope:12.2e}" if slope is not None else "           -"
    marker = "  <- selected" if L == profile.selected_length else ""
    print(f"{L:6d} {a:9.4f} {slope_txt}{marker}")

L = profile.selected_length
windows = segment(vel, L)
print(f"\nselected MAU length: {L} samples")
print(f"the 30000-sample session yields {len(windows)} non-overlapping MAUs")
