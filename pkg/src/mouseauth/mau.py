"""Mouse Authentication Units: ApEn-driven length selection and segmentation.

Approximate entropy compares how often length-m windows of a speed sequence
stay within a Chebyshev tolerance r of each other against the same count at
length m+1; regular sequences score near zero, irregular ones higher. The
MAU length is the smallest candidate where the entropy-vs-length slope
flattens below a threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .errors import LengthMismatch, OutOfRange, TooShort
from .kinematics import VelocitySequence

SLOPE_THRESHOLD = 1e-4
DEFAULT_R_FACTOR = 0.2
DEFAULT_CAP = 5000
DEFAULT_CANDIDATES = tuple(range(10, 201, 10))


@dataclass(frozen=True)
class Mau:
    """One fixed-length classifier input window."""

    user_id: str
    session_id: str
    start_index: int
    values: np.ndarray


@dataclass
class ApEnProfile:
    candidate_lengths: list[int]
    apen_values: list[float]
    slopes: list[float]
    tolerance_r: float
    selected_length: int
    converged: bool = True

    def to_json(self) -> str:
        return json.dumps(
            {
                "candidate_lengths": self.candidate_lengths,
                "apen_values": self.apen_values,
                "slopes": self.slopes,
                "tolerance_r": self.tolerance_r,
                "selected_length": self.selected_length,
                "converged": self.converged,
            }
        )

    def profile_csv(self) -> str:
        lines = ["length,apen"] + [
            f"{n},{a!r}" for n, a in zip(self.candidate_lengths, self.apen_values)
        ]
        return "\n".join(lines) + "\n"


def chebyshev(a: np.ndarray, b: np.ndarray) -> float:
    """Max absolute coordinate difference between equal-length windows."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"window lengths differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if len(a) else 0.0


def correlation_count(seq: np.ndarray, m: int, p: int, r: float) -> float:
    """Fraction of other windows within Chebyshev tolerance r of window p.

    Windows are 1-based as is conventional for this statistic; the window
    itself is excluded from the numerator but the denominator is the full
    window count n - m + 1.
    """
    seq = np.asarray(seq, dtype=float)
    n = len(seq)
    if m < 1 or r <= 0:
        raise OutOfRange("need m >= 1 and r > 0")
    if n < m + 1:
        raise OutOfRange(f"sequence of length {n} has no window pairs at m={m}")
    n_windows = n - m + 1
    if not 1 <= p <= n_windows:
        raise OutOfRange(f"window index {p} outside 1..{n_windows}")
    windows = np.lib.stride_tricks.sliding_window_view(seq, m)
    d = np.abs(windows - windows[p - 1]).max(axis=1)
    matches = int(np.count_nonzero(d <= r)) - 1  # drop the self-match
    return matches / n_windows


def _match_counts(seq: np.ndarray, m: int, r: float) -> np.ndarray:
    """Self-inclusive match counts per window, via per-diagonal running max.

    For fixed offset d = q - p, Chebyshev distances between windows p and
    p + d are running maxima of |v[t] - v[t+d]| along the diagonal, so each
    diagonal costs O(n) with a moving-maximum filter instead of O(n * m).
    """
    n = len(seq)
    n_windows = n - m + 1
    counts = np.ones(n_windows, dtype=np.int64)  # self-matches
    for d in range(1, n_windows):
        diag = np.abs(seq[: n - d] - seq[d:])
        if len(diag) < m:
            break
        if m == 1:
            dist = diag
        else:
            dist = maximum_filter1d(diag, size=m)[m // 2 : m // 2 + len(diag) - m + 1]
        hits = dist <= r
        n_pairs = len(hits)  # pairs (p, p + d), p = 0..n_windows - d - 1
        counts[:n_pairs] += hits
        counts[d : d + n_pairs] += hits
    return counts


def apen(seq: np.ndarray, m: int, r: float) -> float:
    """Approximate entropy with self-matches included (the standard form,
    which is exactly zero on constant sequences)."""
    seq = np.asarray(seq, dtype=float)
    n = len(seq)
    if m < 1 or r <= 0:
        raise OutOfRange("need m >= 1 and r > 0")
    if n < m + 2:
        raise TooShort(f"apen needs length >= m + 2, got {n} with m={m}")
    phi = []
    for mm in (m, m + 1):
        n_windows = n - mm + 1
        c = _match_counts(seq, mm, r) / n_windows
        # self-inclusion keeps every count >= 1/n_windows, so the log is
        # always defined; the floor is a guard only
        c = np.maximum(c, 1.0 / n_windows)
        phi.append(float(np.mean(np.log(c))))
    return phi[0] - phi[1]


def apen_profile(
    vel: VelocitySequence,
    candidates: tuple[int, ...] | list[int] = DEFAULT_CANDIDATES,
    r_factor: float = DEFAULT_R_FACTOR,
    cap: int = DEFAULT_CAP,
    slope_threshold: float = SLOPE_THRESHOLD,
) -> ApEnProfile:
    """ApEn over candidate MAU lengths plus slope-rule length selection.

    Works on at most `cap` leading samples (ApEn is quadratic in length) with
    tolerance r = r_factor * sample std. Selects the smallest candidate whose
    incoming slope magnitude is at or below the threshold; falls back to the
    largest candidate, flagged, when none qualifies.
    """
    candidates = [int(c) for c in candidates]
    if any(c < 1 for c in candidates) or any(
        b <= a for a, b in zip(candidates, candidates[1:])
    ):
        raise OutOfRange("candidates must be strictly increasing and >= 1")
    if r_factor <= 0:
        raise OutOfRange("r_factor must be positive")
    seq = np.asarray(vel.v, dtype=float)[:cap]
    if len(seq) < max(candidates) + 2:
        raise TooShort(
            f"{vel.session_id}: capped length {len(seq)} < max candidate + 2"
        )
    sigma = float(seq.std(ddof=1))
    r = r_factor * sigma if sigma > 0 else r_factor * 1e-12
    values = [apen(seq, c, r) for c in candidates]
    slopes = [
        (values[k + 1] - values[k]) / (candidates[k + 1] - candidates[k])
        for k in range(len(candidates) - 1)
    ]
    selected = candidates[-1]
    converged = False
    for k, slope in enumerate(slopes):
        if abs(slope) <= slope_threshold:
            selected = candidates[k + 1]
            converged = True
            break
    return ApEnProfile(
        candidate_lengths=candidates,
        apen_values=values,
        slopes=slopes,
        tolerance_r=r,
        selected_length=selected,
        converged=converged,
    )


def segment(vel: VelocitySequence, length: int) -> list[Mau]:
    """Non-overlapping consecutive windows; the trailing remainder is dropped.

    Windows do not overlap so train/test splits built from them cannot leak
    shared samples.
    """
    if length < 1:
        raise OutOfRange("MAU length must be >= 1")
    v = np.asarray(vel.v, dtype=float)
    return [
        Mau(
            user_id=vel.user_id,
            session_id=vel.session_id,
            start_index=start,
            values=v[start : start + length].copy(),
        )
        for start in range(0, len(v) - length + 1, length)
    ]
