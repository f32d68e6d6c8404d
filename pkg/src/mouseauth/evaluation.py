"""Authentication metrics (F1/AUC/EER/DSR) and the blind-attack protocol.

Scores are probabilities of the legitimate class; a sample is accepted when
its score reaches the decision threshold. Labels use 1 = legitimate,
0 = imposter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import EmptySet, InsufficientData, InsufficientUsers, SingleClass
from .mau import Mau
from . import model as model_mod

LEGIT, IMPOSTER = 1, 0


@dataclass
class ScoredSet:
    scores: np.ndarray
    labels: np.ndarray  # 1 = legitimate, 0 = imposter

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.scores) != len(self.labels):
            raise EmptySet("scores and labels must have equal length")


@dataclass
class EvalReport:
    f1: float
    auc: float
    eer: float
    eer_threshold: float
    counts: dict
    dsr: float | None = None
    dsr_at_eer: float | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "f1": self.f1,
                "auc": self.auc,
                "eer": self.eer,
                "eer_threshold": self.eer_threshold,
                "counts": self.counts,
                "dsr": self.dsr,
                "dsr_at_eer": self.dsr_at_eer,
            }
        )


def _require_both_classes(scored: ScoredSet):
    if len(scored.scores) == 0:
        raise EmptySet("empty score set")
    if len(np.unique(scored.labels)) < 2:
        raise SingleClass("need at least one legitimate and one imposter sample")


def confusion_counts(scored: ScoredSet, threshold: float) -> dict:
    accept = scored.scores >= threshold
    legit = scored.labels == LEGIT
    return {
        "tp": int(np.count_nonzero(accept & legit)),
        "fp": int(np.count_nonzero(accept & ~legit)),
        "tn": int(np.count_nonzero(~accept & ~legit)),
        "fn": int(np.count_nonzero(~accept & legit)),
    }


def f1_score(scored: ScoredSet, threshold: float = 0.5) -> float:
    """Harmonic mean of precision and recall; legitimate is the positive class."""
    if len(scored.scores) == 0:
        raise EmptySet("empty score set")
    c = confusion_counts(scored, threshold)
    tp, fp, fn = c["tp"], c["fp"], c["fn"]
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def roc_auc(scored: ScoredSet) -> float:
    """Mann-Whitney AUC: fraction of (legit, imposter) pairs ranked correctly,
    ties counted half."""
    _require_both_classes(scored)
    legit = scored.labels == LEGIT
    n_pos = int(np.count_nonzero(legit))
    n_neg = len(scored.labels) - n_pos
    ranks = rankdata(scored.scores)  # mean ranks for ties
    rank_sum = ranks[legit].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def eer(scored: ScoredSet) -> tuple[float, float]:
    """Equal error rate and its threshold.

    Sweeps all distinct scores plus {0, 1}; FAR is the imposter accept rate
    and FRR the legitimate reject rate at threshold t (accept iff score >= t).
    Ties on |FAR - FRR| break toward the lower threshold.
    """
    _require_both_classes(scored)
    legit_scores = scored.scores[scored.labels == LEGIT]
    imp_scores = scored.scores[scored.labels == IMPOSTER]
    thresholds = np.unique(np.concatenate([scored.scores, [0.0, 1.0]]))
    best = None
    for t in thresholds:
        far = float(np.count_nonzero(imp_scores >= t)) / len(imp_scores)
        frr = float(np.count_nonzero(legit_scores < t)) / len(legit_scores)
        gap = abs(far - frr)
        if best is None or gap < best[0] - 1e-15:
            best = (gap, (far + frr) / 2.0, float(t))
    return best[1], best[2]


def dsr(attack_scores: np.ndarray, threshold: float = 0.5) -> float:
    """Fraction of attack samples rejected (score below threshold)."""
    attack_scores = np.asarray(attack_scores, dtype=float)
    if len(attack_scores) == 0:
        raise EmptySet("no attack scores")
    return float(np.count_nonzero(attack_scores < threshold)) / len(attack_scores)


# ---------------------------------------------------------------------------
# split construction

@dataclass
class Split:
    """Train/test MAU collections for one legitimate user."""

    legit_user: str
    train_maus: list[Mau] = field(default_factory=list)
    train_labels: list[int] = field(default_factory=list)
    test_maus: list[Mau] = field(default_factory=list)
    test_labels: list[int] = field(default_factory=list)
    unseen_mask: list[bool] = field(default_factory=list)  # aligned with test
    unseen_users: list[str] = field(default_factory=list)

    def train_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return model_mod.batch_from_maus(self.train_maus), np.array(self.train_labels)

    def test_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return model_mod.batch_from_maus(self.test_maus), np.array(self.test_labels)


def build_splits(
    users: dict[str, list[Mau]],
    legit_user: str,
    ratio: float = 5.0,
    unseen_count: int = 1,
    seed: int = 0,
    train_frac: float = 0.7,
) -> Split:
    """Imbalanced train set plus a test set with held-out and unseen users.

    Train: train_frac of the legitimate user's MAUs as positives plus known
    imposters sampled so positives:negatives ~= ratio:1. Test: remaining
    legitimate MAUs, remaining known-imposter MAUs, and every MAU of
    unseen_count users excluded from training entirely.
    """
    if legit_user not in users:
        raise InsufficientUsers(f"unknown legitimate user {legit_user!r}")
    others = sorted(u for u in users if u != legit_user)
    if len(others) < 1 + unseen_count:
        raise InsufficientUsers(
            f"need >= {2 + unseen_count} users, have {len(users)}"
        )
    rng = np.random.default_rng(seed)
    unseen_users = list(rng.choice(others, size=unseen_count, replace=False))
    known = [u for u in others if u not in unseen_users]

    legit_maus = users[legit_user]
    n_train_pos = int(round(train_frac * len(legit_maus)))
    if n_train_pos < 1 or n_train_pos == len(legit_maus):
        raise InsufficientData(f"{legit_user}: too few MAUs to split")
    order = rng.permutation(len(legit_maus))
    train_pos = [legit_maus[i] for i in order[:n_train_pos]]
    test_pos = [legit_maus[i] for i in order[n_train_pos:]]

    imposter_pool = [(u, m) for u in known for m in users[u]]
    n_train_neg = max(1, int(round(n_train_pos / ratio)))
    if len(imposter_pool) <= n_train_neg:
        raise InsufficientData("not enough known-imposter MAUs for the ratio")
    imp_order = rng.permutation(len(imposter_pool))
    train_neg = [imposter_pool[i][1] for i in imp_order[:n_train_neg]]
    test_neg = [imposter_pool[i][1] for i in imp_order[n_train_neg:]]
    unseen_maus = [m for u in unseen_users for m in users[u]]

    split = Split(legit_user=legit_user, unseen_users=unseen_users)
    split.train_maus = train_pos + train_neg
    split.train_labels = [LEGIT] * len(train_pos) + [IMPOSTER] * len(train_neg)
    split.test_maus = test_pos + test_neg + unseen_maus
    split.test_labels = (
        [LEGIT] * len(test_pos) + [IMPOSTER] * (len(test_neg) + len(unseen_maus))
    )
    split.unseen_mask = (
        [False] * (len(test_pos) + len(test_neg)) + [True] * len(unseen_maus)
    )
    return split


def blind_attack_eval(
    params: dict[str, np.ndarray],
    split: Split,
    config: model_mod.ModelConfig,
    threshold: float = 0.5,
) -> EvalReport:
    """Score the test split and bundle all metrics.

    DSR is computed over the unseen-user MAUs only, at the fixed threshold
    and again at the EER threshold.
    """
    X, y = split.test_arrays()
    scores = model_mod.predict_batch(params, X, config)
    scored = ScoredSet(scores=scores, labels=y)
    eer_value, eer_thr = eer(scored)
    unseen_scores = scores[np.asarray(split.unseen_mask, dtype=bool)]
    report = EvalReport(
        f1=f1_score(scored, threshold),
        auc=roc_auc(scored),
        eer=eer_value,
        eer_threshold=eer_thr,
        counts=confusion_counts(scored, threshold),
    )
    if len(unseen_scores):
        report.dsr = dsr(unseen_scores, threshold)
        report.dsr_at_eer = dsr(unseen_scores, eer_thr)
    return report


def roc_curve_csv(scored: ScoredSet) -> str:
    """FAR/TPR pairs over the threshold sweep, as CSV for plotting."""
    _require_both_classes(scored)
    legit_scores = scored.scores[scored.labels == LEGIT]
    imp_scores = scored.scores[scored.labels == IMPOSTER]
    lines = ["far,tpr"]
    for t in np.unique(np.concatenate([scored.scores, [0.0, 1.0]]))[::-1]:
        far = float(np.count_nonzero(imp_scores >= t)) / len(imp_scores)
        tpr = float(np.count_nonzero(legit_scores >= t)) / len(legit_scores)
        lines.append(f"{far!r},{tpr!r}")
    return "\n".join(lines) + "\n"


def aggregate_reports(reports: list[EvalReport]) -> dict:
    """Unweighted per-user mean and sample std of each metric."""
    if not reports:
        raise EmptySet("no reports to aggregate")

    def stats(values):
        arr = np.array([v for v in values if v is not None], dtype=float)
        if len(arr) == 0:
            return None
        return {
            "mean": float(arr.mean()),
            "std": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
        }

    return {
        "f1": stats([r.f1 for r in reports]),
        "auc": stats([r.auc for r in reports]),
        "eer": stats([r.eer for r in reports]),
        "dsr": stats([r.dsr for r in reports]),
    }
