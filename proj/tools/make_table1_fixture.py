#!/usr/bin/env python3
"""Writes a synthetic rubric-score file whose per-arm category means, rounded
to two decimals, equal the published Table 1 values, plus a usability survey
whose means equal the published rating and minutes saved.

Scores are integers in [1, 5], one rater per report pair (both arms rated by
the same rater). Terminology and coherence differences are drawn so the
paired t-test is significant at 0.05; the other four are drawn so it is not.
The p-values are properties of this synthetic file, not the study's.
"""

import argparse
import math
import random

PAIRS = 113
RATERS = 24
CATEGORIES = ["overall", "completeness", "neutrality", "objectivity", "terminology", "coherence"]
UNASSISTED = [3.93, 3.73, 4.12, 4.11, 3.97, 3.75]
ASSISTED = [4.06, 3.83, 4.13, 4.12, 4.20, 4.05]
SIGNIFICANT = {"terminology", "coherence"}
T_CRIT = 1.9814  # two-sided 0.05, df = 112


def fit_sum(scores, target_sum, rng):
    """Nudges integer scores within [1, 5] until they sum to target_sum."""
    scores = list(scores)
    while sum(scores) != target_sum:
        i = rng.randrange(len(scores))
        if sum(scores) < target_sum and scores[i] < 5:
            scores[i] += 1
        elif sum(scores) > target_sum and scores[i] > 1:
            scores[i] -= 1
    return scores


def t_stat(diffs):
    n = len(diffs)
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    return mean / math.sqrt(var / n) if var > 0 else math.inf


def category_scores(target_u, target_a, significant, rng):
    su = round(target_u * PAIRS)
    sa = round(target_a * PAIRS)
    while True:
        base = [min(5, max(1, round(rng.gauss(target_u, 0.8)))) for _ in range(PAIRS)]
        u = fit_sum(base, su, rng)
        a = fit_sum([min(5, max(1, x + rng.choice([-1, 0, 0, 1]))) for x in u], sa, rng)
        t = abs(t_stat([y - x for x, y in zip(u, a)]))
        # Keep a margin from the critical value so the verdict is unambiguous.
        if (significant and t > T_CRIT + 0.15) or (not significant and t < T_CRIT - 0.3):
            return u, a


def survey(rng):
    n = 50
    ratings = fit_sum([rng.choice([4, 4, 5, 5, 3]) for _ in range(n)], round(4.46 * n), rng)
    # Minutes in half-minute steps; total 21.93 * 50 = 1096.5.
    halves = [rng.randint(20, 70) for _ in range(n)]
    target = round(21.93 * n * 2)
    while sum(halves) != target:
        i = rng.randrange(n)
        if sum(halves) < target:
            halves[i] += 1
        elif halves[i] > 0:
            halves[i] -= 1
    return ratings, [h / 2 for h in halves]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scores", required=True)
    ap.add_argument("--survey", required=True)
    ap.add_argument("--seed", type=int, default=20240613)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    rows = []
    for cat, tu, ta in zip(CATEGORIES, UNASSISTED, ASSISTED):
        u, a = category_scores(tu, ta, cat in SIGNIFICANT, rng)
        for p in range(PAIRS):
            rater = f"R{p % RATERS + 1:02d}"
            rows.append((f"pair-{p + 1:03d}", "unassisted", rater, cat, u[p]))
            rows.append((f"pair-{p + 1:03d}", "assisted", rater, cat, a[p]))
    with open(args.scores, "w") as f:
        f.write("pair_id,arm,rater_id,category,score\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")

    ratings, minutes = survey(rng)
    with open(args.survey, "w") as f:
        f.write("rating,minutes_saved\n")
        for r, m in zip(ratings, minutes):
            f.write(f"{r},{m}\n")


if __name__ == "__main__":
    main()
