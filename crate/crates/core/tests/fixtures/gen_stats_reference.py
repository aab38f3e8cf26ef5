"""Regenerates stats_reference.json with scipy.

Mann-Whitney uses the exact distribution for tie-free samples with a pooled
size of at most 20 and the continuity-corrected normal approximation
otherwise, matching the library's rule.
"""
import json

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)
cases = []
for i in range(50):
    tied = i % 3 == 0
    k = 3 if i % 2 else 2
    groups = []
    for g in range(k):
        n = int(rng.integers(3, 25))
        if tied:
            x = rng.integers(0, 6, n).astype(float) + g * 0.5
        else:
            x = rng.normal(g * 0.4, 1.0, n)
        groups.append([float(v) for v in x])
    kw = stats.kruskal(*groups)
    a, b = groups[0], groups[1]
    pooled = a + b
    exact = len(set(pooled)) == len(pooled) and len(pooled) <= 20
    mw = stats.mannwhitneyu(
        a, b, alternative="two-sided", method="exact" if exact else "asymptotic", use_continuity=True
    )
    u1 = float(mw.statistic)
    cases.append(
        {
            "groups": groups,
            "kw_statistic": float(kw.statistic),
            "kw_p": float(kw.pvalue),
            "mw_u": min(u1, len(a) * len(b) - u1),
            "mw_p": float(mw.pvalue),
            "mw_exact": exact,
        }
    )

with open("stats_reference.json", "w") as f:
    json.dump({"scipy": __import__("scipy").__version__, "cases": cases}, f, indent=1)
