"""Small statistical helpers shared by the harness and the test suite."""

from __future__ import annotations

from scipy import stats as _st


def clopper_pearson(successes: int, trials: int, alpha: float = 0.05):
    """Exact (Clopper-Pearson) two-sided confidence interval for a binomial rate."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if successes == 0:
        lo = 0.0
    else:
        lo = float(_st.beta.ppf(alpha / 2, successes, trials - successes + 1))
    if successes == trials:
        hi = 1.0
    else:
        hi = float(_st.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi
