import math

import numpy as np
from scipy.special import stdtr

from ..errors import DegenerateSample


def one_tailed_welch_test(sample_a, sample_b, pooled: bool = False) -> tuple[float, float]:
    """One-tailed two-sample t-test of ``mean(a) < mean(b)``.

    Welch's statistic with Welch-Satterthwaite degrees of freedom by default;
    ``pooled=True`` gives Student's equal-variance test instead.

    Returns
    -------
    (t, p) : tuple of float
        ``p = P(T_df <= t)``, small when ``a`` is convincingly lower.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise DegenerateSample("each sample needs at least two values")
    ma, mb = float(a.mean()), float(b.mean())
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    if pooled:
        df = na + nb - 2
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        se2 = sp2 * (1.0 / na + 1.0 / nb)
    else:
        sa, sb = va / na, vb / nb
        se2 = sa + sb
        df = se2**2 / ((sa**2 / (na - 1) if sa else 0.0) + (sb**2 / (nb - 1) if sb else 0.0)) if se2 else math.nan
    if se2 == 0.0:
        if ma == mb:
            raise DegenerateSample("both samples are constant with equal means")
        t = -math.inf if ma < mb else math.inf
        return t, 0.0 if ma < mb else 1.0
    t = (ma - mb) / math.sqrt(se2)
    p = float(stdtr(df, t))
    return t, min(max(p, 0.0), 1.0)


def standard_error(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return 0.0
    return float(v.std(ddof=1) / math.sqrt(v.size))
