import numpy as np
from scipy import special

from .exceptions import DomainError


def chi2_sf(x, df):
    """Chi-square survival function via the regularized upper incomplete gamma."""
    x = float(x)
    df = int(df)
    if not np.isfinite(x) or x < 0:
        raise DomainError(f"chi2_sf needs a finite x >= 0, got {x}")
    if df < 1:
        raise DomainError(f"df must be a positive integer, got {df}")
    if x == 0.0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))
