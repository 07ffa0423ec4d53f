import numpy as np
from sklearn.utils.validation import check_array

from .panel import ReturnPanel


def check_returns(Y, min_samples=2, min_markets=1):
    """Validate a return matrix; returns ``(array, market_labels)``.

    Accepts a :class:`ReturnPanel`, a DataFrame, or anything ``check_array``
    takes.
    """
    if isinstance(Y, ReturnPanel):
        markets = list(Y.markets)
        Y = Y.returns
    elif hasattr(Y, "columns"):
        markets = [str(c) for c in Y.columns]
    else:
        markets = None
    arr = check_array(Y, dtype=np.float64, ensure_2d=True, ensure_min_samples=min_samples, ensure_min_features=min_markets)
    if markets is None:
        markets = [f"m{i + 1}" for i in range(arr.shape[1])]
    return np.ascontiguousarray(arr), markets
