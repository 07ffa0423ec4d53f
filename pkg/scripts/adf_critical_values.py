"""Monte-Carlo table of Dickey-Fuller t-statistic quantiles (constant, no trend).

Simulates driftless Gaussian random walks and records the t-ratio of the
lagged level in a regression of the first difference on a constant and the
lagged level. The printed quantiles are the values hard-coded in
``mqcaviar.panel.ADF_CRITICAL_VALUES``.

    python scripts/adf_critical_values.py --walks 100000 --length 2000
"""

import argparse

import numpy as np


def df_tstats(walks):
    x = walks[:, :-1]
    d = np.diff(walks, axis=1)
    m = x.shape[1]
    xc = x - x.mean(axis=1, keepdims=True)
    dc = d - d.mean(axis=1, keepdims=True)
    sxx = np.einsum("ij,ij->i", xc, xc)
    gamma = np.einsum("ij,ij->i", xc, dc) / sxx
    resid = dc - gamma[:, None] * xc
    s2 = np.einsum("ij,ij->i", resid, resid) / (m - 2)
    return gamma / np.sqrt(s2 / sxx)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--walks", type=int, default=100_000)
    parser.add_argument("--length", type=int, default=2000)
    parser.add_argument("--chunk", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    stats = []
    done = 0
    while done < args.walks:
        m = min(args.chunk, args.walks - done)
        walks = np.cumsum(rng.standard_normal((m, args.length)), axis=1)
        stats.append(df_tstats(walks))
        done += m
    stats = np.concatenate(stats)
    for alpha in (0.01, 0.05, 0.10):
        print(f"{alpha:.2f}: {np.quantile(stats, alpha):.4f}")


if __name__ == "__main__":
    main()
