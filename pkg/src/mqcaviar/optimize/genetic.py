"""Binary-chromosome genetic algorithm."""

import time
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..exceptions import ShapeError, ValidationError
from ..model import CaviarParams, _returns, n_params, resolve_q0
from .trace import Trace

__all__ = ["GaConfig", "decode_chromosome", "decode_population", "ga_minimize", "ga_optimize"]


@dataclass(frozen=True)
class GaConfig:
    """GA settings.

    ``lo`` and ``hi`` are scalars or per-parameter sequences bounding the
    search box. ``mutation_rate=None`` means one expected flip per
    chromosome.
    """

    population: int = 500
    generations: int = 1000
    bits: int = 16
    lo: float = -3.0
    hi: float = 3.0
    crossover_rate: float = 0.9
    mutation_rate: float = None
    elite: int = 2
    seed: int = 0

    def __post_init__(self):
        if int(self.population) < 2:
            raise ValidationError("population must be >= 2")
        if int(self.generations) < 0:
            raise ValidationError("generations must be >= 0")
        if not 2 <= int(self.bits) <= 32:
            raise ValidationError("bits per parameter must lie in [2, 32]")
        if np.any(np.asarray(self.lo, dtype=float) >= np.asarray(self.hi, dtype=float)):
            raise ValidationError("lo must be < hi")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValidationError("crossover_rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValidationError("mutation_rate must lie in [0, 1]")
        if not 0 <= int(self.elite) <= int(self.population):
            raise ValidationError("elite count must lie in [0, population]")

    def bounds(self, p):
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (p,)).copy()
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (p,)).copy()
        return lo, hi


def decode_population(genomes, cfg, p):
    """Map a (P, bits * p) 0/1 array to (P, p) parameter vectors.

    Fields are read most-significant bit first.
    """
    genomes = np.asarray(genomes, dtype=np.uint8)
    if genomes.ndim == 1:
        genomes = genomes[None, :]
    bits = int(cfg.bits)
    if genomes.shape[1] != bits * p:
        raise ShapeError(f"chromosome length {genomes.shape[1]} != {bits} x {p}")
    powers = 2.0 ** np.arange(bits - 1, -1, -1)
    v = genomes.reshape(genomes.shape[0], p, bits) @ powers
    lo, hi = cfg.bounds(p)
    return lo + v / (2.0**bits - 1.0) * (hi - lo)


def decode_chromosome(bits, cfg, n, k=0.01):
    """Decode one chromosome (string of '0'/'1' or 0/1 array) into parameters for n markets."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValidationError("chromosome string may contain only '0' and '1'")
        bits = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    return CaviarParams.from_vector(k, decode_population(bits, cfg, n_params(n))[0], n)


def _tournament(fitness, rng, m):
    a = rng.integers(0, fitness.size, size=m)
    b = rng.integers(0, fitness.size, size=m)
    return np.where(fitness[b] < fitness[a], b, a)


def ga_minimize(fitness_fn, p, cfg=GaConfig(), record_time=True, callback=None):
    """Minimize ``fitness_fn`` over the decoded box.

    ``fitness_fn`` maps a (P, p) array to P fitness values; non-finite
    values are treated as +inf. Returns ``(best_theta, best_fitness, trace)``
    where the trace holds the best-ever and mean finite fitness per
    generation (generation 0 is the initial population). ``callback``, if
    given, is called as ``callback(generation, genomes, fitness)``.
    """
    rng = np.random.default_rng(cfg.seed)
    P = int(cfg.population)
    L = int(cfg.bits) * p
    mut = 1.0 / L if cfg.mutation_rate is None else float(cfg.mutation_rate)
    n_elite = min(int(cfg.elite), P)

    def score(genomes):
        f = np.asarray(fitness_fn(decode_population(genomes, cfg, p)), dtype=float)
        return np.where(np.isfinite(f), f, np.inf)

    pop = rng.integers(0, 2, size=(P, L), dtype=np.uint8)
    best_genome, best_fit = None, np.inf
    trace = Trace()
    for gen in range(int(cfg.generations) + 1):
        t0 = time.perf_counter()
        fit = score(pop)
        i_best = int(np.argmin(fit))
        if fit[i_best] < best_fit or best_genome is None:
            best_fit, best_genome = float(fit[i_best]), pop[i_best].copy()
        finite = fit[np.isfinite(fit)]
        mean = float(finite.mean()) if finite.size else None
        if callback is not None:
            callback(gen, pop, fit)
        if gen == int(cfg.generations):
            trace.append(best_fit, mean_loss=mean, millis=(time.perf_counter() - t0) * 1e3 if record_time else None)
            break

        order = np.argsort(fit, kind="stable")
        elites = pop[order[:n_elite]]
        n_child = P - n_elite
        n_pairs = (n_child + 1) // 2
        mothers = pop[_tournament(fit, rng, n_pairs)]
        fathers = pop[_tournament(fit, rng, n_pairs)]
        cross = rng.random(n_pairs) < cfg.crossover_rate
        cut = rng.integers(1, L, size=n_pairs)
        take_mother = np.arange(L)[None, :] < cut[:, None]
        take_mother |= ~cross[:, None]
        child1 = np.where(take_mother, mothers, fathers)
        child2 = np.where(take_mother, fathers, mothers)
        children = np.concatenate([child1, child2])[:n_child]
        if mut > 0:
            flips = rng.random(children.shape) < mut
            children = children ^ flips.astype(np.uint8)
        pop = np.concatenate([elites, children])
        trace.append(best_fit, mean_loss=mean, millis=(time.perf_counter() - t0) * 1e3 if record_time else None)
    return decode_population(best_genome, cfg, p)[0], best_fit, trace


def ga_optimize(panel, cfg=GaConfig(), k=0.01, q0="empirical", weights=None, record_time=True):
    """Fit the quantile recursion with the GA, scoring candidates by the exact loss."""
    y = np.ascontiguousarray(_returns(panel), dtype=float)
    n = y.shape[1]
    q0 = resolve_q0(q0, y, k)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)

    def fitness(thetas):
        return _kernels.batch_loss_kernel(np.ascontiguousarray(thetas), y, q0, k, 0.0, w)

    theta, _, trace = ga_minimize(fitness, n_params(n), cfg, record_time=record_time)
    return CaviarParams.from_vector(k, theta, n), trace
