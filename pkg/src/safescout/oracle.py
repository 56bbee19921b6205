"""Simulated trust oracle with reproducible Bernoulli responses.

Randomness comes from numpy's PCG64 generator seeded through
``numpy.random.SeedSequence``. Replication ``r`` of an experiment with master
seed ``s`` uses the substream keyed by ``(r, role)``, so replications are
independent and each one can be reproduced on its own.
"""
import numpy as np

from ._validation import check_cell, check_probabilities

ORACLE_STREAM = 0
LEARNER_STREAM = 1


def derive_seed(master_seed, *key):
    """Deterministic 64-bit seed for the substream ``key`` of ``master_seed``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    hi, lo = seq.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


class TrustOracle:
    """Answers 1 ("trusted") at cell ``k`` with probability ``true_p[k]``.

    Two oracles built with the same seed return identical answers to identical
    query sequences.
    """

    def __init__(self, true_p, seed=0):
        self.true_p = check_probabilities(true_p, "true_p")
        self.seed = int(seed)
        self._rng = make_rng(self.seed)

    @property
    def n_cells(self):
        return len(self.true_p)

    def observe(self, cell):
        cell = check_cell(cell, self.n_cells)
        return int(self._rng.random() < self.true_p[cell])

    def observe_many(self, cell, size):
        """Draw ``size`` answers at one cell; advances the stream like ``size`` calls to ``observe``."""
        cell = check_cell(cell, self.n_cells)
        return (self._rng.random(size) < self.true_p[cell]).astype(np.int8)


def observe(oracle, cell):
    return oracle.observe(cell)
