#!/usr/bin/env python3
"""
Random Number Streams
Counter-based Philox generators keyed by (seed, path id, segment) so every path is reproducible
on its own, independent of scheduling
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StreamKey:
    seed: int
    path_id: int
    segment: int = 0

    def entropy(self):
        return [int(self.seed), int(self.path_id), int(self.segment)]


def make_generator(key: StreamKey) -> np.random.Generator:
    """Philox generator for one stream key"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key.entropy())))


def path_stream(seed: int, path_id: int, segment: int = 0) -> np.random.Generator:
    """Stream for segment `segment` (crossover number) of path `path_id`"""
    return make_generator(StreamKey(seed, path_id, segment))


def experiment_seed(base_seed: int, salt: int) -> int:
    """Derived seed for an independent experiment sharing a base seed (e.g. one- vs two-step runs)"""
    return int(np.random.SeedSequence([int(base_seed), int(salt)]).generate_state(1)[0])
