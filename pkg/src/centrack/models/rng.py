from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """One reproducible random stream per (base_seed, stream_index).

    Streams come from numpy's counter-based Philox generator keyed through a
    SeedSequence, so replicate i draws the same numbers no matter which worker
    runs it or in which order.
    """
    base_seed: int
    stream_index: int = 0

    def generator(self):
        seq = np.random.SeedSequence([int(self.base_seed) & _MASK64,
                                      int(self.stream_index)])
        return np.random.Generator(np.random.Philox(seq))


def make_rng(base_seed, stream_index=0):
    return RngStream(base_seed, stream_index).generator()


def uniforms(rng, count, block=65536):
    """Yields `count` uniforms on [0, 1), drawn from `rng` in blocks."""
    while count > 0:
        size = min(block, count)
        for u in rng.random(size).tolist():
            yield u
        count -= size
