"""Independent implementation of the engine's perturbation PRNG contract.

Deliberately written from the documented contract, not shared code: a
splitmix64 stream seeded by folding integer parts through the finalizer.
Conformance vectors live in conformance/prng_vectors.json at the
repository root and are asserted by both test suites.
"""

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class ContractRng:
    def __init__(self, *parts: int):
        state = 0
        for part in parts:
            state = _finalize(state ^ (part & _MASK))
        self._state = state

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _finalize(self._state)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        return self.next_u64() % n
