"""Deterministic 64-bit PRNG used for seeded text perturbations.

The generator is a splitmix64 sequence.  It is part of the file-format
contract: external exporters must reproduce it bit for bit so that
perturbed-prediction tables keyed by (utterance id, test name) line up with
engine-generated variants.  Conformance vectors live in
``conformance/prng_vectors.json`` at the repository root.

Contract
--------
* All arithmetic is modulo 2**64.
* ``mix64(z)``: z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31.
* Stream seeding from parts (seed, id, variant index, ...):
  state = 0, then for each part: state = mix64(state ^ part).
* ``next_u64()``: state += 0x9E3779B97F4A7C15; return mix64(state).
* ``below(n)``: next_u64() % n  (modulo; draw counts are part of the
  contract, so no rejection sampling).
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULT_1 = 0xBF58476D1CE4E5B9
MIX_MULT_2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_MULT_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MULT_2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream seeded by folding integer parts through the mixer."""

    def __init__(self, *parts: int):
        state = 0
        for part in parts:
            state = mix64(state ^ (part & MASK64))
        self._state = state

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def below(self, n: int) -> int:
        """Draw an integer in [0, n). Uses plain modulo by contract."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        return self.next_u64() % n
