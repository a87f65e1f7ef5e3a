"""Counter-based random streams for reproducible per-atom Monte Carlo.

Each atom gets its own stream keyed by (seed, stream id), so ensembles give
bit-identical results no matter how atoms are distributed over threads. The
generator is Philox 4x64 with 10 rounds; the block function is checked
against numpy's implementation in the test suite.

The compiled kernel carries a C transliteration of this generator and must
stay in lockstep with it (see kernels/_fast.pyx).
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B

# (x >> 11) has at most 53 bits; adding 0.5 before scaling keeps samples
# strictly inside (0, 1) so log() of a sample is always finite.
_INV53 = 1.0 / 9007199254740992.0


def philox4x64_block(c0, c1, c2, c3, k0, k1):
    """One 10-round Philox 4x64 block: four 64-bit words for this counter."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            ((p1 >> 64) ^ c1 ^ k0) & _MASK,
            p1 & _MASK,
            ((p0 >> 64) ^ c3 ^ k1) & _MASK,
            p0 & _MASK,
        )
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


class RngStream:
    """Deterministic random stream identified by (seed, stream).

    Distinct stream ids give statistically independent sequences; the same
    (seed, stream) always replays the same sequence.
    """

    __slots__ = ("seed", "stream", "_ctr", "_buf", "_pos")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed & _MASK
        self.stream = stream & _MASK
        # Counter starts at 1 to match numpy's Philox block sequence.
        self._ctr = 0
        self._buf = (0, 0, 0, 0)
        self._pos = 4

    def next_raw(self) -> int:
        """Next 64-bit word."""
        if self._pos == 4:
            self._ctr += 1
            c = self._ctr
            self._buf = philox4x64_block(
                c & _MASK, (c >> 64) & _MASK, 0, 0, self.seed, self.stream
            )
            self._pos = 0
        out = self._buf[self._pos]
        self._pos += 1
        return out

    def uniform(self) -> float:
        """Uniform double strictly inside (0, 1)."""
        return ((self.next_raw() >> 11) + 0.5) * _INV53

    def gauss(self) -> float:
        """Standard normal via Box-Muller (consumes two uniforms)."""
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(6.283185307179586 * u2)
