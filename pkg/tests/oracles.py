"""Independent reference computations used to freeze expected values.

Nothing here calls the package's own concretizer or allocator; each oracle is
a direct, brute-force transcription of the rule it checks.
"""

from __future__ import annotations

import itertools

from twophase.core import Conf
from twophase.values import SByte


def entangled_store_values(byteorder: str = "little") -> set[int]:
    """Loads of an i32 built from two i16 stores, each choosing its value once."""
    out = set()
    for x in (0x1234, 0):
        for y in (0x5678, 0):
            raw = _u16(x, byteorder) + _u16(y, byteorder)
            out.add(_join(raw, byteorder))
    return out


def entangled_mixed_values(byteorder: str = "little") -> set[int]:
    """What a load would give if every byte chose independently."""
    lo = [_u16(x, byteorder) for x in (0x1234, 0)]
    hi = [_u16(y, byteorder) for y in (0x5678, 0)]
    out = set()
    for b0, b1, b2, b3 in itertools.product(
        {v[0] for v in lo}, {v[1] for v in lo}, {v[0] for v in hi}, {v[1] for v in hi}
    ):
        out.add(_join([b0, b1, b2, b3], byteorder))
    return out - entangled_store_values(byteorder)


def _u16(v: int, byteorder: str) -> list[int]:
    lo, hi = v & 0xFF, v >> 8
    return [lo, hi] if byteorder == "little" else [hi, lo]


def _join(raw: list[int], byteorder: str) -> int:
    if byteorder == "big":
        raw = list(reversed(raw))
    return sum(b << (8 * i) for i, b in enumerate(raw))


def product_filter_concat(byte_choices: list[list], sbytes: list[SByte], width: int) -> set[int]:
    """Per-byte product of choices filtered by the equal-store-id rule.

    ``byte_choices[j]`` lists candidate integer values for the value behind
    ``sbytes[j]``; the result reassembles little-endian ``width``-bit integers.
    """
    out = set()
    for combo in itertools.product(*byte_choices):
        ok = True
        for j, k in itertools.combinations(range(len(sbytes)), 2):
            if sbytes[j].sid == sbytes[k].sid and combo[j] != combo[k]:
                ok = False
                break
        if not ok:
            continue
        v = 0
        for j, (sb, x) in enumerate(zip(sbytes, combo)):
            v |= ((x >> (8 * sb.idx)) & 0xFF) << (8 * j)
        out.add(v & ((1 << width) - 1))
    return out


def brute_force_placements(size: int, op, conf: Conf, pr: int) -> set[int]:
    """Start addresses where a block of ``len(op.bytes)`` cells fits in ``[0, size)``."""
    n = len(op.bytes)
    out = set()
    for a in range(size):
        if a + n > size and n:
            continue
        if all((a + i) not in conf.mem for i in range(n)):
            out.add(a)
    return out


def max_plus_one_oracle(conf: Conf) -> int:
    return max(conf.mem) + 1 if conf.mem else 0


def undef_i1_values() -> set[int]:
    return {0, 1}


def mul_i8_image(k: int) -> set[int]:
    return {(k * u) % 256 for u in range(256)}
