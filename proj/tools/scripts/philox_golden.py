"""Reference Philox4x64-10 used to freeze the golden draws in tests/core/test_rng.cpp.

Cross-checked against numpy.random.Philox, whose first raw output block is the
generator applied to (counter + 1).
"""
import numpy as np

M = 2**64 - 1
M0, M1 = 0xD2E7470EE14C6C93, 0xCA5A826395121157
W0, W1 = 0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B


def philox(ctr, key):
    c, k = list(ctr), list(key)
    for r in range(10):
        if r:
            k = [(k[0] + W0) & M, (k[1] + W1) & M]
        p0, p1 = M0 * c[0], M1 * c[2]
        c = [(p1 >> 64) ^ c[1] ^ k[0], p1 & M, (p0 >> 64) ^ c[3] ^ k[1], p0 & M]
    return c


def draws(seed, stream, n):
    out = []
    b = 0
    while len(out) < n:
        out += philox([b, 0, stream, 0], [seed, 0])
        b += 1
    return out[:n]


if __name__ == "__main__":
    for seed, stream in [(0, 0), (42, 7), (2**64 - 1, 123456789)]:
        g = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64),
                            counter=np.array([0, 0, stream, 0], dtype=np.uint64))
        ref = [int(x) for x in g.random_raw(8)]
        assert ref == draws(seed, stream, 12)[4:], (seed, stream)
        print(seed, stream, ", ".join(f"0x{x:016x}ull" for x in draws(seed, stream, 8)))
