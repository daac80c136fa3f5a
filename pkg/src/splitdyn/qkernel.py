"""Dense rational polynomial kernel.

A polynomial over Q is carried as ``(den, nums)`` where ``nums`` is a list of
integers, lowest degree first, and ``den`` is a positive integer denominator
common to all coefficients, with gcd(content(nums), den) == 1.  Everything
here is exact.  Multiplication switches from schoolbook convolution to a
single big-integer product (coefficient packing at a power-of-two radix, with
GMP doing the heavy multiply) once the work estimate makes that worthwhile.
"""

from __future__ import annotations

from math import gcd

import gmpy2

# schoolbook beyond this many coefficient pairs loses to the packed multiply
_PACK_THRESHOLD = 40_000

ZERO: tuple[int, list[int]] = (1, [])
ONE: tuple[int, list[int]] = (1, [1])
X: tuple[int, list[int]] = (1, [0, 1])


def trim(nums: list[int]) -> list[int]:
    while nums and nums[-1] == 0:
        nums.pop()
    return nums


def content(nums: list[int]) -> int:
    g = 0
    for v in nums:
        if v:
            g = gcd(g, v)
            if g == 1:
                return 1
    return g


def normalize(den: int, nums: list[int]) -> tuple[int, list[int]]:
    trim(nums)
    if not nums:
        return 1, []
    if den < 0:
        den = -den
        nums = [-v for v in nums]
    g = gcd(content(nums), den)
    if g > 1:
        den //= g
        nums = [v // g for v in nums]
    return den, nums


def total_bits(den: int, nums: list[int]) -> int:
    return den.bit_length() + sum(v.bit_length() for v in nums)


def _school_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    if len(a) > len(b):
        a, b = b, a
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _packed_mul(a: list[int], b: list[int]) -> list[int]:
    """Signed coefficient convolution through one big-integer product."""
    max_a = max(abs(v) for v in a)
    max_b = max(abs(v) for v in b)
    width = (max_a * max_b * min(len(a), len(b))).bit_length() + 2
    width = ((width + 7) // 8) * 8
    nbytes = width // 8
    mod = 1 << width
    packed_a = b"".join((v % mod).to_bytes(nbytes, "little") for v in a)
    packed_b = b"".join((v % mod).to_bytes(nbytes, "little") for v in b)
    # residues store v mod 2^width; subtract the borrow mass of negatives
    borrow_a = 0
    for i, v in enumerate(a):
        if v < 0:
            borrow_a |= 1 << (i * width)
    borrow_b = 0
    for i, v in enumerate(b):
        if v < 0:
            borrow_b |= 1 << (i * width)
    val_a = int.from_bytes(packed_a, "little") - (borrow_a << width)
    val_b = int.from_bytes(packed_b, "little") - (borrow_b << width)
    prod = int(gmpy2.mpz(val_a) * gmpy2.mpz(val_b))
    negative = prod < 0
    if negative:
        prod = -prod
    n_out = len(a) + len(b) - 1
    raw = prod.to_bytes((n_out + 2) * nbytes, "little")
    out = []
    carry = 0
    half = 1 << (width - 1)
    for i in range(n_out):
        limb = int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") + carry
        if limb >= half:
            limb -= mod
            carry = 1
        else:
            carry = 0
        out.append(-limb if negative else limb)
    return out


def imul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    if len(a) * len(b) > _PACK_THRESHOLD:
        return _packed_mul(a, b)
    return _school_mul(a, b)


def add(p: tuple[int, list[int]], q: tuple[int, list[int]]) -> tuple[int, list[int]]:
    dp, np_ = p
    dq, nq = q
    g = gcd(dp, dq)
    mp, mq = dq // g, dp // g
    out = [0] * max(len(np_), len(nq))
    for i, v in enumerate(np_):
        out[i] = v * mp
    for i, v in enumerate(nq):
        out[i] += v * mq
    return normalize(dp * mp, out)


def neg(p: tuple[int, list[int]]) -> tuple[int, list[int]]:
    return p[0], [-v for v in p[1]]


def sub(p, q):
    return add(p, neg(q))


def mul(p: tuple[int, list[int]], q: tuple[int, list[int]]) -> tuple[int, list[int]]:
    if not p[1] or not q[1]:
        return 1, []
    return normalize(p[0] * q[0], imul(p[1], q[1]))


def scale(p: tuple[int, list[int]], num: int, den: int) -> tuple[int, list[int]]:
    return normalize(p[0] * den, [v * num for v in p[1]])


def add_rational(p: tuple[int, list[int]], num: int, den: int) -> tuple[int, list[int]]:
    dp, nums = p
    g = gcd(dp, den)
    mp, mq = den // g, dp // g
    out = [v * mp for v in nums] or [0]
    out[0] += num * mq
    return normalize(dp * mp, out)


def pow_(p: tuple[int, list[int]], k: int, budget_check=None) -> tuple[int, list[int]]:
    if k < 0:
        raise ValueError("negative power of a polynomial")
    result = ONE
    base = p
    while k:
        if k & 1:
            result = mul(result, base)
            if budget_check is not None:
                budget_check(total_bits(*result))
        k >>= 1
        if k:
            base = mul(base, base)
            if budget_check is not None:
                budget_check(total_bits(*base))
    return result


def compose(p: tuple[int, list[int]], q: tuple[int, list[int]], budget_check=None) -> tuple[int, list[int]]:
    """p(q(x)).  Dense Horner for dense p; a shared power cache when p is sparse
    (big win for shapes like x^d + c)."""
    dp, np_ = p
    if not np_:
        return 1, []
    nonzero = [i for i, v in enumerate(np_) if v]
    if len(nonzero) <= max(2, len(np_) // 4):
        powers: dict[int, tuple[int, list[int]]] = {}

        def q_power(k: int) -> tuple[int, list[int]]:
            if k == 0:
                return ONE
            if k == 1:
                return q
            got = powers.get(k)
            if got is None:
                half = q_power(k // 2)
                got = mul(half, half)
                if k & 1:
                    got = mul(got, q)
                if budget_check is not None:
                    budget_check(total_bits(*got))
                powers[k] = got
            return got

        acc = ZERO
        for i in nonzero:
            acc = add(acc, scale(q_power(i), np_[i], 1))
        return normalize(acc[0] * dp, acc[1]) if dp != 1 else acc
    acc = (1, [np_[-1]])
    for i in range(len(np_) - 2, -1, -1):
        acc = mul(acc, q)
        if np_[i]:
            acc = add(acc, (1, [np_[i]]))
        if budget_check is not None:
            budget_check(total_bits(*acc))
    return normalize(acc[0] * dp, acc[1])


def derivative(p: tuple[int, list[int]]) -> tuple[int, list[int]]:
    den, nums = p
    return normalize(den, [i * v for i, v in enumerate(nums)][1:])


def evaluate(p: tuple[int, list[int]], num: int, den: int) -> tuple[int, int]:
    """p(num/den) as an unreduced rational pair (value_num, value_den)."""
    dn, nums = p
    if not nums:
        return 0, 1
    # Horner with denominator clearing: sum of nums[i] num^i den^(deg-i)
    acc = nums[-1]
    dpow = 1
    for i in range(len(nums) - 2, -1, -1):
        dpow *= den
        acc = acc * num + nums[i] * dpow
    return acc, dn * dpow
