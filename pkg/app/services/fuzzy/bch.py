"""
二元 BCH 码
GF(2^m) 运算、生成多项式构造、系统编码与 Berlekamp–Massey / Chien 译码
"""
import logging
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from app.core.errors import InputError, ParameterError
from app.models.fuzzy import BchDescriptor, DecodeResult

logger = logging.getLogger(__name__)

# 本原多项式（含最高次项），按 m 索引
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}
MIN_M = min(PRIMITIVE_POLYS)
MAX_M = max(PRIMITIVE_POLYS)


def clmul(a: int, b: int) -> int:
    """GF(2)[x] 乘法（整数按位表示多项式，bit j 为 x^j 系数）"""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        b >>= 1
    return result


def clmod(a: int, g: int) -> int:
    """GF(2)[x] 取模"""
    dg = g.bit_length() - 1
    while a and a.bit_length() - 1 >= dg:
        a ^= g << (a.bit_length() - 1 - dg)
    return a


class GaloisField:
    """GF(2^m)，元素以整数表示，乘法走指数/对数表"""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLYS:
            raise ParameterError(f"不支持的域次数 m={m}")
        self.m = m
        self.order = (1 << m) - 1
        self.poly = PRIMITIVE_POLYS[m]

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(self.order + 1, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & (1 << m):
                x ^= self.poly
        exp[self.order:] = exp[:self.order]
        exp.setflags(write=False)
        log.setflags(write=False)
        self.exp = exp
        self.log = log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("GF(2^m) 中 0 不可逆")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % self.order])

    def cyclotomic_coset(self, i: int) -> List[int]:
        coset, e = [], i % self.order
        while e not in coset:
            coset.append(e)
            e = (e * 2) % self.order
        return coset

    def minimal_poly(self, i: int) -> int:
        """α^i 的最小多项式（系数属于 GF(2)，整数表示）"""
        coeffs = [1]  # 低次在前
        for e in self.cyclotomic_coset(i):
            root = self.alpha_pow(e)
            shifted = [0] + coeffs
            for j, c in enumerate(coeffs):
                shifted[j] ^= self.mul(c, root)
            coeffs = shifted
        if any(c > 1 for c in coeffs):
            raise ParameterError(f"α^{i} 的最小多项式系数不在 GF(2) 中")
        return sum(c << j for j, c in enumerate(coeffs))


def select_m(key_len: int, t: int) -> int:
    """满足 2^m - 1 ≥ key_len + m·t 的最小 m"""
    for m in range(MIN_M, MAX_M + 1):
        if (1 << m) - 1 >= key_len + m * t:
            return m
    raise ParameterError(f"key_len={key_len}, t={t} 超出 m ≤ {MAX_M} 的 BCH 码范围")


class BchCode:
    """缩短的窄义二元 BCH 码；构造后只读，可在线程间共享"""

    def __init__(self, m: int, t: int, message_length: int):
        self.field = GaloisField(m)
        self.m = m
        self.n = self.field.order
        self.t = t

        generator, covered = 1, set()
        for i in range(1, 2 * t + 1):
            if i % self.n in covered:
                continue
            covered.update(self.field.cyclotomic_coset(i))
            generator = clmul(generator, self.field.minimal_poly(i))
        self.generator = generator
        self.parity_bits = generator.bit_length() - 1
        self.k = self.n - self.parity_bits
        if message_length > self.k:
            raise ParameterError(f"消息长度 {message_length} 超过 k={self.k}")
        self.message_length = message_length
        self.shortening = self.k - message_length
        self._parity_matrix = self._build_parity_matrix()

    @property
    def codeword_length(self) -> int:
        return self.message_length + self.parity_bits

    def descriptor(self) -> BchDescriptor:
        return BchDescriptor(
            m=self.m, n=self.n, k=self.k, t=self.t, shortening=self.shortening,
            message_length=self.message_length, parity_bits=self.parity_bits,
            primitive_poly=self.field.poly, generator=format(self.generator, "x"),
        )

    def _int_to_parity(self, remainder: int) -> np.ndarray:
        """余式 → 校验位向量（x^{p-1} 系数在前）"""
        p = self.parity_bits
        return np.array([(remainder >> (p - 1 - j)) & 1 for j in range(p)], dtype=np.uint8)

    def _build_parity_matrix(self) -> np.ndarray:
        """第 i 行为 x^{K-1-i+p} mod g 对应的校验位"""
        K, p = self.message_length, self.parity_bits
        matrix = np.zeros((K, p), dtype=np.uint8)
        remainder = clmod(1 << p, self.generator)
        for i in range(K - 1, -1, -1):
            matrix[i] = self._int_to_parity(remainder)
            remainder = clmod(remainder << 1, self.generator)
        matrix.setflags(write=False)
        return matrix

    def parity_of(self, message) -> np.ndarray:
        msg = np.asarray(message, dtype=np.int64).ravel()
        if msg.size != self.message_length:
            raise InputError(f"消息长度必须为 {self.message_length}，实际 {msg.size}")
        return ((msg @ self._parity_matrix) % 2).astype(np.uint8)

    def syndromes(self, word: np.ndarray) -> np.ndarray:
        """S_i = r(α^i), i = 1..2t；码字位置 j 对应 x^{N-1-j}"""
        degrees = (self.codeword_length - 1 - np.flatnonzero(word)).astype(np.int64)
        out = np.zeros(2 * self.t, dtype=np.int64)
        if degrees.size == 0:
            return out
        for i in range(1, 2 * self.t + 1):
            out[i - 1] = np.bitwise_xor.reduce(self.field.exp[(i * degrees) % self.n])
        return out

    def berlekamp_massey(self, syndromes: np.ndarray) -> Tuple[List[int], int]:
        """错误定位多项式 Λ（低次在前）及其阶 L"""
        gf = self.field
        locator, previous = [1], [1]
        length, shift, last = 0, 1, 1
        for step in range(len(syndromes)):
            discrepancy = int(syndromes[step])
            for i in range(1, length + 1):
                if i < len(locator):
                    discrepancy ^= gf.mul(locator[i], int(syndromes[step - i]))
            if discrepancy == 0:
                shift += 1
                continue
            coef = gf.mul(discrepancy, gf.inv(last))
            updated = locator + [0] * max(0, len(previous) + shift - len(locator))
            for i, c in enumerate(previous):
                updated[i + shift] ^= gf.mul(coef, c)
            if 2 * length <= step:
                previous, locator = locator, updated
                length, last, shift = step + 1 - length, discrepancy, 1
            else:
                locator = updated
                shift += 1
        return locator, length

    def chien_search(self, locator: List[int]) -> np.ndarray:
        """在缩短后的位置上找 Λ(α^{-e}) = 0 的次数 e"""
        degrees = np.arange(self.codeword_length, dtype=np.int64)
        value = np.zeros(degrees.size, dtype=np.int64)
        for j, c in enumerate(locator):
            if c == 0:
                continue
            value ^= self.field.exp[(self.field.log[c] - j * degrees) % self.n]
        return degrees[value == 0]

    def decode(self, received) -> DecodeResult:
        word = np.asarray(received, dtype=np.uint8).ravel()
        if word.size != self.codeword_length:
            raise InputError(f"接收字长度必须为 {self.codeword_length}，实际 {word.size}")
        K = self.message_length
        syndromes = self.syndromes(word)
        if not np.any(syndromes):
            return DecodeResult(ok=True, message=word[:K].copy(), error_count=0)

        locator, length = self.berlekamp_massey(syndromes)
        if length > self.t:
            return DecodeResult(ok=False, message=word[:K].copy())
        roots = self.chien_search(locator)
        if roots.size != length:
            return DecodeResult(ok=False, message=word[:K].copy())

        positions = np.sort(self.codeword_length - 1 - roots)
        corrected = word.copy()
        corrected[positions] ^= 1
        if np.any(self.syndromes(corrected)):
            return DecodeResult(ok=False, message=word[:K].copy())
        return DecodeResult(
            ok=True, message=corrected[:K], error_count=int(positions.size),
            error_positions=positions.tolist(),
        )


@lru_cache(maxsize=32)
def _cached_code(m: int, t: int, message_length: int) -> BchCode:
    return BchCode(m, t, message_length)


def bch_build(key_len: int, t: int) -> BchCode:
    """按密钥长度与纠错能力构造缩短 BCH 码"""
    if key_len < 1:
        raise ParameterError("密钥长度至少为 1")
    if t < 1:
        raise ParameterError("纠错能力 t 至少为 1")
    code = _cached_code(select_m(key_len, t), t, key_len)
    logger.debug(f"BCH code m={code.m} n={code.n} k={code.k} t={t} parity={code.parity_bits} "
                 f"shortening={code.shortening}")
    return code


def bch_from_descriptor(descriptor: BchDescriptor) -> BchCode:
    code = _cached_code(descriptor.m, descriptor.t, descriptor.message_length)
    if format(code.generator, "x") != descriptor.generator or code.field.poly != descriptor.primitive_poly:
        raise ParameterError("辅助数据中的 BCH 描述与重建的码不一致")
    return code


def bch_encode(code: BchCode, message) -> np.ndarray:
    """系统码字: 消息 ∥ (消息·x^{n-k} mod g)"""
    msg = np.asarray(message, dtype=np.uint8).ravel()
    return np.concatenate([msg, code.parity_of(msg)])


def bch_decode(code: BchCode, received) -> DecodeResult:
    return code.decode(received)


def divides_cyclic(code: BchCode) -> bool:
    """生成多项式是否整除 x^n + 1"""
    return clmod((1 << code.n) | 1, code.generator) == 0
