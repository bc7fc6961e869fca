"""
比特工具
打包/解包（高位在前）与 Gray 编码
"""
import numpy as np


def pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="big").tobytes()


def unpack_bits(data: bytes, length: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="big")
    if length > bits.size:
        raise ValueError(f"数据不足: 需要 {length} 比特, 只有 {bits.size}")
    return bits[:length].copy()


def bits_to_str(bits: np.ndarray) -> str:
    return (np.asarray(bits, dtype=np.uint8) + ord("0")).astype(np.uint8).tobytes().decode("ascii")


def str_to_bits(text: str) -> np.ndarray:
    raw = np.frombuffer(text.strip().encode("ascii"), dtype=np.uint8)
    bits = raw - ord("0")
    if bits.size and bits.max() > 1:
        raise ValueError("比特串只能包含 '0' 和 '1'")
    return bits.astype(np.uint8)


def gray_encode(indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    return indices ^ (indices >> 1)


def gray_decode(codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    result = codes.copy()
    shift = codes >> 1
    while np.any(shift):
        result ^= shift
        shift >>= 1
    return result


def int_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    """每个整数展开为 width 位（高位在前），按顺序拼接"""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts[None, :]) & 1).astype(np.uint8).reshape(-1)


def bits_to_int(bits: np.ndarray, width: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, width)
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits @ weights
