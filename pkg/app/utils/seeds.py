"""
种子派生
所有随机性都从一个主种子经命名路径派生
"""
from enum import IntEnum

import numpy as np


class SeedStream(IntEnum):
    """随机数派生路径"""
    FABRICATION = 0
    CHALLENGE = 1
    NOISE = 2
    CALIBRATION = 3
    SWEEP = 4
    PERMUTATION = 5


def derive_seed(master: int, stream: SeedStream, *indices: int) -> int:
    """由 (主种子, 路径, 下标...) 派生 63 位无符号种子"""
    seq = np.random.SeedSequence(int(master), spawn_key=(int(stream), *(int(i) for i in indices)))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def derive_seeds(master: int, stream: SeedStream, count: int, *prefix: int) -> list[int]:
    return [derive_seed(master, stream, *prefix, i) for i in range(count)]


def rng_for(seed: int) -> np.random.Generator:
    """PCG64 生成器"""
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


class SeedSchedule:
    """实验的完整种子表，写入每个产物以便复现"""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed)

    def fabrication(self, device_index: int = 0) -> int:
        return derive_seed(self.master_seed, SeedStream.FABRICATION, device_index)

    def adc_challenge(self) -> int:
        return derive_seed(self.master_seed, SeedStream.CALIBRATION, 2)

    def calibration(self, count: int) -> tuple[list[int], list[int]]:
        """校准 CRP 的 (挑战种子, 噪声种子)"""
        return (derive_seeds(self.master_seed, SeedStream.CALIBRATION, count, 0),
                derive_seeds(self.master_seed, SeedStream.CALIBRATION, count, 1))

    def intra_challenge(self) -> int:
        return derive_seed(self.master_seed, SeedStream.CHALLENGE, 0)

    def intra_noise(self, trials: int) -> list[int]:
        return derive_seeds(self.master_seed, SeedStream.NOISE, trials, 0)

    def inter(self, count: int) -> tuple[list[int], list[int]]:
        """跨挑战测量的 (挑战种子, 噪声种子)"""
        return (derive_seeds(self.master_seed, SeedStream.CHALLENGE, count, 1),
                derive_seeds(self.master_seed, SeedStream.NOISE, count, 1))

    def device_noise(self, count: int) -> list[int]:
        return derive_seeds(self.master_seed, SeedStream.NOISE, count, 2)

    def corpus(self, start: int, count: int) -> tuple[list[int], list[int]]:
        """语料用的独立挑战/噪声路径，与扫描互不重叠"""
        index = range(start, start + count)
        return ([derive_seed(self.master_seed, SeedStream.CHALLENGE, 3, i) for i in index],
                [derive_seed(self.master_seed, SeedStream.NOISE, 3, i) for i in index])

    def pairs(self, *tag: int) -> int:
        return derive_seed(self.master_seed, SeedStream.SWEEP, *tag)

    def permutation(self, *tag: int) -> int:
        return derive_seed(self.master_seed, SeedStream.PERMUTATION, *tag)

    def describe(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "streams": {stream.name.lower(): int(stream) for stream in SeedStream},
        }
