"""
随机性检验数据模型
"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator


class NistTestKind(str, Enum):
    """本地实现的九项检验"""
    FREQUENCY = "Frequency"
    BLOCK_FREQUENCY = "BlockFrequency"
    CUMULATIVE_SUMS = "CumulativeSums"
    RUNS = "Runs"
    LONGEST_RUN = "LongestRun"
    RANK = "Rank"
    FFT = "FFT"
    APPROXIMATE_ENTROPY = "ApproximateEntropy"
    SERIAL = "Serial"


class BitFormat(str, Enum):
    ASCII01 = "ascii01"
    PACKED = "packed"


class NistParams(BaseModel):
    """检验参数（默认值同参考实现）"""
    block_frequency_m: int = 128
    approximate_entropy_m: Optional[int] = None   # 未指定时按序列长度取 min(10, ⌊log2 n⌋ - 6)
    serial_m: Optional[int] = None                # 未指定时取 min(16, ⌊log2 n⌋ - 3)
    rank_rows: int = 32
    rank_cols: int = 32
    strict_minimums: bool = True   # 关闭后仅检查结构性最小长度（用于小样例）
    kinds: List[NistTestKind] = Field(default_factory=lambda: list(NistTestKind))

    @field_validator('block_frequency_m', 'rank_rows', 'rank_cols')
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('参数必须为正')
        return v

    @field_validator('approximate_entropy_m', 'serial_m')
    @classmethod
    def validate_template(cls, v):
        if v is not None and v < 2:
            raise ValueError('模式长度至少为 2')
        return v

    @field_validator('rank_cols')
    @classmethod
    def validate_rank_cols(cls, v):
        if v > 62:
            raise ValueError('矩阵列数不能超过 62')
        return v


class NistTestSummary(BaseModel):
    """单项检验在全部序列上的汇总"""
    name: str
    p_values: List[List[float]]      # [子检验][序列]
    proportions: List[float]
    pass_counts: List[int]
    sequence_count: int
    uniformity_p: List[float]
    subtests_passed: int
    subtests_total: int
    proportion_floor: float
    passed: bool


class BatteryReport(BaseModel):
    """整套检验报告"""
    alpha: float
    sequence_count: int
    sequence_length: int
    tests: List[NistTestSummary]
    skipped: Dict[str, str] = {}     # 检验名 -> 不适用原因

    @property
    def all_passed(self) -> bool:
        return all(t.passed for t in self.tests)
