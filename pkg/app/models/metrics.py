"""
统计指标数据模型
汉明距离分布、EER 报告与扫描配置
"""
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from app.models.keys import BitEncoding


class HammingStats(BaseModel):
    """分数汉明距离统计"""
    mean: float
    std: float
    count: int
    histogram: List[int] = []
    bin_edges: List[float] = []

    @field_validator('mean')
    @classmethod
    def validate_mean(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError('均值必须在 [0, 1] 之间')
        return v

    @field_validator('std')
    @classmethod
    def validate_std(cls, v):
        if v < 0:
            raise ValueError('标准差不能为负')
        return v


class EerReport(BaseModel):
    """等错误率拟合结果"""
    intra: HammingStats
    inter: HammingStats
    threshold: float
    eer: float
    degenerate: bool = False     # 某一类标准差为零
    below_floor: bool = False    # 低于经验可分辨下限，仅为外推值


class OperatingPoint(BaseModel):
    """量化工作点"""
    m_bit: int = 3
    n_bit: int = 4
    encoding: BitEncoding = BitEncoding.NATURAL

    @field_validator('m_bit', 'n_bit')
    @classmethod
    def validate_bits(cls, v):
        if not 1 <= v <= 16:
            raise ValueError('位数必须在 1-16 之间')
        return v


class SweepBudget(BaseModel):
    """扫描规模"""
    intra_trials: int = 100
    inter_challenges: int = 500
    calibration_crps: int = 100
    device_count: int = 8

    @field_validator('intra_trials', 'inter_challenges', 'calibration_crps', 'device_count')
    @classmethod
    def validate_counts(cls, v):
        if v < 2:
            raise ValueError('样本数至少为 2')
        return v


class SweepGrids(BaseModel):
    """扫描网格"""
    m_bits: List[int] = Field(default_factory=lambda: list(range(1, 17)))
    n_bits: List[int] = Field(default_factory=lambda: list(range(1, 9)))
    mrr_counts: List[int] = Field(default_factory=lambda: [2, 3, 4, 5, 6, 7, 8])
    ecc_t_values: List[int] = Field(default_factory=lambda: list(range(0, 41, 2)))

    @field_validator('m_bits', 'n_bits')
    @classmethod
    def validate_bit_range(cls, v):
        if not v or any(not 1 <= b <= 16 for b in v):
            raise ValueError('位数网格必须在 [1, 16] 之间且非空')
        return sorted(set(v))

    @field_validator('mrr_counts')
    @classmethod
    def validate_mrr_counts(cls, v):
        if not v or any(c < 1 for c in v):
            raise ValueError('微环数量至少为 1')
        return sorted(set(v))

    @field_validator('ecc_t_values')
    @classmethod
    def validate_t_values(cls, v):
        if not v or any(t < 0 for t in v):
            raise ValueError('纠错能力不能为负')
        return sorted(set(v))


class KeyUniformity(BaseModel):
    """密钥集合的逐位均匀性"""
    bit_aliasing: float    # mean |P(bit=1) - 1/2| * 2
    entropy: float         # 逐位香农熵均值（比特）
    key_count: int
    key_bits: int


class GridCell(BaseModel):
    """(m_bit, n_bit) 网格中的一格"""
    m_bit: int
    n_bit: int
    intra_mean: float
    intra_std: float
    inter_mean: float
    inter_std: float
    eer: float
    feasible: bool
    threshold: float
    prng_region: bool
    key_bits: int


class BitGridResult(BaseModel):
    """比特网格扫描结果"""
    cells: List[GridCell]
    operating_intra: Optional[HammingStats] = None
    operating_inter: Optional[HammingStats] = None
    uniformity: Optional[KeyUniformity] = None


class MrrCountRow(BaseModel):
    """微环数量扫描的一行"""
    mrrs_per_node: int
    channels: int
    key_bits: int
    intra_mean: float
    intra_std: float
    inter_mean: float
    inter_std: float
    eer: float
    threshold: float
