"""
密钥数据模型
校准参数与二进制密钥
"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.models.arrays import BitArray


class BitEncoding(str, Enum):
    """分箱索引编码"""
    NATURAL = "natural"
    GRAY = "gray"


class CalibrationProfile(BaseModel):
    """权重集合统计量与量化设置（公开辅助数据）"""
    mu: float
    sigma: float
    n_bit: int = 4
    encoding: BitEncoding = BitEncoding.NATURAL
    ensemble_size: int
    fab_seed: Optional[int] = None
    adc_bits: Optional[int] = None

    @field_validator('sigma')
    @classmethod
    def validate_sigma(cls, v):
        if not v > 0:
            raise ValueError('sigma 必须为正')
        return v

    @field_validator('n_bit')
    @classmethod
    def validate_n_bit(cls, v):
        if not 1 <= v <= 16:
            raise ValueError('n_bit 必须在 1-16 之间')
        return v


class BinaryKey(BaseModel):
    """由权重量化得到的密钥"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    bits: BitArray
    bits_per_weight: int
    weight_count: int

    @model_validator(mode='after')
    def validate_length(self):
        if self.bits.size != self.weight_count * self.bits_per_weight:
            raise ValueError('密钥长度必须等于 weight_count * bits_per_weight')
        return self

    @property
    def length(self) -> int:
        return int(self.bits.size)
