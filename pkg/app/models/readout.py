"""
读出层数据模型
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.models.arrays import FloatArray
from app.models.keys import BinaryKey


class RidgeConfig(BaseModel):
    """岭回归配置"""
    lam: float = 1e-6
    taps: int = 11
    washout: int = 20
    standardize: bool = True

    @field_validator('lam')
    @classmethod
    def validate_lambda(cls, v):
        if v < 0:
            raise ValueError('正则化系数不能为负')
        return v

    @field_validator('taps')
    @classmethod
    def validate_taps(cls, v):
        if v < 1:
            raise ValueError('抽头数至少为 1')
        return v

    @model_validator(mode='after')
    def validate_washout(self):
        if self.washout < self.taps - 1:
            raise ValueError('washout 不能小于 taps - 1')
        return self


class FeatureMatrix(BaseModel):
    """回归特征：每通道 taps 个历史样本 + 直接输入项"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: FloatArray   # [rows, n_channels * taps + 1]
    n_channels: int
    taps: int
    washout: int

    @model_validator(mode='after')
    def validate_columns(self):
        if self.values.shape[1] != self.n_channels * self.taps + 1:
            raise ValueError('特征列数必须为 n_channels * taps + 1')
        return self

    @property
    def rows(self) -> int:
        return self.values.shape[0]


class FeatureTransform(BaseModel):
    """训练段上的逐列标准化参数"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: FloatArray
    scale: FloatArray

    def apply(self, values):
        return (values - self.mean) / self.scale


class Response(BaseModel):
    """PUF 响应：W_out 及其密钥"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: FloatArray
    intercept: float = 0.0
    nmse: float
    fab_seed: int
    challenge_seed: int
    noise_seed: int
    adc_bits: int
    key: Optional[BinaryKey] = None

    @property
    def weight_count(self) -> int:
        return int(self.weights.size)
