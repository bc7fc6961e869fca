"""
挑战数据模型
NARMA 输入/目标序列对
"""
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.arrays import FloatArray


class NarmaParams(BaseModel):
    """NARMA-m 参数"""
    a1: float = 0.3
    a2: float = 0.05
    b: float = 1.5
    c: float = 0.1
    m: int = 10
    divergence_bound: float = 10.0

    @field_validator('m')
    @classmethod
    def validate_order(cls, v):
        if v < 1:
            raise ValueError('记忆阶数至少为 1')
        return v

    @model_validator(mode='after')
    def validate_finite(self):
        if not all(math.isfinite(v) for v in (self.a1, self.a2, self.b, self.c, self.divergence_bound)):
            raise ValueError('NARMA 系数必须为有限值')
        return self


class ChallengeConfig(BaseModel):
    """挑战生成配置"""
    length: int = 2000
    input_low: float = 0.0     # 驱动 NARMA 递推的均匀分布区间
    input_high: float = 0.5
    max_retries: int = 16
    params: NarmaParams = Field(default_factory=NarmaParams)

    @model_validator(mode='after')
    def validate_range(self):
        if self.input_low >= self.input_high:
            raise ValueError('input_low 必须小于 input_high')
        if self.length < self.params.m + 1:
            raise ValueError('挑战长度必须大于记忆阶数')
        return self


class Challenge(BaseModel):
    """一对 {X_in, Y_out}"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    seed: int
    sub_seed: int              # 实际使用的（可能经过重试的）子种子
    length: int
    input_low: float
    input_high: float
    params: NarmaParams
    x_in: FloatArray
    y_out: FloatArray

    @model_validator(mode='after')
    def validate_lengths(self):
        if self.x_in.shape != (self.length,) or self.y_out.shape != (self.length,):
            raise ValueError('x_in 与 y_out 长度必须等于 length')
        return self

    def modulator_input(self) -> np.ndarray:
        """将输入仿射映射到调制器的 [0, 1] 区间"""
        span = self.input_high - self.input_low
        return np.clip((self.x_in - self.input_low) / span, 0.0, 1.0)
