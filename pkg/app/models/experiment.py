"""
实验配置模型
一份配置文件 + 代码版本即可复现全部产物
"""
from typing import Optional

from pydantic import BaseModel, Field, field_validator

from app.models.challenge import ChallengeConfig
from app.models.device import DetectionConfig, NominalConfig
from app.models.keys import BitEncoding
from app.models.metrics import OperatingPoint, SweepBudget, SweepGrids
from app.models.randtests import NistParams
from app.models.readout import RidgeConfig
from app.utils.digest import sha256_hex


class KeygenSettings(BaseModel):
    """密钥生成设置"""
    n_bit: int = 4
    encoding: BitEncoding = BitEncoding.NATURAL
    calibration_size: int = 100  # 校准集合的 CRP 数

    @field_validator('n_bit')
    @classmethod
    def validate_n_bit(cls, v):
        if not 1 <= v <= 16:
            raise ValueError('n_bit 必须在 1-16 之间')
        return v

    @field_validator('calibration_size')
    @classmethod
    def validate_size(cls, v):
        if v < 2:
            raise ValueError('校准集合至少包含 2 个 CRP')
        return v


class EccSettings(BaseModel):
    """纠错演示的稳健工作点（高 m_bit / Gray 编码）"""
    operating_point: OperatingPoint = Field(
        default_factory=lambda: OperatingPoint(m_bit=12, n_bit=4, encoding=BitEncoding.GRAY)
    )
    trials: int = 200


class ExperimentConfig(BaseModel):
    """完整实验配置"""
    nominal: NominalConfig = Field(default_factory=NominalConfig)
    detection: DetectionConfig = Field(default_factory=DetectionConfig)
    challenge: ChallengeConfig = Field(default_factory=ChallengeConfig)
    ridge: RidgeConfig = Field(default_factory=RidgeConfig)
    keygen: KeygenSettings = Field(default_factory=KeygenSettings)
    grids: SweepGrids = Field(default_factory=SweepGrids)
    budget: SweepBudget = Field(default_factory=SweepBudget)
    operating_point: OperatingPoint = Field(default_factory=OperatingPoint)
    ecc: EccSettings = Field(default_factory=EccSettings)
    nist: NistParams = Field(default_factory=NistParams)
    alpha: float = 0.01
    master_seed: int = 1
    output_dir: Optional[str] = None

    @field_validator('alpha')
    @classmethod
    def validate_alpha(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError('显著性水平必须在 (0, 1) 之间')
        return v

    def digest(self) -> str:
        """配置摘要（输出目录不参与）"""
        canonical = self.model_dump_json(exclude={"output_dir"})
        return sha256_hex(canonical.encode("utf-8"))
