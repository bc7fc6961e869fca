"""
命令行请求模式
各子命令参数的校验
"""
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from app.core.config import settings
from app.models.randtests import BitFormat


class CommandRequest(BaseModel):
    """所有子命令共有的参数"""
    config: Optional[Path] = None
    out: Optional[Path] = None
    jobs: Optional[int] = None

    @field_validator('jobs')
    @classmethod
    def validate_jobs(cls, v):
        if v is not None and v < 1:
            raise ValueError('--jobs 至少为 1')
        return v


class FabricateRequest(CommandRequest):
    seed: Optional[int] = None           # 缺省时由主种子派生
    mrrs_per_node: Optional[int] = None

    @field_validator('seed')
    @classmethod
    def validate_seed(cls, v):
        if v is not None and v < 0:
            raise ValueError('制造种子必须为非负整数')
        return v

    @field_validator('mrrs_per_node')
    @classmethod
    def validate_mrrs(cls, v):
        if v is not None and v < 1:
            raise ValueError('每节点微环数至少为 1')
        return v


class ChallengeRequest(CommandRequest):
    seed: int
    length: Optional[int] = None


class CalibrateRequest(CommandRequest):
    device: Path
    crps: Optional[int] = None
    device_out: Optional[Path] = None    # 带 ADC 量程的芯片描述另存路径

    @field_validator('crps')
    @classmethod
    def validate_crps(cls, v):
        if v is not None and v < 2:
            raise ValueError('校准至少需要 2 个 CRP')
        return v


class RespondRequest(CommandRequest):
    device: Path
    challenge_seed: int
    noise_seed: int = 0
    calibration: Optional[Path] = None
    no_calibrate: bool = False


SWEEP_KINDS = ["bitgrid", "mrr", "ecc", "uniqueness"]


class SweepRequest(CommandRequest):
    kind: str

    @field_validator('kind')
    @classmethod
    def validate_kind(cls, v):
        if v not in SWEEP_KINDS:
            raise ValueError(f'扫描类型必须是 {", ".join(SWEEP_KINDS)} 之一')
        return v


class EnrollRequest(CommandRequest):
    key: Path
    t: int = 32

    @field_validator('t')
    @classmethod
    def validate_t(cls, v):
        if v < 1:
            raise ValueError('纠错能力 t 至少为 1')
        return v


class ReconstructRequest(CommandRequest):
    helper: Path
    key: Path


class NistRequest(CommandRequest):
    input: Path
    alpha: Optional[float] = None
    sequences: int = 1
    permute_block: Optional[int] = None
    lenient: bool = False

    @field_validator('sequences')
    @classmethod
    def validate_sequences(cls, v):
        if v < 1:
            raise ValueError('序列数至少为 1')
        return v


class ExportBitsRequest(CommandRequest):
    input: Path
    formats: List[BitFormat] = Field(default_factory=lambda: [BitFormat(f) for f in settings.BIT_FORMATS])


class CorpusRequest(CommandRequest):
    device: Path
    calibration: Path
    start: int = 0
    count: int = 100

    @field_validator('count')
    @classmethod
    def validate_count(cls, v):
        if v < 1:
            raise ValueError('挑战数至少为 1')
        return v
