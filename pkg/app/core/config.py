"""
ROSS-PUF 运行配置
运行时设置与统一的产物封装格式
"""
from pydantic_settings import BaseSettings
from pydantic import field_validator
from typing import Any, Dict, List, Optional, Union


class Settings(BaseSettings):
    """运行时配置（与实验参数无关）"""

    # 应用基础配置
    APP_NAME: str = "ross-puf"
    VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # 产物配置
    SCHEMA_VERSION: str = "ross-puf/1"
    OUTPUT_DIR: str = "runs"
    CSV_FLOAT_FORMAT: str = "%.10g"

    # 并行配置
    JOBS: int = 1

    # 统计配置
    MAX_PAIRS: int = 1_000_000  # 超过后改为固定种子的随机配对抽样
    HISTOGRAM_BINS: int = 50

    # 导出格式
    BIT_FORMATS: Union[List[str], str] = ["ascii01", "packed"]

    @field_validator('LOG_LEVEL')
    @classmethod
    def normalize_log_level(cls, v):
        """日志级别统一为大写"""
        return v.upper()

    @field_validator('JOBS')
    @classmethod
    def validate_jobs(cls, v):
        if v < 1:
            raise ValueError('JOBS 至少为 1')
        return v

    @field_validator('BIT_FORMATS')
    @classmethod
    def parse_bit_formats(cls, v):
        """解析比特流格式 - 支持逗号分隔字符串或列表"""
        if isinstance(v, str):
            return [fmt.strip() for fmt in v.split(',') if fmt.strip()]
        return v

    class Config:
        env_file = ".env"
        case_sensitive = True


# 创建全局配置实例
settings = Settings()


class ArtifactEnvelope:
    """产物文件统一封装格式（不含时间戳，保证重跑逐字节一致）"""

    @staticmethod
    def wrap(kind: str, data: Any, config_digest: Optional[str] = None,
             master_seed: Optional[int] = None) -> Dict[str, Any]:
        return {
            "schema": settings.SCHEMA_VERSION,
            "kind": kind,
            "version": settings.VERSION,
            "config_digest": config_digest,
            "master_seed": master_seed,
            "data": data,
        }

    @staticmethod
    def unwrap(payload: Dict[str, Any], kind: str) -> Dict[str, Any]:
        from app.core.errors import ArtifactError

        if payload.get("schema") != settings.SCHEMA_VERSION:
            raise ArtifactError(f"不支持的产物版本: {payload.get('schema')}")
        if payload.get("kind") != kind:
            raise ArtifactError(f"产物类型不匹配: 期望 {kind}, 实际 {payload.get('kind')}")
        return payload["data"]
