"""
命令行依赖
配置加载、产物存储与公共的芯片/校准读取
"""
import json
import logging
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ValidationError

from app.core.errors import ArtifactError, ConfigurationError
from app.db.storage import ArtifactStore, read_json
from app.models.device import DeviceProfile
from app.models.experiment import ExperimentConfig
from app.models.keys import CalibrationProfile

logger = logging.getLogger(__name__)

KIND_DEVICE = "device"
KIND_CHALLENGE = "challenge"
KIND_CALIBRATION = "calibration"
KIND_RESPONSE = "response"
KIND_HELPER = "helper"
KIND_SWEEP = "sweep"
KIND_BATTERY = "battery"


def load_config(path: Optional[Path]) -> ExperimentConfig:
    """读取实验配置（纯 JSON）；未给出时使用默认值"""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"配置文件不存在: {path}")
    try:
        return ExperimentConfig.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"配置文件不是合法 JSON: {e}") from e
    except ValidationError as e:
        raise ConfigurationError(f"配置非法: {e}") from e


def validate_request(model: type, **values) -> BaseModel:
    try:
        return model(**values)
    except ValidationError as e:
        raise ConfigurationError(f"参数非法: {e}") from e


def get_store(config: ExperimentConfig, root: Optional[Path] = None) -> ArtifactStore:
    return ArtifactStore(root or config.output_dir, config.digest(), config.master_seed)


def load_device(path: Path) -> DeviceProfile:
    device = read_json(path, KIND_DEVICE, DeviceProfile)
    if device.schema_tag != DeviceProfile.model_fields["schema_tag"].default:
        raise ArtifactError(f"不支持的芯片描述版本: {device.schema_tag}")
    return device


def load_calibration(path: Path) -> CalibrationProfile:
    return read_json(path, KIND_CALIBRATION, CalibrationProfile)
