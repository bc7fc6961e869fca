"""
ROSS-PUF 产物存储
JSON 记录、CSV 表格与比特流文件的读写
"""
import json
import logging
from pathlib import Path
from typing import Any, Optional, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from app.core.config import ArtifactEnvelope, settings
from app.core.errors import ArtifactError
from app.models.randtests import BitFormat
from app.utils.bits import bits_to_str, pack_bits, str_to_bits, unpack_bits

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)
PathLike = Union[str, Path]

BIT_ORDER = "msb-first"


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def dumps(payload: Any) -> str:
    """排序键、无时间戳，重跑逐字节一致"""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def export_bits(bits, path: PathLike, fmt: BitFormat = BitFormat.ASCII01) -> Path:
    """ascii01: 每比特一个字符；packed: 高位在前的字节 + 长度 sidecar"""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = BitFormat(fmt)
    try:
        if fmt == BitFormat.ASCII01:
            path.write_text(bits_to_str(bits), encoding="ascii")
        else:
            path.write_bytes(pack_bits(bits))
            sidecar_path(path).write_text(
                dumps({"length": int(bits.size), "format": fmt.value, "bit_order": BIT_ORDER}), encoding="utf-8",
            )
    except OSError as e:
        raise ArtifactError(f"写入比特流失败: {path}: {e}") from e
    logger.info(f"Exported {bits.size} bits to {path} ({fmt.value})")
    return path


def import_bits(path: PathLike, fmt: Optional[BitFormat] = None) -> np.ndarray:
    """未指定格式时按 sidecar 是否存在判断"""
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"比特流文件不存在: {path}")
    sidecar = sidecar_path(path)
    fmt = BitFormat(fmt) if fmt is not None else (BitFormat.PACKED if sidecar.exists() else BitFormat.ASCII01)
    if fmt == BitFormat.ASCII01:
        try:
            return str_to_bits("".join(path.read_text(encoding="ascii").split()))
        except ValueError as e:
            raise ArtifactError(f"无法解析比特流 {path}: {e}") from e
    if not sidecar.exists():
        raise ArtifactError(f"packed 格式缺少 sidecar: {sidecar}")
    header = json.loads(sidecar.read_text(encoding="utf-8"))
    if header.get("bit_order", BIT_ORDER) != BIT_ORDER:
        raise ArtifactError(f"不支持的比特序: {header.get('bit_order')}")
    try:
        return unpack_bits(path.read_bytes(), int(header["length"]))
    except (KeyError, ValueError) as e:
        raise ArtifactError(f"packed 比特流与 sidecar 不一致: {e}") from e


class ArtifactStore:
    """输出目录；每个 JSON 产物都带配置摘要与主种子"""

    def __init__(self, root: Optional[PathLike] = None, config_digest: Optional[str] = None,
                 master_seed: Optional[int] = None):
        self.root = Path(root or settings.OUTPUT_DIR)
        self.config_digest = config_digest
        self.master_seed = master_seed

    def target(self, explicit: Optional[PathLike], default_name: str) -> Path:
        """命令行显式给出的路径原样使用，否则放在输出目录下"""
        return Path(explicit) if explicit else self.root / default_name

    def path(self, name: PathLike) -> Path:
        path = Path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_json(self, name: PathLike, kind: str, data: Union[BaseModel, dict, list]) -> Path:
        payload = data.model_dump(mode="json") if isinstance(data, BaseModel) else data
        path = self.path(name)
        envelope = ArtifactEnvelope.wrap(kind, payload, self.config_digest, self.master_seed)
        path.write_text(dumps(envelope), encoding="utf-8")
        logger.info(f"Wrote {kind} -> {path}")
        return path

    def write_csv(self, name: PathLike, frame: pd.DataFrame) -> Path:
        path = self.path(name)
        frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT)
        logger.info(f"Wrote {len(frame)} rows -> {path}")
        return path

    def write_bits(self, name: PathLike, bits, fmt: BitFormat = BitFormat.PACKED) -> Path:
        return export_bits(bits, self.path(name), fmt)


def read_envelope(path: PathLike) -> dict:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"产物文件不存在: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ArtifactError(f"产物文件不是合法 JSON: {path}") from e


def read_json(path: PathLike, kind: str, model: Optional[Type[ModelT]] = None):
    """读取并校验产物；给定 model 时返回模型实例"""
    data = ArtifactEnvelope.unwrap(read_envelope(path), kind)
    if model is None:
        return data
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ArtifactError(f"{path} 中的 {kind} 数据非法: {e}") from e


def read_csv(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"表格文件不存在: {path}")
    return pd.read_csv(path)
