"""
命令行响应模式
子命令结束时打印的摘要
"""
from typing import Dict, List, Optional

from pydantic import BaseModel


class CommandResponse:
    """统一输出格式（不含时间戳）"""

    @staticmethod
    def success(data=None, message="success", code=0):
        return {
            "success": True,
            "code": code,
            "message": message,
            "data": data,
        }

    @staticmethod
    def error(message="error", code=2, errors=None):
        return {
            "success": False,
            "code": code,
            "message": message,
            "errors": errors,
        }


class DeviceSummary(BaseModel):
    """制造结果摘要"""
    path: str
    fab_seed: int
    channels: int
    fsr_ghz: float
    mean_linewidth_ghz: float
    resonance_offsets_ghz: List[float]


class ResponseSummary(BaseModel):
    path: str
    key_path: Optional[str] = None
    key_bits: int
    weight_count: int
    nmse: float
    calibrated_now: bool = False


class SweepSummary(BaseModel):
    kind: str
    outputs: List[str]
    rows: int
    margin: Optional[List[int]] = None     # ECC: 类内全纠正且类间全拒绝的 t
    extra: Dict[str, float] = {}


class HelperSummary(BaseModel):
    path: str
    key_bits: int
    parity_bits: int
    t: int
    m: int


class ReconstructSummary(BaseModel):
    path: str
    key_bits: int
    corrected: int


class BatterySummary(BaseModel):
    report_path: str
    table_path: str
    all_passed: bool
    passed: Dict[str, str]
    skipped: List[str] = []
