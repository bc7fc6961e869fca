"""
纠错数据模型
BCH 码描述、辅助数据与译码结果
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from app.models.arrays import BitArray


class BchDescriptor(BaseModel):
    """缩短二元 BCH 码的可序列化描述"""
    m: int
    n: int                 # 2^m - 1
    k: int                 # 未缩短时的信息位数
    t: int
    shortening: int
    message_length: int    # k - shortening
    parity_bits: int       # n - k
    primitive_poly: int
    generator: str         # 生成多项式（十六进制，高次在前）

    @property
    def codeword_length(self) -> int:
        return self.message_length + self.parity_bits


class HelperData(BaseModel):
    """公开辅助数据：密钥的校验位 + 完整性摘要"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    code: BchDescriptor
    parity: BitArray
    key_digest: str
    key_length: int


class DecodeResult(BaseModel):
    """译码结果；失败时 ok=False 而非抛异常"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    ok: bool
    message: Optional[BitArray] = None
    error_count: int = 0
    error_positions: List[int] = []


class EccRow(BaseModel):
    """纠错预算扫描的一行"""
    t: int
    m: int
    parity_bits: int
    intra_corrected: float     # 类内重复响应被完全纠正的比例
    inter_corrected: float     # 类间响应被（错误地）接受的比例
    intra_flip_mean: float
    intra_flip_max: int
    inter_flip_mean: float
    inter_flip_min: int
