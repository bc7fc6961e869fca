"""
模糊承诺服务
注册时公开密钥的 BCH 校验位，重建时纠错并用摘要校验
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.errors import InputError, ReconstructionRejected
from app.models.fuzzy import EccRow, HelperData
from app.models.keys import BinaryKey
from app.services.fuzzy.bch import BchCode, bch_build, bch_from_descriptor
from app.utils.bits import pack_bits
from app.utils.digest import sha256_hex

logger = logging.getLogger(__name__)


def _key_bits(key) -> np.ndarray:
    bits = key.bits if isinstance(key, BinaryKey) else key
    return np.asarray(bits, dtype=np.uint8).ravel()


def key_digest(bits: np.ndarray) -> str:
    return sha256_hex(str(bits.size).encode("ascii"), b":", pack_bits(bits))


def enroll(response_key, code: BchCode) -> Tuple[HelperData, np.ndarray]:
    """系统承诺：辅助数据为密钥自身的校验位"""
    bits = _key_bits(response_key)
    if bits.size != code.message_length:
        raise InputError(f"密钥长度 {bits.size} 与码的消息长度 {code.message_length} 不一致")
    helper = HelperData(
        code=code.descriptor(),
        parity=code.parity_of(bits),
        key_digest=key_digest(bits),
        key_length=int(bits.size),
    )
    return helper, bits.copy()


def reconstruct(helper: HelperData, noisy_key) -> np.ndarray:
    """译码 noisy ∥ parity；不可纠正或摘要不符时拒绝"""
    bits = _key_bits(noisy_key)
    if bits.size != helper.key_length:
        raise InputError(f"密钥长度 {bits.size} 与注册长度 {helper.key_length} 不一致")
    code = bch_from_descriptor(helper.code)
    result = code.decode(np.concatenate([bits, helper.parity]))
    if not result.ok:
        raise ReconstructionRejected("uncorrectable", f"t={code.t}")
    if key_digest(result.message) != helper.key_digest:
        raise ReconstructionRejected("digest_mismatch", f"{result.error_count} corrections")
    logger.debug(f"Key reconstructed with {result.error_count} corrections")
    return result.message


def _accepted(helper: HelperData, keys: np.ndarray) -> int:
    count = 0
    for row in keys:
        try:
            reconstruct(helper, row)
        except ReconstructionRejected:
            continue
        count += 1
    return count


def ecc_sweep(reference, intra_keys: np.ndarray, inter_keys: np.ndarray, t_values: Sequence[int]) -> List[EccRow]:
    """
    以 reference 注册，统计每个 t 下类内重复响应被纠正、类间响应被接受的比例；
    t = 0 时退化为逐位完全一致
    """
    ref = _key_bits(reference)
    intra_keys = np.asarray(intra_keys, dtype=np.uint8)
    inter_keys = np.asarray(inter_keys, dtype=np.uint8)
    if intra_keys.ndim != 2 or inter_keys.ndim != 2 or not intra_keys.size or not inter_keys.size:
        raise InputError("类内与类间密钥矩阵必须为非空二维数组")
    if intra_keys.shape[1] != ref.size or inter_keys.shape[1] != ref.size:
        raise InputError("密钥长度与注册密钥不一致")

    intra_flips = np.count_nonzero(intra_keys != ref, axis=1)
    inter_flips = np.count_nonzero(inter_keys != ref, axis=1)
    rows = []
    for t in sorted(set(t_values)):
        if t < 0:
            raise InputError("纠错能力不能为负")
        if t == 0:
            m, parity = 0, 0
            intra_ok = int(np.count_nonzero(intra_flips == 0))
            inter_ok = int(np.count_nonzero(inter_flips == 0))
        else:
            code = bch_build(ref.size, t)
            helper, _ = enroll(ref, code)
            m, parity = code.m, code.parity_bits
            intra_ok = _accepted(helper, intra_keys)
            inter_ok = _accepted(helper, inter_keys)
        rows.append(EccRow(
            t=t, m=m, parity_bits=parity,
            intra_corrected=intra_ok / intra_keys.shape[0],
            inter_corrected=inter_ok / inter_keys.shape[0],
            intra_flip_mean=float(intra_flips.mean()), intra_flip_max=int(intra_flips.max()),
            inter_flip_mean=float(inter_flips.mean()), inter_flip_min=int(inter_flips.min()),
        ))
        logger.info(f"ECC sweep t={t}: parity={parity} intra={rows[-1].intra_corrected:.3f} "
                    f"inter={rows[-1].inter_corrected:.3f}")
    return rows


def ecc_frame(rows: Sequence[EccRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=list(EccRow.model_fields))


def operating_margin(rows: Sequence[EccRow]) -> List[int]:
    """类内全部纠正且类间全部拒绝的 t 值"""
    return [row.t for row in rows if row.intra_corrected == 1.0 and row.inter_corrected == 0.0]
