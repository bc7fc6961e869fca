"""
数组字段类型
numpy 数组在 pydantic 模型中的校验与序列化
"""
from typing import Annotated

import numpy as np
from pydantic import BeforeValidator, PlainSerializer

from app.utils.bits import bits_to_str, str_to_bits


def _as_float_array(v):
    return np.asarray(v, dtype=np.float64)


def _as_bit_array(v):
    if isinstance(v, str):
        return str_to_bits(v)
    return np.asarray(v, dtype=np.uint8)


def _to_list(a):
    return np.asarray(a).tolist()


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_float_array),
    PlainSerializer(_to_list, return_type=list),
]

# 比特数组序列化为 '0'/'1' 字符串
BitArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_bit_array),
    PlainSerializer(bits_to_str, return_type=str),
]
