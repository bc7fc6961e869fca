"""
摘要工具
配置摘要与密钥完整性摘要统一使用 SHA-256
"""
from cryptography.hazmat.primitives import hashes


def sha256_hex(*chunks: bytes) -> str:
    h = hashes.Hash(hashes.SHA256())
    for chunk in chunks:
        h.update(chunk)
    return h.finalize().hex()
