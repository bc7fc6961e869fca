"""
纠错命令
enroll / reconstruct
"""
import argparse
import logging

import numpy as np

from app.cli.commands.keys import load_key_bits
from app.cli.deps import KIND_HELPER, get_store, load_config, validate_request
from app.db.storage import read_json
from app.models.fuzzy import HelperData
from app.models.randtests import BitFormat
from app.schemas.requests.commands import EnrollRequest, ReconstructRequest
from app.schemas.responses.commands import CommandResponse, HelperSummary, ReconstructSummary
from app.services.fuzzy.bch import bch_build
from app.services.fuzzy.fuzzy_service import enroll, reconstruct

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("enroll", help="为密钥生成公开辅助数据（BCH 校验位 + 摘要）")
    p.add_argument("--key", required=True, help="响应 JSON 或比特流文件")
    p.add_argument("-t", type=int, default=32, help="纠错能力（默认 32）")
    p.set_defaults(handler=cmd_enroll, default_out="helper.json")

    p = subparsers.add_parser("reconstruct", help="用辅助数据从带噪密钥恢复注册密钥")
    p.add_argument("--helper", required=True)
    p.add_argument("--key", required=True, help="重新测量得到的密钥")
    p.set_defaults(handler=cmd_reconstruct, default_out="recovered.bin")


async def cmd_enroll(args: argparse.Namespace) -> dict:
    request = validate_request(EnrollRequest, config=args.config, out=args.out, key=args.key, t=args.t)
    config = load_config(request.config)
    bits = load_key_bits(request.key)
    code = bch_build(bits.size, request.t)
    helper, _ = enroll(bits, code)

    store = get_store(config)
    path = store.write_json(store.target(request.out, args.default_out), KIND_HELPER, helper)
    return CommandResponse.success(HelperSummary(
        path=str(path), key_bits=int(bits.size), parity_bits=code.parity_bits, t=code.t, m=code.m,
    ).model_dump(), message="注册完成")


async def cmd_reconstruct(args: argparse.Namespace) -> dict:
    request = validate_request(ReconstructRequest, config=args.config, out=args.out,
                               helper=args.helper, key=args.key)
    config = load_config(request.config)
    helper = read_json(request.helper, KIND_HELPER, HelperData)
    noisy = load_key_bits(request.key)
    recovered = reconstruct(helper, noisy)

    store = get_store(config)
    path = store.write_bits(store.target(request.out, args.default_out), recovered, BitFormat.PACKED)
    return CommandResponse.success(ReconstructSummary(
        path=str(path), key_bits=int(recovered.size), corrected=int(np.count_nonzero(recovered != noisy)),
    ).model_dump(), message="密钥恢复成功")
