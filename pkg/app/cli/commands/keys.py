"""
响应与密钥命令
respond / corpus / export-bits
"""
import argparse
import logging

import numpy as np

from app.cli.commands.device import calibrate_for, ensure_adc
from app.cli.deps import (
    KIND_RESPONSE, get_store, load_calibration, load_config, load_device, validate_request,
)
from app.core.config import settings
from app.core.errors import ArtifactError, CalibrationError
from app.db.storage import import_bits, read_envelope
from app.models.readout import Response
from app.models.randtests import BitFormat
from app.schemas.requests.commands import CorpusRequest, ExportBitsRequest, RespondRequest
from app.schemas.responses.commands import CommandResponse, ResponseSummary
from app.services.keygen.keygen_service import KeygenService
from app.utils.seeds import SeedSchedule

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("respond", help="对一个挑战求响应 W_out 与密钥")
    p.add_argument("--device", required=True)
    p.add_argument("--challenge-seed", type=int, required=True)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--calibration", help="已有的校准文件；缺省时在内存中校准")
    p.add_argument("--no-calibrate", action="store_true", help="缺少校准时报错而不是自动校准")
    p.set_defaults(handler=cmd_respond, default_out="response.json")

    p = subparsers.add_parser("corpus", help="在连续挑战种子上生成密钥并拼接为比特流")
    p.add_argument("--device", required=True)
    p.add_argument("--calibration", required=True)
    p.add_argument("--start", type=int, default=0, help="起始挑战下标")
    p.add_argument("--count", type=int, default=100, help="挑战数")
    p.set_defaults(handler=cmd_corpus, default_out="corpus.bin")

    p = subparsers.add_parser("export-bits", help="把响应文件中的密钥或比特流导出为 ascii01 / packed")
    p.add_argument("--input", required=True)
    p.add_argument("--format", dest="formats", action="append", choices=[f.value for f in BitFormat],
                   help="可重复；默认取 BIT_FORMATS 设置")
    p.set_defaults(handler=cmd_export_bits, default_out="bits")


def load_key_bits(path) -> np.ndarray:
    """响应 JSON 中的密钥，或 ascii01 / packed 比特流文件"""
    if str(path).endswith(".json"):
        payload = read_envelope(path)
        if payload.get("kind") != KIND_RESPONSE:
            raise ArtifactError(f"{path} 不是响应文件")
        response = Response.model_validate(payload["data"])
        if response.key is None:
            raise ArtifactError(f"{path} 中没有密钥")
        return response.key.bits
    return import_bits(path)


async def cmd_respond(args: argparse.Namespace) -> dict:
    request = validate_request(
        RespondRequest, config=args.config, out=args.out, jobs=args.jobs, device=args.device,
        challenge_seed=args.challenge_seed, noise_seed=args.noise_seed,
        calibration=args.calibration, no_calibrate=args.no_calibrate,
    )
    config = load_config(request.config)
    device = load_device(request.device)
    store = get_store(config)
    jobs = request.jobs or settings.JOBS

    calibrated_now = False
    if request.calibration is not None:
        profile = load_calibration(request.calibration)
        device = ensure_adc(device, config)
    elif request.no_calibrate:
        raise CalibrationError("缺少校准文件（--no-calibrate 已指定）")
    else:
        # 只在内存中校准，不写任何额外文件
        device, profile = await calibrate_for(device, config, config.keygen.calibration_size, jobs)
        calibrated_now = True

    if profile.adc_bits is not None and profile.adc_bits != config.detection.adc_bits:
        raise CalibrationError(f"校准时 ADC 位数为 {profile.adc_bits}，当前配置为 {config.detection.adc_bits}")
    if profile.fab_seed is not None and profile.fab_seed != device.fab_seed:
        raise CalibrationError("校准文件属于另一颗芯片")

    service = KeygenService(device, config.detection, config.ridge, config.challenge, jobs=jobs)
    response = service.respond(service.challenge(request.challenge_seed), request.noise_seed, profile)

    path = store.write_json(store.target(request.out, args.default_out), KIND_RESPONSE, response)
    key_path = store.write_bits(path.with_suffix(".bin"), response.key.bits, BitFormat.PACKED)
    logger.info(f"Response: {response.key.length}-bit key, NMSE={response.nmse:.4f}")
    return CommandResponse.success(ResponseSummary(
        path=str(path), key_path=str(key_path), key_bits=response.key.length,
        weight_count=response.weight_count, nmse=response.nmse, calibrated_now=calibrated_now,
    ).model_dump(), message="响应完成")


async def cmd_corpus(args: argparse.Namespace) -> dict:
    request = validate_request(
        CorpusRequest, config=args.config, out=args.out, jobs=args.jobs, device=args.device,
        calibration=args.calibration, start=args.start, count=args.count,
    )
    config = load_config(request.config)
    device = ensure_adc(load_device(request.device), config)
    profile = load_calibration(request.calibration)
    service = KeygenService(device, config.detection, config.ridge, config.challenge,
                            jobs=request.jobs or settings.JOBS)

    challenge_seeds, noise_seeds = SeedSchedule(config.master_seed).corpus(request.start, request.count)
    responses = await service.respond_many(zip(challenge_seeds, noise_seeds), profile)
    bits = np.concatenate([r.key.bits for r in responses])

    store = get_store(config)
    path = store.write_bits(store.target(request.out, args.default_out), bits, BitFormat.PACKED)
    return CommandResponse.success({
        "path": str(path), "keys": len(responses), "key_bits": responses[0].key.length, "total_bits": int(bits.size),
    }, message="语料生成完成")


async def cmd_export_bits(args: argparse.Namespace) -> dict:
    request = validate_request(
        ExportBitsRequest, config=args.config, out=args.out, input=args.input,
        **({"formats": args.formats} if args.formats else {}),
    )
    config = load_config(request.config)
    bits = load_key_bits(request.input)
    store = get_store(config)
    base = store.target(request.out, args.default_out)
    outputs = []
    for fmt in request.formats:
        suffix = ".txt" if fmt == BitFormat.ASCII01 else ".bin"
        outputs.append(str(store.write_bits(base.with_suffix(suffix), bits, fmt)))
    return CommandResponse.success({"outputs": outputs, "bits": int(bits.size)}, message="导出完成")
