"""
芯片相关命令
fabricate / challenge / calibrate
"""
import argparse
import logging

import numpy as np
import pandas as pd

from app.core.config import settings
from app.cli.deps import (
    KIND_CALIBRATION, KIND_CHALLENGE, KIND_DEVICE, get_store, load_config, load_device, validate_request,
)
from app.models.device import DeviceProfile
from app.models.experiment import ExperimentConfig
from app.models.keys import CalibrationProfile
from app.schemas.requests.commands import CalibrateRequest, ChallengeRequest, FabricateRequest
from app.schemas.responses.commands import CommandResponse, DeviceSummary
from app.services.challenge.challenge_service import challenge_from_config
from app.services.keygen.keygen_service import KeygenService
from app.services.photonics.device_service import describe_device, fabricate
from app.services.photonics.photonics_service import calibrate_adc
from app.utils.seeds import SeedSchedule

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("fabricate", help="制造一颗芯片并写出 DeviceProfile")
    p.add_argument("--seed", type=int, help="制造种子（缺省由主种子派生）")
    p.add_argument("--mrrs-per-node", type=int, help="每节点微环数（默认 6）")
    p.set_defaults(handler=cmd_fabricate, default_out="device.json")

    p = subparsers.add_parser("challenge", help="生成挑战序列（输入 + NARMA 目标）")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--length", type=int, help="序列长度（默认 2000）")
    p.set_defaults(handler=cmd_challenge, default_out="challenge.json")

    p = subparsers.add_parser("calibrate", help="ADC 满量程标定 + 权重分布校准")
    p.add_argument("--device", required=True)
    p.add_argument("--crps", type=int, help="校准 CRP 数（默认取配置）")
    p.add_argument("--device-out", help="另存带 ADC 量程的芯片描述（输入文件保持不变）")
    p.set_defaults(handler=cmd_calibrate, default_out="calibration.json")


async def cmd_fabricate(args: argparse.Namespace) -> dict:
    request = validate_request(FabricateRequest, config=args.config, out=args.out,
                               seed=args.seed, mrrs_per_node=args.mrrs_per_node)
    config = load_config(request.config)
    nominal = config.nominal
    if request.mrrs_per_node is not None:
        nominal = nominal.model_validate({**nominal.model_dump(), "mrrs_per_node": request.mrrs_per_node})
    fab_seed = request.seed if request.seed is not None else SeedSchedule(config.master_seed).fabrication(0)

    device = fabricate(nominal, fab_seed)
    store = get_store(config)
    path = store.write_json(store.target(request.out, args.default_out), KIND_DEVICE, device)

    summary = describe_device(device)
    return CommandResponse.success(DeviceSummary(
        path=str(path),
        fab_seed=fab_seed,
        channels=device.n_channels,
        fsr_ghz=float(np.mean(summary["fsr_ghz"])),
        mean_linewidth_ghz=float(np.mean(summary["linewidths_ghz"])),
        resonance_offsets_ghz=[round(v, 6) for v in summary["resonance_offsets_ghz"]],
    ).model_dump(), message="芯片制造完成")


async def cmd_challenge(args: argparse.Namespace) -> dict:
    request = validate_request(ChallengeRequest, config=args.config, out=args.out,
                               seed=args.seed, length=args.length)
    config = load_config(request.config)
    cfg = config.challenge
    if request.length is not None:
        cfg = cfg.model_validate({**cfg.model_dump(), "length": request.length})
    challenge = challenge_from_config(request.seed, cfg)

    store = get_store(config)
    path = store.write_json(store.target(request.out, args.default_out), KIND_CHALLENGE, challenge)
    store.write_csv(path.with_suffix(".csv"), pd.DataFrame({"x_in": challenge.x_in, "y_out": challenge.y_out}))
    return CommandResponse.success({
        "path": str(path), "seed": challenge.seed, "sub_seed": challenge.sub_seed, "length": challenge.length,
    }, message="挑战生成完成")


def ensure_adc(device: DeviceProfile, config: ExperimentConfig) -> DeviceProfile:
    """缺少 ADC 量程时按种子表在内存中标定；结果只由芯片与配置决定"""
    if device.adc_range is not None:
        return device
    x_cal = challenge_from_config(SeedSchedule(config.master_seed).adc_challenge(), config.challenge).modulator_input()
    return calibrate_adc(device, x_cal, config.detection)


async def calibrate_for(device: DeviceProfile, config: ExperimentConfig, crps: int,
                        jobs: int) -> tuple[DeviceProfile, CalibrationProfile]:
    """先标定 ADC（若缺失），再在 crps 个 CRP 上求 μ/σ"""
    device = ensure_adc(device, config)
    service = KeygenService(device, config.detection, config.ridge, config.challenge, jobs=jobs)
    challenge_seeds, noise_seeds = SeedSchedule(config.master_seed).calibration(crps)
    profile = await service.calibrate_device(challenge_seeds, noise_seeds, config.keygen.n_bit, config.keygen.encoding)
    return device, profile


async def cmd_calibrate(args: argparse.Namespace) -> dict:
    request = validate_request(CalibrateRequest, config=args.config, out=args.out, jobs=args.jobs,
                               device=args.device, crps=args.crps, device_out=args.device_out)
    config = load_config(request.config)
    device = load_device(request.device)
    device, profile = await calibrate_for(
        device, config, request.crps or config.keygen.calibration_size, request.jobs or settings.JOBS,
    )
    store = get_store(config)
    device_path = None
    if request.device_out is not None:
        device_path = str(store.write_json(request.device_out, KIND_DEVICE, device))
    path = store.write_json(store.target(request.out, args.default_out), KIND_CALIBRATION, profile)
    return CommandResponse.success({
        "path": str(path), "device_path": device_path,
        "mu": profile.mu, "sigma": profile.sigma, "ensemble_size": profile.ensemble_size,
    }, message="校准完成")
