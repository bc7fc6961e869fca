"""
扫描服务
类内/类间汉明统计、(m_bit, n_bit) 网格与微环数量扫描
"""
import asyncio
import logging
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.errors import InputError
from app.models.challenge import Challenge
from app.models.device import DeviceProfile, NominalConfig
from app.models.experiment import ExperimentConfig
from app.models.keys import BitEncoding, CalibrationProfile
from app.models.metrics import (
    BitGridResult, GridCell, HammingStats, MrrCountRow, OperatingPoint, SweepBudget,
)
from app.services.keygen.keygen_service import KeygenService, calibrate, quantize_bits, to_uniform
from app.services.metrics.metrics_service import eer_fit, key_matrix_stats, key_uniformity
from app.services.photonics.device_service import fabricate
from app.services.photonics.photonics_service import calibrate_adc
from app.utils.seeds import SeedSchedule, SeedStream, derive_seeds

logger = logging.getLogger(__name__)

FEASIBLE_ADC_BITS = 10      # 40 GSa/s 下 ADC 的分辨率上限
PRNG_INTRA_MAX = 0.25
PRNG_INTER_MIN = 0.45


class Captured(NamedTuple):
    """一次 ADC 前测量"""
    challenge: Challenge
    noisy: np.ndarray
    noise_seed: int


class OperatingKeys(NamedTuple):
    intra: np.ndarray      # [trials, L]，同一挑战的重复响应
    inter: np.ndarray      # [challenges, L]，每个挑战一个响应
    profile: CalibrationProfile


def quantize_matrix(u: np.ndarray, n_bit: int, encoding: BitEncoding) -> np.ndarray:
    """[k, W] 的均匀化权重 → [k, W·n_bit] 密钥矩阵"""
    return quantize_bits(u.ravel(), n_bit, encoding).bits.reshape(u.shape[0], -1)


def cells_frame(result: BitGridResult) -> pd.DataFrame:
    return pd.DataFrame([cell.model_dump() for cell in result.cells], columns=list(GridCell.model_fields))


def mrr_frame(rows: Sequence[MrrCountRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=list(MrrCountRow.model_fields))


class SweepService:
    """所有随机性都来自实验配置的主种子"""

    def __init__(self, config: ExperimentConfig, jobs: Optional[int] = None, max_pairs: Optional[int] = None):
        self.config = config
        self.jobs = jobs or settings.JOBS
        self.max_pairs = max_pairs or settings.MAX_PAIRS
        self.schedule = SeedSchedule(config.master_seed)

    def prepare_device(self, nominal: Optional[NominalConfig] = None, device_index: int = 0) -> DeviceProfile:
        """制造芯片并做无噪 ADC 标定"""
        device = fabricate(nominal or self.config.nominal, self.schedule.fabrication(device_index))
        service = self.keygen(device)
        x_cal = service.challenge(self.schedule.adc_challenge()).modulator_input()
        return calibrate_adc(device, x_cal, self.config.detection)

    def keygen(self, device: DeviceProfile) -> KeygenService:
        return KeygenService(device, self.config.detection, self.config.ridge, self.config.challenge, jobs=self.jobs)

    async def capture(self, service: KeygenService, pairs) -> List[Captured]:
        """并行测量 (challenge_seed, noise_seed)；挑战按种子缓存"""
        semaphore = asyncio.Semaphore(self.jobs)
        cache: Dict[int, Challenge] = {}

        def measure(challenge_seed: int, noise_seed: int) -> Captured:
            challenge = cache.get(challenge_seed)
            if challenge is None:
                challenge = cache.setdefault(challenge_seed, service.challenge(challenge_seed))
            noisy, _ = service.detect(challenge, noise_seed)
            return Captured(challenge, noisy, noise_seed)

        async def one(challenge_seed: int, noise_seed: int) -> Captured:
            async with semaphore:
                return await asyncio.to_thread(measure, challenge_seed, noise_seed)

        return list(await asyncio.gather(*(one(c, n) for c, n in pairs)))

    async def weights(self, service: KeygenService, captured: Sequence[Captured], m_bit: int) -> np.ndarray:
        """指定 ADC 位数下的 W_out 矩阵 [k, W]"""
        semaphore = asyncio.Semaphore(self.jobs)

        async def one(item: Captured) -> np.ndarray:
            async with semaphore:
                response = await asyncio.to_thread(
                    service.response_from_samples, item.challenge, item.noisy, item.noise_seed, m_bit,
                )
                return response.weights

        return np.stack(await asyncio.gather(*(one(item) for item in captured)))

    async def capture_calibration(self, service: KeygenService, budget: Optional[SweepBudget] = None) -> List[Captured]:
        budget = budget or self.config.budget
        return await self.capture(service, zip(*self.schedule.calibration(budget.calibration_crps)))

    async def calibration_profile(self, service: KeygenService, captured: Sequence[Captured],
                                  op: OperatingPoint) -> CalibrationProfile:
        profile = calibrate(await self.weights(service, captured, op.m_bit), n_bit=op.n_bit, encoding=op.encoding)
        return profile.model_copy(update={"fab_seed": service.device.fab_seed, "adc_bits": op.m_bit})

    async def keys(self, service: KeygenService, captured: Sequence[Captured], op: OperatingPoint,
                   profile: CalibrationProfile) -> np.ndarray:
        u = to_uniform(await self.weights(service, captured, op.m_bit), profile)
        return quantize_matrix(u, op.n_bit, op.encoding)

    async def _profile_for(self, service: KeygenService, op: OperatingPoint,
                           profile: Optional[CalibrationProfile]) -> CalibrationProfile:
        if profile is not None:
            return profile
        return await self.calibration_profile(service, await self.capture_calibration(service), op)

    async def collect_intra(self, device: DeviceProfile, challenge_seed: int, trials: int,
                            op: OperatingPoint, profile: Optional[CalibrationProfile] = None) -> HammingStats:
        """同一挑战、不同噪声种子的重复响应之间的距离"""
        if trials < 2:
            raise InputError("类内测量至少需要 2 次重复")
        service = self.keygen(device)
        profile = await self._profile_for(service, op, profile)
        captured = await self.capture(service, [(challenge_seed, n) for n in self.schedule.intra_noise(trials)])
        keys = await self.keys(service, captured, op, profile)
        return key_matrix_stats(keys, self.max_pairs, self.schedule.pairs(0))

    async def collect_inter(self, device: DeviceProfile, challenge_seeds: Sequence[int],
                            op: OperatingPoint, profile: Optional[CalibrationProfile] = None) -> HammingStats:
        """每个挑战一个响应（新噪声种子），所有响应两两之间的距离"""
        if len(challenge_seeds) < 2:
            raise InputError("类间测量至少需要 2 个挑战")
        service = self.keygen(device)
        profile = await self._profile_for(service, op, profile)
        noise = derive_seeds(self.schedule.master_seed, SeedStream.NOISE, len(challenge_seeds), 1)
        captured = await self.capture(service, zip(challenge_seeds, noise))
        keys = await self.keys(service, captured, op, profile)
        return key_matrix_stats(keys, self.max_pairs, self.schedule.pairs(1))

    async def operating_keys(self, device: DeviceProfile, op: OperatingPoint, trials: int,
                             challenges: int) -> OperatingKeys:
        """某工作点上的类内与类间密钥矩阵"""
        service = self.keygen(device)
        profile = await self._profile_for(service, op, None)
        intra = await self.capture(
            service, [(self.schedule.intra_challenge(), n) for n in self.schedule.intra_noise(trials)],
        )
        inter = await self.capture(service, zip(*self.schedule.inter(challenges)))
        return OperatingKeys(
            intra=await self.keys(service, intra, op, profile),
            inter=await self.keys(service, inter, op, profile),
            profile=profile,
        )

    async def collect_inter_device(self, device_count: int, op: OperatingPoint) -> HammingStats:
        """同一挑战在不同芯片上的响应距离（唯一性）"""
        if device_count < 2:
            raise InputError("唯一性测量至少需要 2 颗芯片")
        challenge_seed = self.schedule.intra_challenge()
        noise = self.schedule.device_noise(device_count)
        rows = []
        for index in range(device_count):
            device = self.prepare_device(device_index=index)
            service = self.keygen(device)
            profile = await self._profile_for(service, op, None)
            captured = await self.capture(service, [(challenge_seed, noise[index])])
            rows.append((await self.keys(service, captured, op, profile))[0])
            logger.info(f"Inter-device: device {index + 1}/{device_count} (fab_seed={device.fab_seed}) done")
        return key_matrix_stats(np.stack(rows), self.max_pairs, self.schedule.pairs(2))

    async def sweep_bit_grid(self, device: DeviceProfile, m_bits: Sequence[int], n_bits: Sequence[int],
                             budget: Optional[SweepBudget] = None) -> BitGridResult:
        """模拟采样只做一次，按 m_bit 重新量化与训练，按 n_bit 重新分箱"""
        budget = budget or self.config.budget
        if any(not 1 <= b <= 16 for b in [*m_bits, *n_bits]):
            raise InputError("位数必须在 [1, 16] 之间")
        op = self.config.operating_point
        encoding = op.encoding
        service = self.keygen(device)

        calibration = await self.capture_calibration(service, budget)
        intra = await self.capture(
            service, [(self.schedule.intra_challenge(), n) for n in self.schedule.intra_noise(budget.intra_trials)],
        )
        inter = await self.capture(service, zip(*self.schedule.inter(budget.inter_challenges)))
        logger.info(f"Bit-grid sweep: captured {len(calibration)} calibration, {len(intra)} intra, "
                    f"{len(inter)} inter measurements")

        result = BitGridResult(cells=[])
        for m_bit in m_bits:
            profile = calibrate(await self.weights(service, calibration, m_bit), encoding=encoding)
            intra_u = to_uniform(await self.weights(service, intra, m_bit), profile)
            inter_u = to_uniform(await self.weights(service, inter, m_bit), profile)
            for n_bit in n_bits:
                intra_keys = quantize_matrix(intra_u, n_bit, encoding)
                inter_keys = quantize_matrix(inter_u, n_bit, encoding)
                intra_stats = key_matrix_stats(intra_keys, self.max_pairs, self.schedule.pairs(0, m_bit, n_bit))
                inter_stats = key_matrix_stats(inter_keys, self.max_pairs, self.schedule.pairs(1, m_bit, n_bit))
                report = eer_fit(intra_stats, inter_stats)
                result.cells.append(GridCell(
                    m_bit=m_bit, n_bit=n_bit,
                    intra_mean=intra_stats.mean, intra_std=intra_stats.std,
                    inter_mean=inter_stats.mean, inter_std=inter_stats.std,
                    eer=report.eer, feasible=m_bit <= FEASIBLE_ADC_BITS, threshold=report.threshold,
                    prng_region=intra_stats.mean < PRNG_INTRA_MAX and inter_stats.mean >= PRNG_INTER_MIN,
                    key_bits=int(intra_keys.shape[1]),
                ))
                if (m_bit, n_bit) == (op.m_bit, op.n_bit):
                    result.operating_intra = intra_stats
                    result.operating_inter = inter_stats
                    result.uniformity = key_uniformity(inter_keys)
            logger.info(f"Bit-grid sweep: m_bit={m_bit} done ({len(n_bits)} cells)")
        return result

    async def sweep_mrr_count(self, counts: Sequence[int], budget: Optional[SweepBudget] = None) -> List[MrrCountRow]:
        """按每节点微环数制造变体芯片（同一制造种子）"""
        budget = budget or self.config.budget
        if not counts or any(c < 1 for c in counts):
            raise InputError("微环数量至少为 1")
        op = self.config.operating_point
        rows = []
        for count in counts:
            nominal = NominalConfig.model_validate({**self.config.nominal.model_dump(), "mrrs_per_node": count})
            device = self.prepare_device(nominal)
            keys = await self.operating_keys(device, op, budget.intra_trials, budget.inter_challenges)
            intra_stats = key_matrix_stats(keys.intra, self.max_pairs, self.schedule.pairs(0, count))
            inter_stats = key_matrix_stats(keys.inter, self.max_pairs, self.schedule.pairs(1, count))
            report = eer_fit(intra_stats, inter_stats)
            rows.append(MrrCountRow(
                mrrs_per_node=count, channels=device.n_channels, key_bits=int(keys.intra.shape[1]),
                intra_mean=intra_stats.mean, intra_std=intra_stats.std,
                inter_mean=inter_stats.mean, inter_std=inter_stats.std,
                eer=report.eer, threshold=report.threshold,
            ))
            logger.info(f"MRR sweep: {count} MRRs/node -> {rows[-1].key_bits}-bit keys, EER={report.eer:.3e}")
        return rows
