"""
密钥生成服务
W_out → 标准正态 CDF → n_bit 量化；编排 挑战 → 响应 → 密钥 全流程
"""
import asyncio
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from app.core.errors import CalibrationError, InputError
from app.models.challenge import Challenge, ChallengeConfig
from app.models.device import DetectionConfig, DeviceProfile
from app.models.keys import BinaryKey, BitEncoding, CalibrationProfile
from app.models.readout import Response, RidgeConfig
from app.services.challenge.challenge_service import challenge_from_config
from app.services.photonics.photonics_service import RossSimulator
from app.services.readout.readout_service import fit_readout
from app.utils.bits import gray_encode, int_to_bits

logger = logging.getLogger(__name__)


def calibrate(weight_ensemble, n_bit: int = 4, encoding: BitEncoding = BitEncoding.NATURAL,
              ensemble_size: Optional[int] = None) -> CalibrationProfile:
    """由多个 CRP 的权重合并得到 μ/σ"""
    if isinstance(weight_ensemble, np.ndarray):
        pooled = weight_ensemble.ravel().astype(np.float64)
        count = weight_ensemble.shape[0] if weight_ensemble.ndim > 1 else 1
    else:
        vectors = [np.asarray(w, dtype=np.float64).ravel() for w in weight_ensemble]
        pooled = np.concatenate(vectors) if vectors else np.empty(0)
        count = len(vectors)
    if pooled.size < 2 or not np.all(np.isfinite(pooled)):
        raise CalibrationError("校准集合至少需要 2 个有限权重")
    sigma = float(np.std(pooled, ddof=1))
    if not sigma > 0.0:
        raise CalibrationError("权重集合退化（σ = 0），无法校准")
    return CalibrationProfile(
        mu=float(np.mean(pooled)), sigma=sigma, n_bit=n_bit, encoding=encoding,
        ensemble_size=ensemble_size if ensemble_size is not None else count,
    )


def to_uniform(weights, profile: CalibrationProfile) -> np.ndarray:
    """u = Φ((w - μ) / σ)"""
    return special.ndtr((np.asarray(weights, dtype=np.float64) - profile.mu) / profile.sigma)


def quantize_bits(u_values, n_bit: int, encoding: BitEncoding = BitEncoding.NATURAL) -> BinaryKey:
    """分箱 floor(u·2^n)，u=1 归入最高箱；按权重顺序拼接"""
    u = np.asarray(u_values, dtype=np.float64).ravel()
    if u.size and (not np.all(np.isfinite(u)) or u.min() < 0.0 or u.max() > 1.0):
        raise InputError("u 必须在 [0, 1] 之间")
    if not 1 <= n_bit <= 16:
        raise InputError("n_bit 必须在 1-16 之间")
    bins = 1 << n_bit
    index = np.minimum(np.floor(u * bins).astype(np.int64), bins - 1)
    if BitEncoding(encoding) == BitEncoding.GRAY:
        index = gray_encode(index)
    return BinaryKey(bits=int_to_bits(index, n_bit), bits_per_weight=n_bit, weight_count=u.size)


def weights_to_key(weights, profile: CalibrationProfile) -> BinaryKey:
    return quantize_bits(to_uniform(weights, profile), profile.n_bit, profile.encoding)


class KeygenService:
    """绑定一颗芯片与一组配置的响应服务"""

    def __init__(self, device: DeviceProfile, det_cfg: DetectionConfig, ridge_cfg: RidgeConfig,
                 challenge_cfg: Optional[ChallengeConfig] = None, jobs: int = 1):
        self.device = device
        self.det_cfg = det_cfg
        self.ridge_cfg = ridge_cfg
        self.challenge_cfg = challenge_cfg or ChallengeConfig()
        self.jobs = jobs
        self.simulator = RossSimulator(device)

    def challenge(self, seed: int) -> Challenge:
        return challenge_from_config(seed, self.challenge_cfg)

    def detection(self, noise_seed: int, adc_bits: Optional[int] = None) -> DetectionConfig:
        update = {"noise_seed": noise_seed}
        if adc_bits is not None:
            update["adc_bits"] = adc_bits
        return self.det_cfg.model_copy(update=update)

    def detect(self, challenge: Challenge, noise_seed: int) -> Tuple[np.ndarray, np.ndarray]:
        """ADC 前的 (含噪, 无噪) 采样；与 m_bit 无关，扫描时可复用"""
        return self.simulator.detect(challenge.modulator_input(), self.detection(noise_seed))

    def response_from_samples(self, challenge: Challenge, noisy: np.ndarray, noise_seed: int,
                              adc_bits: Optional[int] = None, clean: Optional[np.ndarray] = None) -> Response:
        """由 ADC 前采样训练读出层；芯片已标定 ADC 时无需无噪采样"""
        cfg = self.detection(noise_seed, adc_bits)
        reference = clean if clean is not None else noisy
        states = self.simulator.digitize(noisy, self.simulator.adc_range_for(reference, cfg), cfg)
        readout = fit_readout(states, challenge.x_in, challenge.y_out, self.ridge_cfg)
        return Response(
            weights=readout.weights, intercept=readout.intercept, nmse=readout.nmse,
            fab_seed=self.device.fab_seed, challenge_seed=challenge.seed,
            noise_seed=noise_seed, adc_bits=cfg.adc_bits,
        )

    def response_weights(self, challenge: Challenge, noise_seed: int, adc_bits: Optional[int] = None) -> Response:
        noisy, clean = self.detect(challenge, noise_seed)
        return self.response_from_samples(challenge, noisy, noise_seed, adc_bits, clean)

    def respond(self, challenge: Challenge, noise_seed: int, profile: CalibrationProfile) -> Response:
        response = self.response_weights(challenge, noise_seed)
        return response.model_copy(update={"key": weights_to_key(response.weights, profile)})

    def _respond_seeds(self, challenge_seed: int, noise_seed: int,
                       profile: Optional[CalibrationProfile]) -> Response:
        challenge = self.challenge(challenge_seed)
        if profile is None:
            return self.response_weights(challenge, noise_seed)
        return self.respond(challenge, noise_seed, profile)

    async def respond_many(self, pairs: Iterable[Tuple[int, int]],
                           profile: Optional[CalibrationProfile] = None) -> List[Response]:
        """并行评估多个 (challenge_seed, noise_seed)；结果按提交顺序返回"""
        semaphore = asyncio.Semaphore(self.jobs)

        async def one(challenge_seed: int, noise_seed: int) -> Response:
            async with semaphore:
                return await asyncio.to_thread(self._respond_seeds, challenge_seed, noise_seed, profile)

        return list(await asyncio.gather(*(one(c, n) for c, n in pairs)))

    async def calibrate_device(self, challenge_seeds: Sequence[int], noise_seeds: Sequence[int],
                               n_bit: int, encoding: BitEncoding) -> CalibrationProfile:
        """在 CRP 集合上合并权重求 μ/σ"""
        responses = await self.respond_many(zip(challenge_seeds, noise_seeds))
        profile = calibrate([r.weights for r in responses], n_bit=n_bit, encoding=encoding)
        logger.info(f"Calibrated on {len(responses)} CRPs: mu={profile.mu:.4f} sigma={profile.sigma:.4f}")
        return profile.model_copy(update={"fab_seed": self.device.fab_seed, "adc_bits": self.det_cfg.adc_bits})


def respond(device: DeviceProfile, challenge: Challenge, det_cfg: DetectionConfig,
            ridge_cfg: RidgeConfig, profile: CalibrationProfile) -> Response:
    """simulate_states → build_features → ridge_fit → nmse → to_uniform → quantize_bits"""
    service = KeygenService(device, det_cfg, ridge_cfg)
    return service.respond(challenge, det_cfg.noise_seed, profile)
