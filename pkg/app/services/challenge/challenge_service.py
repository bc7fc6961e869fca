"""
挑战生成服务
均匀输入序列 + NARMA 目标序列，发散时确定性重试
"""
import logging
from typing import Optional

import numpy as np

from app.core.errors import ChallengeGenerationError, InputError, NarmaDivergedError
from app.models.challenge import Challenge, ChallengeConfig, NarmaParams
from app.utils.seeds import rng_for

logger = logging.getLogger(__name__)


def gen_input(seed: int, n: int, lo: float = 0.0, hi: float = 0.5) -> np.ndarray:
    """n 个 [lo, hi] 上独立均匀分布的样本"""
    if n < 1:
        raise InputError("序列长度至少为 1")
    if not lo < hi:
        raise InputError("区间下限必须小于上限")
    return rng_for(seed).uniform(lo, hi, size=n)


def narma_target(x, params: NarmaParams) -> np.ndarray:
    """
    NARMA-m 递推（零初始历史）:
    y[t+1] = a1 y[t] + a2 y[t] Σ_{i<m} y[t-i] + b x[t-m+1] x[t] + c
    返回与 x 对齐的 y[1..n]
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InputError("输入序列包含非有限值")
    n, m = x.size, params.m
    y = np.zeros(n + 1)
    window = 0.0  # Σ_{i<m} y[t-i]
    for t in range(n):
        if t >= m:
            window -= y[t - m]
        window += y[t]
        lagged = x[t - m + 1] if t >= m - 1 else 0.0
        y[t + 1] = params.a1 * y[t] + params.a2 * y[t] * window + params.b * lagged * x[t] + params.c
        if not abs(y[t + 1]) < params.divergence_bound:
            raise NarmaDivergedError(index=t, bound=params.divergence_bound)
    return y[1:]


def sub_seed(seed: int, attempt: int) -> int:
    """第 attempt 次重试使用的子种子；第 0 次即原种子"""
    if attempt == 0:
        return int(seed)
    seq = np.random.SeedSequence(int(seed), spawn_key=(attempt,))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_challenge(seed: int, n: int = 2000, params: Optional[NarmaParams] = None,
                   cfg: Optional[ChallengeConfig] = None) -> Challenge:
    """生成挑战；发散时按确定性子种子重试"""
    cfg = cfg or ChallengeConfig()
    params = params or cfg.params
    if n < params.m + 1:
        raise InputError("挑战长度必须大于记忆阶数")

    for attempt in range(cfg.max_retries + 1):
        current = sub_seed(seed, attempt)
        x = gen_input(current, n, cfg.input_low, cfg.input_high)
        try:
            y = narma_target(x, params)
        except NarmaDivergedError as e:
            logger.warning(f"NARMA diverged for seed {seed} (attempt {attempt}, index {e.index}); re-seeding")
            continue
        return Challenge(
            seed=seed, sub_seed=current, length=n,
            input_low=cfg.input_low, input_high=cfg.input_high,
            params=params, x_in=x, y_out=y,
        )
    raise ChallengeGenerationError(f"种子 {seed} 在 {cfg.max_retries} 次重试后仍发散")


def challenge_from_config(seed: int, cfg: ChallengeConfig) -> Challenge:
    return make_challenge(seed, cfg.length, cfg.params, cfg)
