"""
随机性检验套件服务
多序列比例分析、p 值均匀性与表格输出
"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special

from app.core.errors import ApplicabilityError, InputError
from app.models.randtests import BatteryReport, NistParams, NistTestKind, NistTestSummary
from app.services.randtests.nist_tests import SUBTEST_COUNTS, nist_test
from app.utils.seeds import rng_for

logger = logging.getLogger(__name__)

UNIFORMITY_BINS = 10
UNIFORMITY_THRESHOLD = 1e-4
# 序列数少于此值时均匀性 χ² 无意义，只报告不判定
UNIFORMITY_MIN_SEQUENCES = 55


def proportion_floor(alpha: float, sequences: int) -> float:
    """p̂ - 3√(p̂(1-p̂)/m)，p̂ = 1 - α"""
    p_hat = 1.0 - alpha
    return p_hat - 3.0 * math.sqrt(p_hat * alpha / sequences)


def uniformity_p(p_values: Sequence[float]) -> float:
    """十等分直方图的 χ² 均匀性 p 值"""
    values = np.asarray(p_values, dtype=np.float64)
    counts, _ = np.histogram(values, bins=UNIFORMITY_BINS, range=(0.0, 1.0))
    expected = values.size / UNIFORMITY_BINS
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return float(special.gammaincc((UNIFORMITY_BINS - 1) / 2.0, chi2 / 2.0))


def summarize(kind: NistTestKind, p_values: List[List[float]], alpha: float) -> NistTestSummary:
    """p_values: [子检验][序列]"""
    sequences = len(p_values[0])
    floor = proportion_floor(alpha, sequences)
    pass_counts = [int(np.count_nonzero(np.asarray(sub) >= alpha)) for sub in p_values]
    proportions = [count / sequences for count in pass_counts]
    uniformity = [uniformity_p(sub) for sub in p_values]
    check_uniformity = sequences >= UNIFORMITY_MIN_SEQUENCES
    sub_passed = sum(
        1 for prop, unif in zip(proportions, uniformity)
        if prop >= floor and (not check_uniformity or unif >= UNIFORMITY_THRESHOLD)
    )
    return NistTestSummary(
        name=kind.value, p_values=p_values, proportions=proportions, pass_counts=pass_counts,
        sequence_count=sequences, uniformity_p=uniformity, subtests_passed=sub_passed,
        subtests_total=len(p_values), proportion_floor=floor, passed=sub_passed == len(p_values),
    )


def run_battery(sequences: Sequence, alpha: float = 0.01, params: Optional[NistParams] = None) -> BatteryReport:
    """对每条序列运行每项适用的检验；不适用的检验记录原因后跳过"""
    params = params or NistParams()
    seqs = [np.asarray(s, dtype=np.uint8).ravel() for s in sequences]
    if not seqs:
        raise InputError("至少需要一条序列")
    if not 0.0 < alpha < 1.0:
        raise InputError("显著性水平必须在 (0, 1) 之间")

    tests: List[NistTestSummary] = []
    skipped: Dict[str, str] = {}
    for kind in params.kinds:
        kind = NistTestKind(kind)
        p_values: List[List[float]] = [[] for _ in range(SUBTEST_COUNTS[kind])]
        try:
            for seq in seqs:
                for sub, p in enumerate(nist_test(kind, seq, params)):
                    p_values[sub].append(p)
        except ApplicabilityError as e:
            skipped[kind.value] = str(e)
            logger.warning(f"Skipped {kind.value}: {e}")
            continue
        tests.append(summarize(kind, p_values, alpha))
        logger.info(f"{kind.value}: {tests[-1].subtests_passed}/{tests[-1].subtests_total} passed")

    return BatteryReport(
        alpha=alpha, sequence_count=len(seqs), sequence_length=int(min(s.size for s in seqs)),
        tests=tests, skipped=skipped,
    )


def split_sequences(bits, count: int) -> List[np.ndarray]:
    """把比特流切成 count 条等长序列（尾部丢弃）"""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if count < 1 or bits.size < count:
        raise InputError("序列数必须在 1 与比特数之间")
    length = bits.size // count
    return list(bits[:length * count].reshape(count, length))


def permute_extend(dataset, block_length: int, seed: int) -> np.ndarray:
    """dataset ∥ 以整块（整把密钥）为单位随机置换后的 dataset"""
    bits = np.asarray(dataset, dtype=np.uint8).ravel()
    if bits.size == 0:
        raise InputError("数据集不能为空")
    if block_length < 1 or bits.size % block_length:
        raise InputError(f"数据长度 {bits.size} 不是块长 {block_length} 的整数倍")
    blocks = bits.reshape(-1, block_length)
    order = rng_for(seed).permutation(blocks.shape[0])
    return np.concatenate([bits, blocks[order].ravel()])


def render_table(report: BatteryReport) -> str:
    """P-VALUE / PROPORTION / STATISTICAL TEST / PASSED 四列文本表"""
    lines = [
        f"{'P-VALUE':>10}  {'PROPORTION':>12}  {'STATISTICAL TEST':<20}  PASSED",
        "-" * 58,
    ]
    for test in report.tests:
        if test.sequence_count >= UNIFORMITY_MIN_SEQUENCES:
            p_value = min(test.uniformity_p)
        else:
            p_value = min(min(sub) for sub in test.p_values)
        worst = min(test.pass_counts)
        proportion = f"{worst}/{test.sequence_count}"
        lines.append(f"{p_value:>10.6f}  {proportion:>12}  {test.name:<20}  "
                     f"{test.subtests_passed}/{test.subtests_total}")
    for name, reason in report.skipped.items():
        lines.append(f"{'-':>10}  {'-':>12}  {name:<20}  skipped ({reason})")
    lines.append("-" * 58)
    lines.append(f"alpha = {report.alpha}, sequences = {report.sequence_count}, "
                 f"length = {report.sequence_length}, proportion floor = "
                 f"{proportion_floor(report.alpha, report.sequence_count):.4f}")
    return "\n".join(lines) + "\n"
