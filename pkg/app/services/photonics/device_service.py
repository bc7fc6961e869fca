"""
器件制造服务
按制造种子抽样工艺偏差，生成芯片实例
"""
import logging
from typing import Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from app.core.errors import ConfigurationError
from app.models.device import (
    DeviationRecord, DeviceProfile, MrrParams, NominalConfig, RossNode,
)
from app.services.photonics.photonics_service import mrr_response
from app.utils.seeds import rng_for

logger = logging.getLogger(__name__)

_MIN_COUPLING = 1e-3


def fold_to_fsr(shift, fsr):
    """把谐振偏移折叠到 [-FSR/2, FSR/2)"""
    return np.mod(np.asarray(shift) + fsr / 2.0, fsr) - fsr / 2.0


def fabricate(nominal: NominalConfig, fab_seed: int) -> DeviceProfile:
    """制造一颗芯片：偏差记录只由 (fab_seed, nominal) 决定"""
    if fab_seed < 0:
        raise ConfigurationError("制造种子必须为非负整数")

    dev = nominal.deviations
    n_nodes, per_node = nominal.n_nodes, nominal.mrrs_per_node
    shape = (n_nodes, per_node)

    # 抽样顺序固定，保证同种子逐位一致
    rng = rng_for(fab_seed)
    w = dev.delta_n_eff_half_width
    loop_dn = rng.uniform(-w, w, size=n_nodes)
    mrr_dn = rng.uniform(-w, w, size=shape)
    jitter = rng.normal(0.0, dev.resonance_jitter_sigma, size=shape)
    coupling = np.clip(rng.normal(dev.coupling_mean, dev.coupling_sigma, size=shape), _MIN_COUPLING, 1.0)

    f_c = nominal.carrier_frequency
    fsr = 299_792_458.0 / (nominal.n_g * 2.0 * np.pi * nominal.radius)
    index_shift = fold_to_fsr(f_c * mrr_dn / nominal.n_g, fsr)
    offsets = nominal.detuning_plan() + jitter + index_shift

    # 环路波导的 Δn_eff 表现为随机相位偏置
    loop_phase = np.mod(2.0 * np.pi * f_c * loop_dn * nominal.loop_delay / nominal.n_g + np.pi, 2.0 * np.pi) - np.pi

    try:
        nodes = [
            RossNode(
                mrrs=[
                    MrrParams(
                        kappa=nominal.kappa,
                        radius=nominal.radius,
                        n_eff=nominal.n_eff + float(mrr_dn[i, k]),
                        n_g=nominal.n_g,
                        alpha=nominal.alpha,
                        resonance_offset=float(offsets[i, k]),
                        coupling_strength=float(coupling[i, k]),
                    )
                    for k in range(per_node)
                ],
                loop_delay=nominal.loop_delay,
                feedback_strength=nominal.feedback_strength,
                inter_mrr_delay=nominal.inter_mrr_delay,
                loop_phase=float(loop_phase[i]),
            )
            for i in range(n_nodes)
        ]
    except ValidationError as e:
        raise ConfigurationError(f"器件参数非法: {e}") from e

    record = DeviationRecord(
        loop_delta_n_eff=loop_dn,
        mrr_delta_n_eff=mrr_dn,
        resonance_jitter=jitter,
        index_shift=index_shift,
        coupling_strength=coupling,
    )
    logger.info(f"Fabricated device seed={fab_seed}: {n_nodes} nodes x {per_node} MRRs")
    return DeviceProfile(nominal=nominal, fab_seed=fab_seed, nodes=nodes, deviation_record=record)


def measure_linewidth(mrr: MrrParams, resolution: float = 1e6, span: Optional[float] = None) -> float:
    """扫描 drop 端口 -3 dB 全宽 (Hz)"""
    if span is None:
        span = mrr.fsr / 2.0
    half = np.arange(-span / 2.0, span / 2.0, resolution)
    grid = mrr.resonance_offset + half
    _, drop = mrr_response(mrr, grid)
    power = np.abs(drop) ** 2
    peak = int(np.argmax(power))
    above = power >= power[peak] / 2.0
    lo = peak
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = peak
    while hi < above.size - 1 and above[hi + 1]:
        hi += 1
    return float((hi - lo + 1) * resolution)


def describe_device(device: DeviceProfile) -> Dict[str, List[float]]:
    """谐振位置、线宽与 FSR 汇总"""
    mrrs = [m for node in device.nodes for m in node.mrrs]
    return {
        "resonance_offsets_ghz": [m.resonance_offset / 1e9 for m in mrrs],
        "linewidths_ghz": [measure_linewidth(m, resolution=10e6) / 1e9 for m in mrrs],
        "fsr_ghz": [m.fsr / 1e9 for m in mrrs],
        "coupling_strength": [m.coupling_strength for m in mrrs],
        "loop_phase_rad": [node.loop_phase for node in device.nodes],
    }
