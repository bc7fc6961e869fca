"""
光子储备池仿真服务
频域线性传输 + 平方律探测 + ADC，输出状态矩阵 S
"""
import logging
import threading
from typing import Dict, List, Tuple

import numpy as np
from scipy import fft as sp_fft

from app.core.errors import InputError, ModelError, NumericalError
from app.models.device import DetectionConfig, DeviceProfile, MrrParams, RossNode, StateMatrix
from app.utils.seeds import rng_for

logger = logging.getLogger(__name__)

ELECTRON_CHARGE = 1.602176634e-19


def mrr_response(mrr: MrrParams, freq_grid) -> Tuple[np.ndarray, np.ndarray]:
    """
    对称双耦合器 add/drop 微环的 through/drop 传输
    往返相位在谐振点附近按群折射率线性化: φ(f) = 2π (f - f_res) τ_rt
    """
    f = np.asarray(freq_grid, dtype=np.float64)
    r = np.sqrt(1.0 - mrr.kappa ** 2)
    a = mrr.round_trip_amplitude
    phase = 2.0 * np.pi * (f - mrr.resonance_offset) * mrr.round_trip_delay
    z = np.exp(-1j * phase)
    denom = 1.0 - r * r * a * z
    thru = (r - r * a * z) / denom
    drop = -(mrr.kappa ** 2) * np.sqrt(a) * np.exp(-0.5j * phase) / denom
    return thru, drop


def _cascade(node: RossNode, freq: np.ndarray):
    """逐个微环的 drop 传输及其前级直通级联"""
    delay = np.exp(-2j * np.pi * freq * node.inter_mrr_delay)
    drops, hops = [], []
    for mrr in node.mrrs:
        thru, drop = mrr_response(mrr, freq)
        drops.append(drop)
        hops.append(mrr.coupling_strength * thru * delay)
    hops = np.stack(hops, axis=1)
    cum = np.cumprod(hops, axis=1)
    before = np.concatenate([np.ones((freq.size, 1), dtype=complex), cum[:, :-1]], axis=1)
    return np.stack(drops, axis=1), before, cum[:, -1]


def loop_gain(node: RossNode, freq_grid) -> np.ndarray:
    """环路再循环因子 G(f) = 1 / (1 - F_str F(f) e^{-i(2πf T_d + φ_loop)})"""
    freq = np.asarray(freq_grid, dtype=np.float64)
    _, _, full = _cascade(node, freq)
    return _loop_gain_from(node, freq, full)


def _loop_gain_from(node: RossNode, freq: np.ndarray, full: np.ndarray) -> np.ndarray:
    loop = node.feedback_strength * full * np.exp(-1j * (2.0 * np.pi * freq * node.loop_delay + node.loop_phase))
    peak = float(np.max(np.abs(loop))) if loop.size else 0.0
    if peak >= 1.0:
        raise ModelError(f"环路增益 {peak:.6f} ≥ 1，几何级数不收敛")
    return 1.0 / (1.0 - loop)


def node_transfer(node: RossNode, freq_grid) -> np.ndarray:
    """每个 drop 通道的复传输 [n_freq, n_mrrs]"""
    freq = np.asarray(freq_grid, dtype=np.float64)
    drops, before, full = _cascade(node, freq)
    gain = _loop_gain_from(node, freq, full)
    return node.coupler_amplitude * drops * before * gain[:, None]


def modulate(x, cfg: DetectionConfig, device: DeviceProfile) -> np.ndarray:
    """
    强度调制: field = √(P_mean (bias + depth·x) / ν)
    ν 取自当前批次的平均电平，矩形符号成形，每符号 samples_per_symbol 点
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise InputError("调制输入必须为非空一维序列")
    if not np.all(np.isfinite(x)):
        raise InputError("调制输入包含非有限值")
    if x.min() < 0.0 or x.max() > 1.0:
        raise InputError("调制输入必须在 [0, 1] 之间")

    level = cfg.modulation_bias + cfg.modulation_depth * x
    norm = float(np.mean(level))
    if norm <= 0.0:
        power = np.zeros_like(level)
    else:
        power = device.mean_power * level / norm
    return np.repeat(np.sqrt(power), cfg.samples_per_symbol).astype(np.complex128)


def grid_length(n_symbols: int, samples_per_symbol: int) -> int:
    """不小于 sps·n_symbols 的最小 2 的幂"""
    n = samples_per_symbol * n_symbols
    return 1 << max(0, (n - 1).bit_length())


def quantize(values: np.ndarray, adc_range: np.ndarray, bits: int) -> np.ndarray:
    """均匀 ADC：按通道固定满量程量化到 2^bits 级，返回量化区间中点（零输入读 0）"""
    lo = adc_range[:, 0][None, :]
    hi = adc_range[:, 1][None, :]
    span = hi - lo
    levels = 1 << bits
    safe = np.where(span > 0, span, 1.0)
    code = np.clip(np.floor((values - lo) / safe * levels), 0, levels - 1)
    out = lo + (code + 0.5) * safe / levels
    # 跨零区间的中点与输入异号时读 0，暗输入在标定量程下也输出 0
    out = np.where(np.sign(out) != np.sign(values), 0.0, out)
    # 满量程为零的通道（如暗输入）直接输出下限
    return np.where(span > 0, out, np.broadcast_to(lo, values.shape))


class RossSimulator:
    """绑定一颗芯片的仿真器；传输表按网格缓存，可被多个线程共享"""

    def __init__(self, device: DeviceProfile):
        self.device = device
        self._tables: Dict[Tuple[int, float], np.ndarray] = {}
        self._lock = threading.Lock()

    def transfer_table(self, n_fft: int, sample_rate: float) -> np.ndarray:
        """全部通道的传输表 [n_fft, n_channels]，含 1×N 分束"""
        key = (n_fft, sample_rate)
        with self._lock:
            table = self._tables.get(key)
        if table is not None:
            return table

        freq = sp_fft.fftfreq(n_fft, d=1.0 / sample_rate)
        split = 1.0 / np.sqrt(self.device.splitter_ways)
        table = np.concatenate([node_transfer(node, freq) for node in self.device.nodes], axis=1) * split
        table.setflags(write=False)
        with self._lock:
            self._tables[key] = table
        return table

    def photocurrent(self, field: np.ndarray, cfg: DetectionConfig) -> np.ndarray:
        """平方律探测 + 单极点低通，无噪声 [n_samples, n_channels]"""
        field = np.asarray(field, dtype=np.complex128)
        if not np.all(np.isfinite(field)):
            raise NumericalError("光场包含 NaN/Inf")
        n_samples = field.size
        n_fft = grid_length(int(np.ceil(n_samples / cfg.samples_per_symbol)), cfg.samples_per_symbol)
        table = self.transfer_table(n_fft, cfg.sample_rate)

        spectrum = sp_fft.fft(field, n=n_fft)
        optical = sp_fft.ifft(spectrum[:, None] * table, axis=0)
        current = cfg.responsivity * np.abs(optical) ** 2

        freq = sp_fft.rfftfreq(n_fft, d=1.0 / cfg.sample_rate)
        lowpass = 1.0 / (1.0 + 1j * freq / cfg.pd_bandwidth)
        current = sp_fft.irfft(sp_fft.rfft(current, axis=0) * lowpass[:, None], n=n_fft, axis=0)
        return current[:n_samples]

    def sample_symbols(self, current: np.ndarray, cfg: DetectionConfig) -> np.ndarray:
        """符号中心采样，每符号一个点"""
        sps = cfg.samples_per_symbol
        n_symbols = current.shape[0] // sps
        return current[np.arange(n_symbols) * sps + sps // 2]

    def add_noise(self, samples: np.ndarray, cfg: DetectionConfig) -> np.ndarray:
        """热噪声与散粒噪声（在 PD 带宽内为白噪声，于采样时刻叠加）"""
        if not cfg.noise_enabled:
            return samples
        variance = np.full(samples.shape, (cfg.thermal_noise_density ** 2) * cfg.pd_bandwidth)
        if cfg.shot_noise_enabled:
            variance = variance + 2.0 * ELECTRON_CHARGE * np.clip(samples, 0.0, None) * cfg.pd_bandwidth
        rng = rng_for(cfg.noise_seed)
        return samples + rng.standard_normal(samples.shape) * np.sqrt(variance)

    def detect(self, x, cfg: DetectionConfig) -> Tuple[np.ndarray, np.ndarray]:
        """返回 (含噪采样, 无噪采样)，均为 ADC 前的电流"""
        field = modulate(x, cfg, self.device)
        clean = self.sample_symbols(self.photocurrent(field, cfg), cfg)
        return self.add_noise(clean, cfg), clean

    def adc_range_for(self, clean: np.ndarray, cfg: DetectionConfig) -> np.ndarray:
        if self.device.adc_range is not None:
            adc_range = np.asarray(self.device.adc_range, dtype=np.float64)
            if adc_range.shape != (clean.shape[1], 2):
                raise InputError("ADC 量程与通道数不一致")
            return adc_range
        return full_scale(clean, cfg.adc_headroom)

    def digitize(self, samples: np.ndarray, adc_range: np.ndarray, cfg: DetectionConfig) -> StateMatrix:
        return StateMatrix(
            samples=quantize(samples, adc_range, cfg.adc_bits),
            channel_map=self.device.channel_map,
            symbol_rate=cfg.symbol_rate,
            adc_bits=cfg.adc_bits,
        )

    def simulate_states(self, x, cfg: DetectionConfig) -> StateMatrix:
        noisy, clean = self.detect(x, cfg)
        return self.digitize(noisy, self.adc_range_for(clean, cfg), cfg)


def full_scale(clean: np.ndarray, headroom: float) -> np.ndarray:
    """由无噪采样得到每通道满量程（两侧各留 headroom 比例余量）"""
    lo = clean.min(axis=0)
    hi = clean.max(axis=0)
    pad = headroom * (hi - lo)
    return np.stack([lo - pad, hi + pad], axis=1)


def simulate_states(device: DeviceProfile, x, det_cfg: DetectionConfig) -> StateMatrix:
    return RossSimulator(device).simulate_states(x, det_cfg)


def calibrate_adc(device: DeviceProfile, x_cal, det_cfg: DetectionConfig) -> DeviceProfile:
    """无噪标定一次并固定每通道 ADC 量程"""
    sim = RossSimulator(device.model_copy(update={"adc_range": None}))
    _, clean = sim.detect(x_cal, det_cfg.noiseless())
    adc_range: List[Tuple[float, float]] = [tuple(map(float, row)) for row in full_scale(clean, det_cfg.adc_headroom)]
    logger.info(f"ADC full scale calibrated on {clean.shape[0]} symbols for {clean.shape[1]} channels")
    return device.model_copy(update={"adc_range": adc_range})
