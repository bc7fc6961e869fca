"""
器件数据模型
微环、ROSS 节点、芯片实例与探测链配置
"""
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.arrays import FloatArray

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class MrrParams(BaseModel):
    """单个 add/drop 微环"""
    model_config = ConfigDict(frozen=True)

    kappa: float                   # 场耦合系数
    radius: float                  # m
    n_eff: float
    n_g: float
    alpha: float                   # 功率传播损耗 1/m
    resonance_offset: float = 0.0  # Hz，相对载波
    coupling_strength: float = 1.0  # C_MRR

    @field_validator('kappa')
    @classmethod
    def validate_kappa(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError('kappa 必须在 (0, 1) 之间')
        return v

    @field_validator('radius', 'n_g')
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError('半径与群折射率必须为正')
        return v

    @field_validator('alpha')
    @classmethod
    def validate_alpha(cls, v):
        if v < 0:
            raise ValueError('传播损耗不能为负')
        return v

    @field_validator('coupling_strength')
    @classmethod
    def validate_coupling(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError('C_MRR 必须在 (0, 1] 之间')
        return v

    @property
    def circumference(self) -> float:
        return 2.0 * np.pi * self.radius

    @property
    def round_trip_delay(self) -> float:
        return self.n_g * self.circumference / SPEED_OF_LIGHT

    @property
    def fsr(self) -> float:
        """自由光谱范围 Hz"""
        return 1.0 / self.round_trip_delay

    @property
    def round_trip_amplitude(self) -> float:
        return float(np.exp(-self.alpha * self.circumference / 2.0))


class RossNode(BaseModel):
    """单个循环光谱切片节点：环路内串联的微环"""
    model_config = ConfigDict(frozen=True)

    mrrs: List[MrrParams]
    loop_delay: float          # T_d, s
    feedback_strength: float   # F_str
    inter_mrr_delay: float     # T_MRR, s
    coupler_amplitude: float = float(np.sqrt(0.5))  # 输入 3dB 耦合器
    loop_phase: float = 0.0    # 环路波导 Δn_eff 引入的相位偏置 rad

    @field_validator('mrrs')
    @classmethod
    def validate_mrrs(cls, v):
        if not v:
            raise ValueError('节点至少包含一个微环')
        return v

    @field_validator('feedback_strength')
    @classmethod
    def validate_feedback(cls, v):
        if not 0.0 <= v < 1.0:
            raise ValueError('反馈强度必须在 [0, 1) 之间')
        return v

    @field_validator('loop_delay', 'inter_mrr_delay')
    @classmethod
    def validate_delay(cls, v):
        if v < 0:
            raise ValueError('延时不能为负')
        return v


class DeviationSpec(BaseModel):
    """制造偏差分布"""
    delta_n_eff_half_width: float = 0.015  # Δn_eff ~ U(-w, w)
    resonance_jitter_sigma: float = 0.1e9  # Hz
    coupling_mean: float = 0.97
    coupling_sigma: float = 0.1

    @field_validator('delta_n_eff_half_width')
    @classmethod
    def validate_half_width(cls, v):
        if not 0.0 <= v <= 0.015:
            raise ValueError('Δn_eff 半宽必须在 [0, 0.015] 之间')
        return v

    @field_validator('resonance_jitter_sigma', 'coupling_sigma')
    @classmethod
    def validate_sigma(cls, v):
        if v < 0:
            raise ValueError('标准差不能为负')
        return v

    @classmethod
    def none(cls) -> "DeviationSpec":
        """零偏差（理想器件）"""
        return cls(delta_n_eff_half_width=0.0, resonance_jitter_sigma=0.0, coupling_sigma=0.0)


class NominalConfig(BaseModel):
    """芯片标称设计"""
    n_nodes: int = 4
    mrrs_per_node: int = 6
    kappa: float = 0.25
    radius: float = 55e-6
    n_eff: float = 3.4
    n_g: float = 4.2
    alpha: float = 10.0
    detuning_spacing: float = 1e9       # 相邻微环失谐 Hz
    feedback_strength: float = 0.9
    loop_delay: float = 25e-12
    inter_mrr_delay: float = 2.5e-12
    carrier_wavelength: float = 1556e-9
    mean_power_dbm: float = 10.0
    splitter_ways: int = 4
    deviations: DeviationSpec = Field(default_factory=DeviationSpec)

    @field_validator('n_nodes', 'mrrs_per_node', 'splitter_ways')
    @classmethod
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError('数量必须至少为 1')
        return v

    @model_validator(mode='after')
    def validate_physics(self):
        if not 0.0 < self.kappa < 1.0:
            raise ValueError('kappa 必须在 (0, 1) 之间')
        if self.loop_delay < 0 or self.inter_mrr_delay < 0:
            raise ValueError('延时不能为负')
        if not 0.0 <= self.feedback_strength < 1.0:
            raise ValueError('反馈强度必须在 [0, 1) 之间')
        if self.splitter_ways < self.n_nodes:
            raise ValueError('分束器路数不能少于节点数')
        return self

    @property
    def carrier_frequency(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_wavelength

    @property
    def mean_power(self) -> float:
        """平均光功率 W"""
        return 10.0 ** (self.mean_power_dbm / 10.0) * 1e-3

    @property
    def n_channels(self) -> int:
        return self.n_nodes * self.mrrs_per_node

    def detuning_plan(self) -> np.ndarray:
        """标称失谐 [n_nodes, mrrs_per_node]，以 1 GHz 间隔围绕载波排布"""
        index = np.arange(self.n_channels) - self.n_channels // 2
        return (index * self.detuning_spacing).reshape(self.n_nodes, self.mrrs_per_node)


class DeviationRecord(BaseModel):
    """全部抽样偏差（即 W_int）"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    loop_delta_n_eff: FloatArray        # [n_nodes]
    mrr_delta_n_eff: FloatArray         # [n_nodes, mrrs]
    resonance_jitter: FloatArray        # Hz
    index_shift: FloatArray             # Δn_eff 引起的谐振偏移（已按 FSR 折叠）Hz
    coupling_strength: FloatArray


class DeviceProfile(BaseModel):
    """一颗制造出来的芯片"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    schema_tag: str = "ross-device/1"
    nominal: NominalConfig
    fab_seed: int
    nodes: List[RossNode]
    deviation_record: DeviationRecord
    adc_range: Optional[List[Tuple[float, float]]] = None  # 每通道 ADC 满量程

    @property
    def n_channels(self) -> int:
        return sum(len(node.mrrs) for node in self.nodes)

    @property
    def channel_map(self) -> List[Tuple[int, int]]:
        return [(i, k) for i, node in enumerate(self.nodes) for k in range(len(node.mrrs))]

    @property
    def carrier_frequency(self) -> float:
        return self.nominal.carrier_frequency

    @property
    def mean_power(self) -> float:
        return self.nominal.mean_power

    @property
    def splitter_ways(self) -> int:
        return self.nominal.splitter_ways

    def resonance_offsets(self) -> np.ndarray:
        return np.array([m.resonance_offset for node in self.nodes for m in node.mrrs])


class DetectionConfig(BaseModel):
    """调制、光电探测与 ADC 配置"""
    symbol_rate: float = 40e9
    samples_per_symbol: int = 16
    pd_bandwidth: float = 40e9
    responsivity: float = 1.0               # A/W
    thermal_noise_density: float = 10e-12   # A/√Hz
    shot_noise_enabled: bool = True
    adc_bits: int = 16                      # m_bit
    adc_headroom: float = 0.05
    modulation_bias: float = 0.0
    modulation_depth: float = 1.0
    noise_seed: int = 0

    @field_validator('adc_bits')
    @classmethod
    def validate_adc_bits(cls, v):
        if not 1 <= v <= 16:
            raise ValueError('ADC 位数必须在 1-16 之间')
        return v

    @field_validator('samples_per_symbol')
    @classmethod
    def validate_sps(cls, v):
        if v < 4:
            raise ValueError('每符号采样数至少为 4')
        return v

    @field_validator('thermal_noise_density', 'adc_headroom', 'modulation_bias')
    @classmethod
    def validate_non_negative(cls, v):
        if v < 0:
            raise ValueError('参数不能为负')
        return v

    @field_validator('symbol_rate', 'pd_bandwidth', 'responsivity', 'modulation_depth')
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError('参数必须为正')
        return v

    @property
    def noise_enabled(self) -> bool:
        return self.thermal_noise_density > 0 or self.shot_noise_enabled

    @property
    def sample_rate(self) -> float:
        return self.symbol_rate * self.samples_per_symbol

    def noiseless(self) -> "DetectionConfig":
        return self.model_copy(update={"thermal_noise_density": 0.0, "shot_noise_enabled": False})


class StateMatrix(BaseModel):
    """数字化后的储备池状态 S"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    samples: FloatArray                 # [n_symbols, n_channels]
    channel_map: List[Tuple[int, int]]
    symbol_rate: float
    adc_bits: int

    @model_validator(mode='after')
    def validate_shape(self):
        if self.samples.ndim != 2 or self.samples.shape[1] != len(self.channel_map):
            raise ValueError('状态矩阵列数必须等于通道数')
        return self

    @property
    def n_symbols(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]
