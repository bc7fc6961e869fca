import json

import numpy as np
import pytest

from app.models.challenge import ChallengeConfig
from app.models.device import DetectionConfig, NominalConfig
from app.models.experiment import ExperimentConfig
from app.models.readout import RidgeConfig
from app.services.photonics.device_service import fabricate

# 小规模配置：2 节点 × 2 微环，200 符号挑战，保证单元测试足够快
SMALL_CONFIG = {
    "nominal": {"n_nodes": 2, "mrrs_per_node": 2},
    "detection": {"samples_per_symbol": 4, "adc_bits": 8},
    "challenge": {"length": 200},
    "ridge": {"taps": 3, "washout": 20, "lam": 1e-4},
    "keygen": {"n_bit": 4, "calibration_size": 4},
    "budget": {"intra_trials": 4, "inter_challenges": 4, "calibration_crps": 4, "device_count": 2},
    "grids": {"m_bits": [3, 8], "n_bits": [1, 4], "mrr_counts": [1, 2], "ecc_t_values": [0, 2]},
    "operating_point": {"m_bit": 3, "n_bit": 4},
    "ecc": {"operating_point": {"m_bit": 8, "n_bit": 4, "encoding": "gray"}, "trials": 3},
    "master_seed": 7,
}


@pytest.fixture
def small_config() -> ExperimentConfig:
    return ExperimentConfig.model_validate(SMALL_CONFIG)


@pytest.fixture
def config_file(tmp_path):
    """写到临时目录的小配置，输出目录也在临时目录下"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({**SMALL_CONFIG, "output_dir": str(tmp_path / "runs")}), encoding="utf-8")
    return path


@pytest.fixture
def small_nominal() -> NominalConfig:
    return NominalConfig(n_nodes=2, mrrs_per_node=2)


@pytest.fixture
def small_device(small_nominal):
    return fabricate(small_nominal, 11)


@pytest.fixture
def small_detection() -> DetectionConfig:
    return DetectionConfig(samples_per_symbol=4, adc_bits=8)


@pytest.fixture
def small_ridge() -> RidgeConfig:
    return RidgeConfig(taps=3, washout=20, lam=1e-4)


@pytest.fixture
def small_challenge_cfg() -> ChallengeConfig:
    return ChallengeConfig(length=200)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
