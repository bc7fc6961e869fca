import numpy as np
import pytest
from pydantic import ValidationError

from app.models.challenge import ChallengeConfig, NarmaParams
from app.models.device import DetectionConfig, MrrParams, NominalConfig
from app.models.experiment import ExperimentConfig, KeygenSettings
from app.models.keys import BinaryKey, BitEncoding, CalibrationProfile
from app.models.metrics import OperatingPoint, SweepGrids
from app.models.randtests import NistParams, NistTestKind
from app.models.readout import RidgeConfig


def test_nominal_defaults_give_24_channels():
    nominal = NominalConfig()
    assert nominal.n_channels == 24
    assert nominal.detuning_plan().shape == (4, 6)
    assert NominalConfig(mrrs_per_node=5).n_channels == 20


def test_nominal_rejects_invalid_physics():
    with pytest.raises(ValidationError):
        NominalConfig(kappa=1.2)
    with pytest.raises(ValidationError):
        NominalConfig(feedback_strength=1.0)
    with pytest.raises(ValidationError):
        NominalConfig(n_nodes=5, splitter_ways=4)


def test_mrr_params_derived_quantities():
    mrr = MrrParams(kappa=0.25, radius=55e-6, n_eff=3.4, n_g=4.2, alpha=0.0)
    assert mrr.round_trip_amplitude == pytest.approx(1.0)
    assert mrr.fsr == pytest.approx(299_792_458.0 / (4.2 * 2 * np.pi * 55e-6))
    with pytest.raises(ValidationError):
        MrrParams(kappa=0.25, radius=55e-6, n_eff=3.4, n_g=4.2, alpha=0.0, coupling_strength=0.0)


def test_detection_config_validation():
    assert DetectionConfig().sample_rate == pytest.approx(40e9 * 16)
    with pytest.raises(ValidationError):
        DetectionConfig(adc_bits=17)
    with pytest.raises(ValidationError):
        DetectionConfig(samples_per_symbol=2)
    quiet = DetectionConfig().noiseless()
    assert not quiet.noise_enabled


def test_challenge_config_validation():
    with pytest.raises(ValidationError):
        ChallengeConfig(input_low=0.5, input_high=0.5)
    with pytest.raises(ValidationError):
        ChallengeConfig(length=5, params=NarmaParams(m=10))


def test_ridge_config_washout_covers_taps():
    with pytest.raises(ValidationError):
        RidgeConfig(taps=11, washout=5)
    with pytest.raises(ValidationError):
        RidgeConfig(lam=-1.0)


def test_binary_key_length_and_serialization():
    key = BinaryKey(bits=np.array([1, 0, 1, 1, 0, 0, 1, 0]), bits_per_weight=4, weight_count=2)
    assert key.length == 8
    dumped = key.model_dump(mode="json")
    assert dumped["bits"] == "10110010"
    assert BinaryKey.model_validate(dumped).bits.tolist() == key.bits.tolist()
    with pytest.raises(ValidationError):
        BinaryKey(bits=np.zeros(7, dtype=np.uint8), bits_per_weight=4, weight_count=2)


def test_calibration_profile_requires_positive_sigma():
    with pytest.raises(ValidationError):
        CalibrationProfile(mu=0.0, sigma=0.0, ensemble_size=2)
    profile = CalibrationProfile(mu=0.1, sigma=2.0, ensemble_size=3, encoding="gray")
    assert profile.encoding == BitEncoding.GRAY


def test_sweep_grids_sorted_and_validated():
    grids = SweepGrids(m_bits=[8, 3, 3], n_bits=[2])
    assert grids.m_bits == [3, 8]
    with pytest.raises(ValidationError):
        SweepGrids(n_bits=[0])
    with pytest.raises(ValidationError):
        OperatingPoint(m_bit=17)


def test_nist_params_defaults():
    params = NistParams()
    assert params.approximate_entropy_m is None
    assert len(params.kinds) == len(NistTestKind)
    with pytest.raises(ValidationError):
        NistParams(rank_cols=64)
    with pytest.raises(ValidationError):
        NistParams(serial_m=1)


def test_keygen_settings_defaults():
    settings = KeygenSettings()
    assert settings.n_bit == 4
    assert settings.calibration_size == 100
    with pytest.raises(ValidationError):
        KeygenSettings(calibration_size=1)


def test_experiment_config_digest_ignores_output_dir():
    a = ExperimentConfig(output_dir="a")
    b = ExperimentConfig(output_dir="b")
    assert a.digest() == b.digest()
    assert len(a.digest()) == 64
    assert ExperimentConfig(master_seed=2).digest() != a.digest()


def test_experiment_config_alpha_range():
    with pytest.raises(ValidationError):
        ExperimentConfig(alpha=1.0)
