import pytest

from stereoqa.config import RunConfig
from stereoqa.errors import InputError
from stereoqa.masking import DEFAULT_MASKING


def test_roundtrip_through_file(tmp_path):
    config = RunConfig(seed=77, bootstrap_b=123)
    config.masking = {"masking_offset_db": 12.0}
    path = tmp_path / "run.json"
    config.save(path)
    back = RunConfig.from_file(path)
    assert back.seed == 77
    assert back.bootstrap_b == 123
    assert back.masking_config().masking_offset_db == 12.0
    assert back.masking_config().quiet_offset_db == DEFAULT_MASKING.quiet_offset_db


def test_relative_paths_resolve_against_config_location(tmp_path):
    nested = tmp_path / "exp"
    nested.mkdir()
    (nested / "cfg.json").write_text(RunConfig(items_dir="wavs", out_dir="out").to_json())
    config = RunConfig.from_file(nested / "cfg.json")
    assert config.items_dir == str(nested / "wavs")
    assert config.out_dir == str(nested / "out")
    assert config.manifest_path == nested / "out" / "manifest.jsonl"


def test_unknown_fields_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"sed": 1}')
    with pytest.raises(InputError, match="unknown config fields"):
        RunConfig.from_file(path)


def test_unknown_masking_parameter_rejected():
    config = RunConfig(masking={"offst": 1.0})
    with pytest.raises(InputError, match="unknown masking"):
        config.masking_config()


def test_validation_catches_bad_values():
    with pytest.raises(InputError, match="power of two"):
        RunConfig(fft_size=1000).validate()
    with pytest.raises(InputError, match="hop_size"):
        RunConfig(hop_size=4096).validate()
    with pytest.raises(InputError, match="unknown series"):
        RunConfig(series=["SHLR", "bogus"]).validate()
    with pytest.raises(InputError, match="bit_depth"):
        RunConfig(bit_depth=8).validate()


def test_missing_config_file(tmp_path):
    with pytest.raises(InputError, match="not found"):
        RunConfig.from_file(tmp_path / "nope.json")


def test_engine_settings_reflect_config():
    config = RunConfig(fft_size=1024, hop_size=512, window="sine", ms_gain=0.5)
    settings = config.engine_settings()
    assert settings.fft_size == 1024
    assert settings.hop_size == 512
    assert settings.ms_gain == 0.5
