import json

from settings import DEFAULT_SETTINGS, SEED_VARIABLE, SettingsManager


def test_defaults_without_a_file(tmp_path):
    manager = SettingsManager(str(tmp_path / "sessionforge.json"))
    assert manager.data == DEFAULT_SETTINGS
    assert manager.get("inference", "max_depth") == 64
    assert manager.get("run", "fuel_factor") == 4


def test_older_files_are_completed(tmp_path):
    path = tmp_path / "sessionforge.json"
    path.write_text(json.dumps({"fuzz": {"cases": 7}}))
    manager = SettingsManager(str(path))
    assert manager.get("fuzz", "cases") == 7
    assert manager.get("fuzz", "depth") == 5
    assert manager.get("oracle", "cap") == 200000


def test_unreadable_file_falls_back(tmp_path, caplog):
    path = tmp_path / "sessionforge.json"
    path.write_text("{broken")
    manager = SettingsManager(str(path))
    assert manager.data == DEFAULT_SETTINGS
    assert "using defaults" in caplog.text


def test_save_and_reload(tmp_path):
    path = str(tmp_path / "sessionforge.json")
    manager = SettingsManager(path)
    manager.set("fuzz", "seed", 99)
    manager.save_settings()
    assert SettingsManager(path).get("fuzz", "seed") == 99


def test_seed_precedence(tmp_path, monkeypatch):
    manager = SettingsManager(str(tmp_path / "sessionforge.json"))
    monkeypatch.delenv(SEED_VARIABLE, raising=False)
    assert manager.fuzz_seed() == 0
    assert manager.fuzz_seed(12) == 12
    monkeypatch.setenv(SEED_VARIABLE, "41")
    assert manager.fuzz_seed(12) == 41
    monkeypatch.setenv(SEED_VARIABLE, "many")
    assert manager.fuzz_seed(12) == 12
