import json

import pytest

from src.cli.selftest import SECTIONS
from src.config import config_loader
from src.main import main


@pytest.fixture(autouse=True)
def clear_config_cache(monkeypatch, tmp_path):
    config_loader.clear_cache()
    monkeypatch.delenv("JOYCEKIT_PRECISION", raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    config_loader.clear_cache()


def test_sections_cover_every_area():
    names = [s.__name__.lstrip("_") for s in SECTIONS]
    assert names == ["heavenly", "hyperkahler", "lagrangian", "twistor", "stokes", "wallcrossing", "periods"]


@pytest.mark.acceptance
@pytest.mark.slow
def test_selftest_passes(tmp_path, capsys):
    """
    Tests that the full acceptance suite runs clean and writes a passing report.
    """
    # Act
    code = main(["--output", str(tmp_path), "selftest"])

    # Assert
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    failed = [c["name"] for c in report["checks"] if not c["ok"]]
    assert failed == []
    assert code == 0
    assert "selftest: ok" in capsys.readouterr().out
