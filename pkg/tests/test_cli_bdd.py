"""
BDD tests for the joycekit command line.
"""
import json

import pytest
from pytest_bdd import parsers, scenarios, then, when

from src.config import config_loader
from src.main import main

pytestmark = pytest.mark.bdd

scenarios("cli_reports.feature")


@pytest.fixture(autouse=True)
def clear_config_cache(monkeypatch, tmp_path):
    config_loader.clear_cache()
    monkeypatch.delenv("JOYCEKIT_PRECISION", raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    config_loader.clear_cache()


@pytest.fixture
def context(tmp_path):
    return {"out": tmp_path / "out"}


@when(parsers.parse('I run "{command}"'))
def run_command(context, command):
    context["code"] = main(["--output", str(context["out"]), *command.split()])


@then(parsers.parse("the exit code is {code:d}"))
def exit_code(context, code):
    assert context["code"] == code


@then(parsers.parse('the report has a passing check "{name}"'))
def passing_check(context, name):
    report = json.loads((context["out"] / "report.json").read_text(encoding="utf-8"))
    checks = {c["name"]: c["ok"] for c in report["checks"]}
    assert checks[name] is True


@then("no report is written")
def no_report(context):
    assert not (context["out"] / "report.json").exists()


@then(parsers.parse('the file "{name}" is written'))
def file_written(context, name):
    assert (context["out"] / name).exists()
