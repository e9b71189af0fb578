from pathlib import Path

import pytest
import yaml

import cmsdisc
from cmsdisc.cli import main
from cmsdisc.config import REQUIRED_SECTIONS, default_grid, load_defaults, thread_count
from cmsdisc.errors import ConfigError


def test_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("envelope", "bound", "wigner", "witness", "calibrate"):
        assert command in result.output


def test_version():
    assert cmsdisc.__version__ == "0.1.0"


def test_defaults_file_is_complete():
    defaults = load_defaults()
    assert all(section in defaults for section in REQUIRED_SECTIONS)
    assert defaults["constants"] == {"k1": 1.0, "k2": 1.0, "k3": 1.0}
    assert defaults["envelope"]["max_n0"] == 64


def test_default_grid():
    grid = default_grid()
    assert len(grid) == 201
    assert grid[0] == pytest.approx(-1.2)
    assert grid[-1] == pytest.approx(1.2)


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("CMSDISC_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.delenv("CMSDISC_THREADS")
    assert 1 <= thread_count() <= load_defaults()["threads"]["default_max"]


@pytest.mark.parametrize("raw", ["0", "-2", "many", "1.5"])
def test_thread_count_rejects_bad_values(monkeypatch, raw):
    monkeypatch.setenv("CMSDISC_THREADS", raw)
    with pytest.raises(ConfigError, match="CMSDISC_THREADS"):
        thread_count()


ROOT = Path(__file__).resolve().parent.parent


def pinned_packages():
    lines = (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines()
    return {line.split("==")[0].lower() for line in lines if "==" in line}


def test_pinned_lint_tools_are_wired_into_pre_commit():
    hooks = yaml.safe_load((ROOT / ".pre-commit-config.yaml").read_text(encoding="utf-8"))
    entries = {hook["entry"].split()[0] for repo in hooks["repos"] for hook in repo["hooks"]}
    pinned = pinned_packages()
    assert {"black", "isort", "flake8"} <= entries
    assert {"black", "isort", "flake8", "pre_commit"} <= pinned
    assert "max-line-length = 120" in (ROOT / ".flake8").read_text(encoding="utf-8")
    assert "profile = black" in (ROOT / ".isort.cfg").read_text(encoding="utf-8")


def test_web_stack_is_not_pinned():
    assert not {"flask", "werkzeug", "jinja2"} & pinned_packages()
