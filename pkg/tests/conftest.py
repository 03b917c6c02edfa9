from pathlib import Path

import pytest

from fmr.program import load_program

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


@pytest.fixture
def programs_dir() -> Path:
    return PROGRAMS


@pytest.fixture
def t_avg():
    return load_program(PROGRAMS / "t_avg.fmrprog")


@pytest.fixture
def t_or():
    return load_program(PROGRAMS / "t_or.fmrprog")
