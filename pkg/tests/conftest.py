"""
Shared fixtures: corpus programs and a parser shortcut.
"""
from pathlib import Path

import pytest

from app.services.parser_service import load_program, parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture
def corpus_path():
    """Path of a corpus file by stem."""
    def resolve(stem: str) -> str:
        return str(CORPUS / f"{stem}.bbc")
    return resolve


@pytest.fixture
def corpus():
    """Loaded corpus program by stem."""
    def load(stem: str):
        return load_program(CORPUS / f"{stem}.bbc")
    return load


@pytest.fixture
def program():
    """Parse program text."""
    return parse_program
