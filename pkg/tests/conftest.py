from __future__ import annotations

from pathlib import Path

import pytest

from gazeprompt.codemap import EditorGeometry

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def geometry() -> EditorGeometry:
    return EditorGeometry(
        file_path="snippet.java",
        origin_x_px=100.0,
        origin_y_px=60.0,
        char_width_px=9.0,
        line_height_px=18.0,
        first_visible_line=1,
        visible_line_count=45,
        screen_width_px=1920,
        screen_height_px=1080,
    )


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN_DIR
