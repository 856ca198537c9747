from __future__ import annotations

import pytest

from ternadac import build_prototype, calibrate


@pytest.fixture(scope="session")
def prototype():
    return build_prototype()


@pytest.fixture(scope="session")
def calibrated(prototype):
    return calibrate(prototype)
