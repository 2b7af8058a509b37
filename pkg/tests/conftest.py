import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from qoffload.runtime import Device, DeviceKind, DeviceRegistry


@pytest.fixture
def registry():
    reg = DeviceRegistry()
    reg.register(Device("sim0", DeviceKind.LOCAL_SIMULATOR))
    yield reg
    reg.shutdown()
