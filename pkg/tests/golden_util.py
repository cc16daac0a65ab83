"""Golden fixture helper: byte-exact comparison with opt-in regeneration.

Set SLCALITE_REGEN_GOLDEN=1 to rewrite fixtures after an intentional
protocol change; the diff then shows exactly what moved on the wire.
"""

import os
from pathlib import Path

GOLDEN_DIR = Path(__file__).parent / "golden"


def check_golden(name: str, data: bytes) -> None:
    path = GOLDEN_DIR / name
    if os.environ.get("SLCALITE_REGEN_GOLDEN") == "1" or not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    expected = path.read_bytes()
    assert data == expected, (
        f"{name} drifted from the golden fixture; run with "
        "SLCALITE_REGEN_GOLDEN=1 if the change is intentional")
