"""Net files for the four example nets (fig1.net .. fig4.net)."""
from pathlib import Path

FIXTURE_DIR = Path(__file__).parent


def path(name: str) -> Path:
    return FIXTURE_DIR / (name if name.endswith(".net") else f"{name}.net")


def load(name: str):
    from ..net import load_net

    return load_net(path(name))
