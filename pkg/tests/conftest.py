import pytest

from aeroplan.radiomap import FGammaTable


@pytest.fixture(scope="session")
def fgamma_table():
    """Disk-cached capacity table; the first session pays the build cost."""
    return FGammaTable.load_or_build()
