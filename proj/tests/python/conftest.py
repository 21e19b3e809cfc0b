import os
import shutil

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("LASERPATH_CLI") or shutil.which("laserpath")
    if not path:
        pytest.skip("laserpath CLI not available")
    return path
