import pytest

import varest as vr


@pytest.fixture(autouse=True)
def _setup_before_each_test(doctest_namespace):
    doctest_namespace["vr"] = vr
    vr.Config.reset_defaults()
