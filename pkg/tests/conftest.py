import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "vcnls", max_examples=100, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "vcnls"))


def pytest_collection_modifyitems(config, items):
    # every hypothesis-driven test doubles as a member of the property suite
    import pytest

    for item in items:
        if getattr(getattr(item, "obj", None), "is_hypothesis_test", False):
            item.add_marker(pytest.mark.property)
