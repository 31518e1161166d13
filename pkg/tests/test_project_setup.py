"""
Tests for project setup and basic imports.
"""

import importlib

import pytest


def test_package_importable():
    """Verify package can be imported."""
    import tiresias

    assert tiresias.__version__
    assert isinstance(tiresias.__version__, str)


def test_version_format():
    """Verify version follows semantic versioning."""
    import tiresias

    version_parts = tiresias.__version__.split(".")
    assert len(version_parts) >= 2, "Version should have at least major.minor"

    assert version_parts[0].isdigit(), "Major version should be numeric"
    assert version_parts[1].isdigit(), "Minor version should be numeric"


@pytest.mark.parametrize(
    "name",
    [
        "tiresias.mms",
        "tiresias.spectral",
        "tiresias.wave",
        "tiresias.gelfand",
        "tiresias.control",
        "tiresias.reconstruct",
        "tiresias.stability",
        "tiresias.storage",
        "tiresias.core",
        "tiresias.cli",
    ],
)
def test_subpackages_importable(name):
    """Verify all subpackages can be imported."""
    assert importlib.import_module(name)
