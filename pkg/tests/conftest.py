"""
Pytest configuration and fixtures for faslab tests.

This module provides common fixtures and configuration for all tests.
"""

import pytest
from unittest.mock import Mock

from faslab.config import FasLabConfig
from faslab.correlation import build_correlation
from faslab.simulate import MonteCarloSimulator


@pytest.fixture
def mock_logger():
    """Create a mock logger."""
    logger = Mock()
    return logger


@pytest.fixture
def two_port_model():
    """Two ports over half a wavelength."""
    return build_correlation(2, 0.5, 1.0)


@pytest.fixture
def three_port_model():
    """Three ports over one wavelength (well conditioned)."""
    return build_correlation(3, 1.0, 1.0)


@pytest.fixture
def dense_model():
    """Fifty ports over half a wavelength (near-singular)."""
    return build_correlation(50, 0.5, 1.0)


@pytest.fixture
def simulator(mock_logger):
    """Single-threaded simulator with a mock logger."""
    return MonteCarloSimulator(config=FasLabConfig(threads=1), logger=mock_logger)
