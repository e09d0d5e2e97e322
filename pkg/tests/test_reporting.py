"""
Unit tests for output formatting and logging.
"""

import logging

import numpy as np
import pytest

from faslab.exceptions import ConfigError
from faslab.log import StandardLogger, configure_logging
from faslab.reporting import CsvReport, emit, format_value, render_json


class TestFormatValue:
    """Test cases for format_value."""

    @pytest.mark.parametrize("value,text", [
        (None, ""),
        (True, "true"),
        (3, "3"),
        (np.int64(7), "7"),
        (0.1, "0.1"),
        (1.0 / 3.0, "0.333333333333"),
        (2.0, "2"),
        ("SISO", "SISO"),
    ])
    def test_values(self, value, text):
        assert format_value(value) == text


class TestCsvReport:
    """Test cases for CsvReport."""

    def setup_method(self):
        """Set up test fixtures."""
        self.report = CsvReport("outage", ["snr_db", "outage"], ["outage", "--seed", "1"], seed=1)

    def test_render(self):
        # Arrange
        self.report.add(30.0, 0.25)

        # Act
        text = self.report.render("1.0.0")

        # Assert
        lines = text.splitlines()
        assert lines[0] == "# faslab 1.0.0 schema=outage/v1 seed=1 args=outage --seed 1"
        assert lines[1] == "snr_db,outage"
        assert lines[2] == "30,0.25"

    def test_row_width_checked(self):
        with pytest.raises(ValueError):
            self.report.add(1.0)

    def test_batch_size_follows_seed(self):
        """Test the random-stream batch size is recorded next to the seed."""
        report = CsvReport("outage", ["snr_db"], ["outage"], seed=3, batch_size=4096)
        assert report.metadata_line("1.0.0") == "# faslab 1.0.0 schema=outage/v1 seed=3 batch_size=4096 args=outage"

    def test_column(self):
        self.report.add(10.0, 0.5)
        self.report.add(20.0, 0.1)
        assert self.report.column("outage") == [0.5, 0.1]


class TestJsonAndEmit:
    """Test cases for render_json and emit."""

    def test_numpy_values(self):
        text = render_json({"b": np.arange(2), "a": np.float64(0.5)})
        assert text.index('"a"') < text.index('"b"')
        assert "0.5" in text

    def test_emit_to_file(self, tmp_path):
        path = tmp_path / "out.csv"
        emit("x\n", str(path))
        assert path.read_text() == "x\n"

    def test_emit_to_stdout(self, capsys):
        emit("y\n", None)
        assert capsys.readouterr().out == "y\n"


class TestLogging:
    """Test cases for StandardLogger and configure_logging."""

    def test_context_goes_to_record(self, caplog):
        """Test keyword context becomes record attributes."""
        # Arrange
        logger = StandardLogger("faslab.test")

        # Act
        with caplog.at_level(logging.INFO, logger="faslab"):
            logger.info("Compared schemes", trials=1000)

        # Assert
        record = caplog.records[-1]
        assert record.getMessage() == "Compared schemes"
        assert record.trials == 1000

    def test_configure_logging(self):
        configure_logging("warning")
        assert logging.getLogger("faslab").level == logging.WARNING
        configure_logging("INFO")

    def test_unknown_level(self):
        with pytest.raises(ConfigError):
            configure_logging("LOUD")
