"""
Unit tests for the logging helpers.
"""

import logging

import pytest

from src.utils.logger import LOGGER_ROOT, PipelineLogger, configure_root_logger, get_pipeline_logger


@pytest.fixture
def log_file(tmp_path):
    path = tmp_path / "logs" / "run.log"
    configure_root_logger("INFO", str(path), use_rich=False)
    yield path
    configure_root_logger("INFO", None, use_rich=False)


def _flush():
    for handler in logging.getLogger(LOGGER_ROOT).handlers:
        handler.flush()


class TestLogFile:
    """Test cases for records reaching the configured log file."""

    def test_module_record_reaches_the_file(self, log_file):
        get_pipeline_logger("sweep").info("phase sweep of 5 points")
        _flush()
        text = log_file.read_text()
        assert "nh_current.sweep" in text
        assert "phase sweep of 5 points" in text

    def test_logger_created_before_configuration(self, tmp_path):
        early = get_pipeline_logger("oracle")
        path = tmp_path / "late.log"
        configure_root_logger("INFO", str(path), use_rich=False)
        try:
            early.warning("dimension close to the cap")
            _flush()
            assert "dimension close to the cap" in path.read_text()
        finally:
            configure_root_logger("INFO", None, use_rich=False)

    def test_level_filters_module_records(self, log_file, tmp_path):
        path = tmp_path / "quiet.log"
        configure_root_logger("WARNING", str(path), use_rich=False)
        logger = get_pipeline_logger("writers")
        logger.info("hidden")
        logger.warning("shown")
        _flush()
        text = path.read_text()
        assert "shown" in text
        assert "hidden" not in text

    def test_module_loggers_have_no_own_handlers(self, log_file):
        logger = get_pipeline_logger("verify")
        assert logger.handlers == []
        assert logger.propagate is True


class TestPipelineLogger:
    """Test cases for the timed stage context manager."""

    def test_records_duration_and_stage_messages(self, log_file):
        with PipelineLogger("sweep", "phase sweep") as stage:
            pass
        _flush()
        assert stage.duration >= 0.0
        text = log_file.read_text()
        assert "Starting phase sweep" in text
        assert "Completed phase sweep" in text

    def test_failure_is_logged_and_raised(self, log_file):
        with pytest.raises(ValueError):
            with PipelineLogger("sweep", "exceptional-point scan"):
                raise ValueError("bad bracket")
        _flush()
        assert "Failed exceptional-point scan" in log_file.read_text()
