"""Tests for sample, task and settings loading."""

import json

import numpy as np
import pytest
from assertpy import assert_that

from orchestration.io import detect_format, load_samples, load_task, samples_to_csv
from orchestration.settings import THREADS_ENV_VAR, Settings, artifact_version, load_settings
from quadrature.errors import InputFormatError, InvalidInputError
from quadrature.models import SampleSet


class TestLoadSamples:
    def test_csv_with_two_dimensions(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,x2,f\n0.0,1.0,2.5\n1.0,-1.0,0.5\n")

        samples = load_samples(path)

        assert_that(samples.locations.tolist()).is_equal_to([[0.0, 1.0], [1.0, -1.0]])
        assert_that(samples.values.tolist()).is_equal_to([2.5, 0.5])

    def test_column_order_does_not_matter(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("f,x2,x1\n3.0,2.0,1.0\n")

        assert_that(load_samples(path).locations.tolist()).is_equal_to([[1.0, 2.0]])

    def test_non_numeric_value_reports_line_and_column(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,f\n0.0,1.0\n1.0,abc\n")

        with pytest.raises(InputFormatError) as error:
            load_samples(path)

        assert_that(error.value.line).is_equal_to(3)
        assert_that(error.value.column).is_equal_to(2)
        assert_that(str(error.value)).contains("line 3, column 2")

    def test_empty_value_is_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,f\n0.0,\n")

        with pytest.raises(InputFormatError):
            load_samples(path)

    def test_unexpected_column_is_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,y,f\n0.0,1.0,2.0\n")

        with pytest.raises(InputFormatError) as error:
            load_samples(path)

        assert_that(error.value.column).is_equal_to(2)

    def test_rows_wider_than_header_are_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,f\n0.0,1.0,5\n0.5,2.0,6\n")

        with pytest.raises(InputFormatError) as error:
            load_samples(path)

        assert_that(error.value.line).is_equal_to(2)

    def test_one_wide_row_reports_its_line(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,f\n0.0,1.0\n0.5,2.0\n1.0,3.0,7\n")

        with pytest.raises(InputFormatError) as error:
            load_samples(path)

        assert_that(error.value.line).is_equal_to(4)

    def test_duplicate_column_is_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,x1,f\n0.0,1.0,2.0\n")

        with pytest.raises(InputFormatError) as error:
            load_samples(path)

        assert_that(error.value.column).is_equal_to(2)

    def test_header_only_is_rejected(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("x1,f\n")

        with pytest.raises(InputFormatError):
            load_samples(path)

    def test_json_input(self, tmp_path):
        path = tmp_path / "samples.json"
        path.write_text(json.dumps({"x": [[0.0], [1.0]], "f": [1.0, 2.0]}))

        assert_that(load_samples(path).n).is_equal_to(2)

    def test_malformed_json_reports_position(self, tmp_path):
        path = tmp_path / "samples.json"
        path.write_text('{"x": [[0.0]],\n "f": [1.0,]}')

        with pytest.raises(InputFormatError) as error:
            load_samples(path)

        assert_that(error.value.line).is_equal_to(2)

    def test_mismatched_json_lengths_rejected(self, tmp_path):
        path = tmp_path / "samples.json"
        path.write_text(json.dumps({"x": [[0.0], [1.0]], "f": [1.0]}))

        with pytest.raises(InputFormatError):
            load_samples(path)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_samples(tmp_path / "absent.csv")

    def test_unsupported_format(self, tmp_path):
        with pytest.raises(InputFormatError):
            detect_format(tmp_path / "samples.parquet")

    def test_csv_written_by_simulate_reads_back(self, tmp_path):
        samples = SampleSet(locations=np.array([[0.25], [-1.5]]), values=np.array([1.0, 3.0]))
        path = tmp_path / "samples.csv"
        path.write_text(samples_to_csv(samples))

        assert_that(load_samples(path).values.tolist()).is_equal_to([1.0, 3.0])


class TestLoadTask:
    def test_valid_task(self, tmp_path, standard_task):
        path = tmp_path / "task.json"
        path.write_text(standard_task.model_dump_json())

        assert_that(load_task(path).integrand.exponents).is_equal_to([0, 1, 3])

    def test_invalid_task_rejected(self, tmp_path):
        path = tmp_path / "task.json"
        path.write_text(json.dumps({"integrand": {"coefficients": [1.0], "exponents": [0]}}))

        with pytest.raises(InputFormatError):
            load_task(path)


class TestSettings:
    def test_threads_cap_requested_workers(self):
        assert_that(Settings(threads=2).resolve_workers(8)).is_equal_to(2)
        assert_that(Settings().resolve_workers(None)).is_equal_to(1)

    def test_threads_read_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")

        assert_that(load_settings(tmp_path / ".env").threads).is_equal_to(3)

    def test_threads_read_from_dotenv(self, tmp_path, monkeypatch):
        # Registers the variable with monkeypatch so whatever load_dotenv sets is undone.
        monkeypatch.setenv(THREADS_ENV_VAR, "1")
        monkeypatch.delenv(THREADS_ENV_VAR)
        env_file = tmp_path / ".env"
        env_file.write_text(f"{THREADS_ENV_VAR}=4\n")

        assert_that(load_settings(env_file).threads).is_equal_to(4)

    def test_invalid_threads_rejected(self, tmp_path, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "zero")

        with pytest.raises(InvalidInputError):
            load_settings(tmp_path / ".env")

    def test_version_is_a_string(self):
        assert_that(artifact_version()).is_type_of(str)
