"""Environment-driven settings for the command-line tools."""

import os
from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as package_version
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from quadrature.errors import InvalidInputError

THREADS_ENV_VAR = "DPMBQ_THREADS"
DEFAULT_WORKERS = 1


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)
    threads: int | None = Field(default=None, ge=1)

    def resolve_workers(self, requested: int | None = None) -> int:
        """Worker count for a run: the request (or the default), capped by DPMBQ_THREADS."""
        workers = requested or DEFAULT_WORKERS
        return min(workers, self.threads) if self.threads else workers


def load_settings(env_file: Path | None = None) -> Settings:
    """Read settings from the environment after loading a .env file, if one exists.

    Variables already set in the process environment win over the .env file.

    Raises:
        InvalidInputError: If DPMBQ_THREADS is not a positive integer
    """
    load_dotenv(env_file or Path.cwd() / ".env", override=False)
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    try:
        return Settings(threads=int(raw) if raw else None)
    except (ValueError, ValidationError):
        raise InvalidInputError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")


def artifact_version() -> str:
    try:
        from quadrature._version import version

        return version
    except ImportError:
        pass
    try:
        return package_version("dpmbq")
    except PackageNotFoundError:
        return "0+unknown"
