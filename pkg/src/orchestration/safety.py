"""Safe report writing: exclusive locks and atomic replacement of output files."""

import logging
import os
from pathlib import Path

from filelock import FileLock

logger = logging.getLogger(__name__)


class ReportWriter:
    """Writes result files so that readers never observe a partial report."""

    def __init__(self, timeout: float = 10.0):
        """
        Initialize the ReportWriter.

        Args:
            timeout: Timeout in seconds for acquiring the output lock
        """
        self.timeout = timeout

    def lock_for(self, path: Path) -> FileLock:
        """Lock guarding one output path, stored next to it as `<name>.lock`."""
        return FileLock(str(path.with_name(f"{path.name}.lock")), timeout=self.timeout)

    def write_text(self, path: str | Path, text: str) -> Path:
        """
        Write text to path under an exclusive lock, via a temporary sibling and an atomic rename.

        Args:
            path: Destination file; its parent directory must exist

        Returns:
            The destination path

        Raises:
            FileNotFoundError: If the parent directory does not exist
            filelock.Timeout: If another process holds the lock for longer than the timeout
        """
        path = Path(path)
        if not path.parent.exists():
            raise FileNotFoundError(f"Output directory does not exist: {path.parent}")

        temporary = path.with_name(f".{path.name}.tmp")
        with self.lock_for(path):
            try:
                temporary.write_text(text)
                os.replace(temporary, path)
            finally:
                if temporary.exists():
                    temporary.unlink()
        logger.debug("Wrote %s", path)
        return path
