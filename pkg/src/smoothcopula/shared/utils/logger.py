import logging
import os
import sys
import re
import hashlib
from pathlib import Path
from datetime import datetime
from typing import Optional

LOG_FORMAT = '[%(name)s][%(asctime)s] %(levelname)s: %(message)s'


class SmoothCopulaLogger:
    """Unified logging for the library, the simulations and the CLI"""

    def __init__(self, name: str, log_dir: Optional[Path] = None, level: Optional[str] = None):
        self.sanitized_name = self._sanitize_filename(name)

        self.logger = logging.getLogger(name)
        level_name = (level or os.environ.get("SMOOTHCOPULA_LOG_LEVEL", "INFO")).upper()
        self.logger.setLevel(getattr(logging, level_name, logging.INFO))
        self.logger.propagate = False

        # Handlers are attached once per logger name
        if not self.logger.handlers:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
            self.logger.addHandler(console_handler)

        if log_dir:
            log_dir = Path(log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            log_file = log_dir / f"{self.sanitized_name}_{datetime.now().strftime('%Y%m%d')}.log"
            known = {getattr(h, "baseFilename", None) for h in self.logger.handlers}
            if str(log_file.resolve()) not in known:
                file_handler = logging.FileHandler(log_file, encoding='utf-8')
                file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
                self.logger.addHandler(file_handler)

    def debug(self, message: str):
        self.logger.debug(message)

    def info(self, message: str):
        self.logger.info(message)

    def error(self, message: str):
        self.logger.error(message)

    def warning(self, message: str):
        self.logger.warning(message)

    @staticmethod
    def _sanitize_filename(name: str, max_length: int = 50) -> str:
        if not name:
            return "unnamed"
        sanitized = name.strip()

        # Characters that are unsafe in file names
        for char in '<>:"/\\|?* .':
            sanitized = sanitized.replace(char, '_')

        sanitized = re.sub(r'[^\w\-]', '_', sanitized)
        sanitized = re.sub(r'_+', '_', sanitized).strip('_')

        if len(sanitized) > max_length:
            hash_suffix = hashlib.md5(name.encode()).hexdigest()[:8]
            sanitized = f"{sanitized[:max_length - 9]}_{hash_suffix}"

        return sanitized or "unnamed_log"
