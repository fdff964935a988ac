"""
Resource monitoring and health checks
Guards dense linear algebra against running the machine out of memory
"""
import asyncio
import logging
import os
from datetime import datetime, timezone
from typing import Any, Dict, Optional, Tuple

import numpy as np
import psutil

from src.config.settings import settings
from src.utils.exceptions import ResourceLimitError

logger = logging.getLogger(__name__)


class ResourceMonitor:
    """
    Memory guard for dense work plus pre-run health checks
    """

    def __init__(self, headroom_gb: Optional[float] = None, report_dir: Optional[str] = None):
        self.headroom_gb = settings.MEMORY_HEADROOM_GB if headroom_gb is None else headroom_gb
        self.report_dir = report_dir or settings.REPORT_DIR
        self.last_check_results: Dict[str, Any] = {}
        self.last_check_time: Optional[datetime] = None

    def ensure_dense_capacity(self, n_rows: int, n_cols: int, dtype=np.float64, copies: int = 3,
                              label: str = "dense array"):
        """
        Raise ResourceLimitError if `copies` arrays of the given shape do not fit

        Args:
            n_rows: Rows of the array
            n_cols: Columns of the array
            dtype: Element type
            copies: Number of simultaneous arrays of that size the caller needs
            label: Name used in the error message
        """
        needed = n_rows * n_cols * np.dtype(dtype).itemsize * copies
        available = psutil.virtual_memory().available - self.headroom_gb * (1024 ** 3)
        if needed > available:
            raise ResourceLimitError(
                f"{label} needs {needed / 1024 ** 3:.2f}GB but only "
                f"{max(available, 0) / 1024 ** 3:.2f}GB is available"
            )
        logger.debug(f"{label}: reserving {needed / 1024 ** 2:.1f}MB")

    async def preflight(self, largest_size: int = 0) -> bool:
        """
        Check disk room for reports, free memory, and whether the largest
        operator of the batch can be diagonalised densely

        Args:
            largest_size: Node count of the biggest grid the batch will build

        Returns:
            True when every check passes
        """
        self.last_check_time = datetime.now(timezone.utc)
        checks = {
            "report_disk": self._report_disk(),
            "memory_headroom": self._memory_headroom(),
            "dense_operator": self._dense_operator(largest_size),
        }
        outcomes = await asyncio.gather(
            *[asyncio.wait_for(check, timeout=30) for check in checks.values()],
            return_exceptions=True
        )
        self.last_check_results = {}
        for name, outcome in zip(checks, outcomes):
            if isinstance(outcome, Exception):
                ok, message = False, f"{type(outcome).__name__}: {outcome}"
            else:
                ok, message = outcome
            self.last_check_results[name] = {"status": "pass" if ok else "fail", "message": message}
            if ok:
                logger.info(f"✅ {name}: {message}")
            else:
                logger.warning(f"❌ {name}: {message}")
        return all(r["status"] == "pass" for r in self.last_check_results.values())

    async def _report_disk(self) -> Tuple[bool, str]:
        os.makedirs(self.report_dir, exist_ok=True)
        free_gb = psutil.disk_usage(self.report_dir).free / (1024 ** 3)
        if free_gb < 0.1:
            return False, f"{free_gb:.2f}GB free under {self.report_dir}"
        return True, f"{free_gb:.1f}GB free under {self.report_dir}"

    async def _memory_headroom(self) -> Tuple[bool, str]:
        available_gb = psutil.virtual_memory().available / (1024 ** 3)
        return available_gb >= self.headroom_gb, f"{available_gb:.2f}GB available, {self.headroom_gb:.2f}GB reserved"

    async def _dense_operator(self, size: int) -> Tuple[bool, str]:
        if size <= 0:
            return True, "no grids planned"
        if size > settings.EIGEN_CEILING:
            return True, f"{size} nodes is above the dense ceiling; Chebyshev paths will be used"
        try:
            self.ensure_dense_capacity(size, size, dtype=np.complex128, label=f"{size}-node eigendecomposition")
        except ResourceLimitError as e:
            return False, str(e)
        return True, f"{size}-node eigendecomposition fits in memory"


# Shared guard used by the services
resource_monitor = ResourceMonitor()
