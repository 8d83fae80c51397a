"""CSV 写入器"""
import csv
import io
from pathlib import Path
from typing import Any, Sequence, Tuple

from .base import BaseWriter
from ..utils.helpers import format_float
from ..utils.logger import get_logger

logger = get_logger()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, 'dtype') and value.dtype.kind == 'f':
        return format_float(float(value))
    return str(value)


class CsvWriter(BaseWriter):
    """指标表写入器, 同一输入产生逐字节相同的输出"""

    def write(self, name: str, payload: Tuple[Sequence[str], Sequence[Sequence[Any]]]) -> Path:
        """
        Args:
            payload: (表头, 行列表)
        """
        header, rows = payload
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        path = self._save(name, buffer.getvalue())
        logger.info(f"已保存: {path.name} ({len(rows)} 行)")
        return path
