"""JSON 写入器"""
import json
from pathlib import Path
from typing import Any, Dict

from .base import BaseWriter
from ..utils.logger import get_logger

logger = get_logger()


class JsonWriter(BaseWriter):
    """图、模型、谱参考与清单的 JSON 写入器(浮点按 repr 输出, 可精确回读)"""

    def write(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._save(name, json.dumps(payload, indent=2, ensure_ascii=False) + '\n')
        logger.info(f"已保存: {path.name}")
        return path
