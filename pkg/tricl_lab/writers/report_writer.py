"""运行报告写入器(Markdown + YAML front matter)"""
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import frontmatter

from .base import BaseWriter
from ..utils.helpers import format_float
from ..utils.logger import get_logger

logger = get_logger()

Table = Tuple[str, Sequence[str], Sequence[Sequence[Any]]]


def markdown_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    def cell(v):
        return format_float(v) if isinstance(v, float) else str(v)
    lines = ['| ' + ' | '.join(header) + ' |',
             '|' + '|'.join(' --- ' for _ in header) + '|']
    lines.extend('| ' + ' | '.join(cell(v) for v in row) + ' |' for row in rows)
    return '\n'.join(lines)


class ReportWriter(BaseWriter):
    """人类可读的 report.md, 不含时间戳"""

    def write(self, name: str, payload: Tuple[Dict[str, Any], List[Table]]) -> Path:
        """
        Args:
            payload: (front matter 元数据, [(小节标题, 表头, 行)])
        """
        metadata, tables = payload
        sections = [f"## {title}\n\n{markdown_table(header, rows)}" for title, header, rows in tables]
        post = frontmatter.Post('\n\n'.join(sections) + '\n', **metadata)
        path = self._save(name, frontmatter.dumps(post) + '\n')
        logger.info(f"已保存: {path.name}")
        return path
