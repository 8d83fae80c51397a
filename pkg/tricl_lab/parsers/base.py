"""解析器基类"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Tuple, Type, Union


class BaseParser(ABC):
    """解析器基类"""

    # 允许的扩展名, 为空时不限制
    SUFFIXES: Tuple[str, ...] = ()
    # 源文件格式不符时抛出的异常类型
    ERROR: Type[Exception] = ValueError

    def __init__(self, source: Union[str, Path]):
        self.source = Path(source)
        self._validate_source()

    def _validate_source(self) -> None:
        """验证源文件"""
        if not self.source.exists():
            raise FileNotFoundError(f"源文件不存在: {self.source}")
        if not self.source.is_file():
            raise self.ERROR(f"源路径不是文件: {self.source}")
        if self.SUFFIXES and self.source.suffix.lower() not in self.SUFFIXES:
            raise self.ERROR(f"不支持的文件类型 {self.source.suffix or '(无)'}, "
                             f"可选 {', '.join(self.SUFFIXES)}")

    def read_text(self) -> str:
        return self.source.read_text(encoding='utf-8')

    @abstractmethod
    def parse(self) -> Any:
        """解析文件"""
        pass
