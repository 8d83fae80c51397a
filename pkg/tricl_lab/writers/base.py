"""写入器基类"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Union


class BaseWriter(ABC):
    """写入器基类"""

    def __init__(self, output: Union[str, Path]):
        self.output = Path(output)
        self._prepare_output()

    def _prepare_output(self) -> None:
        """准备输出目录"""
        if self.output.suffix:  # 是文件
            self.output.parent.mkdir(parents=True, exist_ok=True)
        else:  # 是目录
            self.output.mkdir(parents=True, exist_ok=True)

    def _target(self, name: str) -> Path:
        return self.output if self.output.suffix else self.output / name

    def _save(self, name: str, text: str) -> Path:
        path = self._target(name)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        return path

    @abstractmethod
    def write(self, name: str, payload: Any) -> Path:
        """写入单个文件"""
        pass
