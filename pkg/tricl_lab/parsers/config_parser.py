"""实验配置解析器"""
from typing import Any, Dict, Optional

import yaml

from .base import BaseParser
from ..config import ExperimentConfig
from ..exceptions import ConfigurationError
from ..utils.logger import get_logger

logger = get_logger()


class ConfigParser(BaseParser):
    """读取 JSON 实验配置(YAML 子集, 用 yaml.safe_load 解析)"""

    SUFFIXES = ('.json', '.yaml', '.yml')
    ERROR = ConfigurationError

    def load(self) -> Dict[str, Any]:
        """读取原始字典"""
        try:
            data = yaml.safe_load(self.read_text())
        except yaml.YAMLError as e:
            raise ConfigurationError(f"配置文件解析失败 {self.source.name}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"配置文件顶层必须是对象: {self.source.name}")
        return data

    def parse(self,
              overrides: Optional[Dict[str, Any]] = None,
              expected_kind: Optional[str] = None) -> ExperimentConfig:
        """
        解析并校验配置

        Args:
            overrides: 覆盖顶层标量字段(如 output_dir, seed), 值为 None 时忽略
            expected_kind: 子命令对应的实验类型; 配置缺省 kind 时补上, 不一致时报错
        """
        data = self.load()
        if expected_kind is not None:
            declared = data.setdefault('kind', expected_kind)
            if declared != expected_kind:
                raise ConfigurationError(f"配置 kind={declared} 与命令 {expected_kind} 不一致")
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        config = ExperimentConfig.from_dict(data)
        logger.info(f"已加载配置: {self.source.name} (kind={config.kind}, seed={config.seed})")
        return config
