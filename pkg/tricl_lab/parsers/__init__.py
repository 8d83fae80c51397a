"""解析器"""
from .base import BaseParser
from .config_parser import ConfigParser
from .artifact_parser import GraphParser, ModelParser, ReferenceParser

__all__ = ['BaseParser', 'ConfigParser', 'GraphParser', 'ModelParser', 'ReferenceParser']
