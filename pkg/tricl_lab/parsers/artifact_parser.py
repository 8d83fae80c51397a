"""JSON 产物解析器: 图、训练模型、谱参考"""
import json
from typing import Any, Dict, Union

from .base import BaseParser
from ..exceptions import ArtifactError
from ..graph import graph_from_dict
from ..models import AugmentationGraph, BipartiteGraph, SpectralReference, TrainedModel
from ..spectra import reference_from_dict
from ..trainer import model_from_dict


class JsonArtifactParser(BaseParser):
    """JSON 产物解析基类"""

    SUFFIXES = ('.json',)
    ERROR = ArtifactError

    def load(self) -> Dict[str, Any]:
        try:
            data = json.loads(self.read_text())
        except json.JSONDecodeError as e:
            raise ArtifactError(f"JSON 解析失败 {self.source.name}: {e}") from e
        if not isinstance(data, dict):
            raise ArtifactError(f"产物顶层必须是对象: {self.source.name}")
        return data


class GraphParser(JsonArtifactParser):
    def parse(self) -> Union[AugmentationGraph, BipartiteGraph]:
        return graph_from_dict(self.load())


class ModelParser(JsonArtifactParser):
    def parse(self) -> TrainedModel:
        data = self.load()
        try:
            return model_from_dict(data)
        except KeyError as e:
            raise ArtifactError(f"模型文件缺少字段: {e}") from e


class ReferenceParser(JsonArtifactParser):
    def parse(self) -> SpectralReference:
        return reference_from_dict(self.load())
