"""异常定义"""


class LabError(Exception):
    """实验室异常基类"""


class ConfigurationError(LabError, ValueError):
    """配置无效"""


class GraphConstructionError(LabError, ValueError):
    """增强图构造失败"""


class SpectralDecompositionError(LabError, RuntimeError):
    """谱分解未收敛或残差过大"""


class SpectralDegeneracyWarning(UserWarning):
    """前 k 个奇异值存在重复(可辨识性条件不成立)"""


class LossInputError(LabError, ValueError):
    """损失函数输入形状或取值非法"""


class TrainingDivergenceError(LabError, RuntimeError):
    """训练发散"""


class CanonicalizationError(LabError, ValueError):
    """符号规范化失败(存在死维度或输入未规范化)"""


class EvaluationError(LabError, ValueError):
    """评估前置条件不满足"""


class ArtifactError(LabError, ValueError):
    """产物文件格式无效"""


class SpectralInputError(LabError, ValueError):
    """谱分解或闭式解的输入非法"""
