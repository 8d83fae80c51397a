"""辅助函数"""
import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from ..config import Config


def calculate_hash(data: bytes, algorithm: str = 'sha256') -> str:
    """计算数据哈希值"""
    hash_obj = hashlib.new(algorithm)
    hash_obj.update(data)
    return hash_obj.hexdigest()


def file_digest(path: Union[str, Path], algorithm: str = 'sha256') -> str:
    """计算文件内容摘要"""
    return calculate_hash(Path(path).read_bytes(), algorithm)


def format_timestamp(dt: datetime) -> str:
    """格式化时间戳"""
    return dt.strftime(Config.TIMESTAMP_FORMAT)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def format_float(value: float) -> str:
    """以可逆精度格式化浮点数(CSV 字节稳定)"""
    return format(float(value), Config.CSV_FLOAT_FORMAT)


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """由 (seed, keys...) 派生独立随机数生成器"""
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])


def as_matrix(value: Sequence, name: str) -> np.ndarray:
    """转换为二维 float64 数组"""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} 必须是二维矩阵, 实际维度 {arr.ndim}")
    return arr


def softplus(raw: np.ndarray) -> np.ndarray:
    """s = ln(1 + exp(raw)), 数值稳定"""
    return np.logaddexp(0.0, raw)


def softplus_inverse(value: np.ndarray) -> np.ndarray:
    """softplus 的反函数: raw = ln(exp(s) - 1)"""
    return np.log(np.expm1(value))


def sigmoid(raw: np.ndarray) -> np.ndarray:
    """softplus 的导数"""
    return expit(raw)
