"""矩阵与向量的配置解析, 支持命名预设"""

import re
from typing import List, Sequence, Union

import numpy as np

EntrySpec = Union[float, int, str, List[float]]
MatrixSpec = Union[float, int, str, List[List[EntrySpec]]]
VectorSpec = List[EntrySpec]

_PRESET_PATTERN = re.compile(r"^(?P<name>[a-z][a-z\-]*)(?:\((?P<args>[^)]*)\))?$")

_PAULI = {
    "pauli-x": np.array([[0, 1], [1, 0]], dtype=complex),
    "pauli-y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "pauli-z": np.array([[1, 0], [0, -1]], dtype=complex),
    "hadamard": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
}


def parse_complex(entry: EntrySpec) -> complex:
    """解析单个复数项: 数字, "a+bj" 字符串, 或 [实部, 虚部]"""
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2:
            raise ValueError(f"复数项需为 [实部, 虚部], 实际为 {entry!r}")
        return complex(float(entry[0]), float(entry[1]))
    if isinstance(entry, str):
        return complex(entry.replace(" ", ""))
    return complex(entry)


def shift_cycle(n: int) -> np.ndarray:
    """循环移位置换矩阵 |j+1 mod n⟩⟨j|"""
    return np.roll(np.eye(n, dtype=complex), 1, axis=0)


def _preset(name: str, args: Sequence[str], dim: int) -> np.ndarray:
    if name in _PAULI:
        if dim != 2:
            raise ValueError(f"预设 {name} 仅适用于 DIM = 2, 当前 DIM = {dim}")
        return _PAULI[name].copy()
    if name == "identity":
        return np.eye(dim, dtype=complex)
    if name == "zero":
        return np.zeros((dim, dim), dtype=complex)
    if name == "shift-cycle":
        size = int(args[0]) if args else dim
        if size != dim:
            raise ValueError(f"shift-cycle({size}) 与 DIM = {dim} 不一致")
        return shift_cycle(dim)
    if name == "projector":
        index = int(args[0]) if args else 0
        if not 0 <= index < dim:
            raise ValueError(f"projector({index}) 超出维度 {dim}")
        matrix = np.zeros((dim, dim), dtype=complex)
        matrix[index, index] = 1.0
        return matrix
    if name == "diag":
        values = [parse_complex(arg) for arg in args]
        if len(values) != dim:
            raise ValueError(f"diag 需要 {dim} 个对角元, 实际 {len(values)} 个")
        return np.diag(np.array(values, dtype=complex))
    raise ValueError(f"未知的矩阵预设: {name}")


def resolve_matrix(spec: MatrixSpec, dim: int) -> np.ndarray:
    """把配置中的矩阵描述解析为 dim×dim 复矩阵"""
    if isinstance(spec, bool):
        raise ValueError("矩阵描述不能是布尔值")
    if isinstance(spec, (int, float, complex)):
        return complex(spec) * np.eye(dim, dtype=complex)
    if isinstance(spec, str):
        text = spec.strip().lower()
        try:
            return parse_complex(text) * np.eye(dim, dtype=complex)
        except ValueError:
            pass
        match = _PRESET_PATTERN.match(text)
        if match is None:
            raise ValueError(f"无法解析的矩阵描述: {spec!r}")
        args = [arg.strip() for arg in (match.group("args") or "").split(",") if arg.strip()]
        return _preset(match.group("name"), args, dim)
    rows = [[parse_complex(entry) for entry in row] for row in spec]
    matrix = np.array(rows, dtype=complex)
    if matrix.shape != (dim, dim):
        raise ValueError(f"矩阵形状 {matrix.shape} 与 DIM = {dim} 不一致")
    return matrix


def resolve_vector(spec: VectorSpec, dim: int) -> np.ndarray:
    """解析内部态向量"""
    vector = np.array([parse_complex(entry) for entry in spec], dtype=complex)
    if vector.shape != (dim,):
        raise ValueError(f"向量长度 {vector.shape[0]} 与 DIM = {dim} 不一致")
    return vector
