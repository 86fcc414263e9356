"""
WaveField 的二进制与 CSV 序列化

二进制格式 (小端): 4 字节魔数 b"DJWF", 然后依次为 L (float64)、N (int64)、n (int64)、
表象标志 (int64, 0 = 位置, 1 = 动量), 最后是按行主序排列的 N·n 个 complex128。
"""

from pathlib import Path

import numpy as np
import pandas as pd

from ..exceptions import IoError
from ..solvers.spectral import Representation, SpectralGrid, WaveField

MAGIC = b"DJWF"
HEADER_DTYPE = np.dtype(
    [
        ("magic", "S4"),
        ("half_width", "<f8"),
        ("points", "<i8"),
        ("dim", "<i8"),
        ("representation", "<i8"),
    ],
)
_FLAGS = {Representation.POSITION: 0, Representation.MOMENTUM: 1}


def field_to_bytes(field: WaveField) -> bytes:
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header[0] = (MAGIC, field.grid.half_width, field.grid.points, field.dim, _FLAGS[field.representation])
    body = np.ascontiguousarray(field.values, dtype="<c16")
    return header.tobytes() + body.tobytes()


def field_from_bytes(data: bytes) -> WaveField:
    """Raises: IoError"""
    if len(data) < HEADER_DTYPE.itemsize:
        raise IoError("波场文件过短, 缺少文件头")
    header = np.frombuffer(data[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if bytes(header["magic"]) != MAGIC:
        raise IoError(f"波场文件魔数错误: {bytes(header['magic'])!r}")
    points, dim = int(header["points"]), int(header["dim"])
    flags = {value: key for key, value in _FLAGS.items()}
    representation = flags.get(int(header["representation"]))
    if representation is None:
        raise IoError(f"未知的表象标志: {int(header['representation'])}")
    body = data[HEADER_DTYPE.itemsize :]
    if points < 2 or dim < 1 or len(body) != points * dim * 16:
        raise IoError(f"波场数据长度 {len(body)} 与文件头 (N = {points}, n = {dim}) 不一致")
    try:
        grid = SpectralGrid(float(header["half_width"]), points)
    except Exception as e:
        raise IoError(f"波场文件头中的网格参数无效: {e}") from e
    values = np.frombuffer(body, dtype="<c16").reshape(points, dim)
    return WaveField(grid, values.astype(complex), representation)


def save_field(field: WaveField, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(field_to_bytes(field))
    except OSError as e:
        raise IoError(f"写入波场 {path} 失败: {e}") from e
    return path


def load_field(path: Path) -> WaveField:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise IoError(f"读取波场 {path} 失败: {e}") from e
    return field_from_bytes(data)


def export_field_csv(field: WaveField, path: Path) -> Path:
    """调试用 CSV: z 列加每个分量的实部与虚部"""
    position = field.position()
    columns = {"z": position.grid.z}
    for component in range(position.dim):
        columns[f"re_{component}"] = position.values[:, component].real
        columns[f"im_{component}"] = position.values[:, component].imag
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise IoError(f"写入 {path} 失败: {e}") from e
    return path
