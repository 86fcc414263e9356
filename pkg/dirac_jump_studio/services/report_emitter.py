"""
结果文件写出

CSV 由 pandas 生成, 行尾固定为 "\\n"。CSV 与 JSON 的浮点数统一按 17 位有效数字格式化,
JSON 中的 NaN 与 ±inf 写为 null。相同输入总是得到逐字节相同的文件。
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Literal, Sequence

import pandas as pd
from pydantic import BaseModel

from ..exceptions import EmptyRecords, IoError
from ..utils.logger import logger

ReportFormat = Literal["csv", "json"]
FLOAT_FORMAT = "%.17g"


def to_plain(value: Any) -> Any:
    """递归转换为可直接写入 JSON 的对象, 非有限浮点数转为 None"""
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump())
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if hasattr(value, "item"):
        # numpy 标量
        return to_plain(value.item())
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [to_plain(value.real), to_plain(value.imag)]
    return str(value)


class Float17Encoder(json.JSONEncoder):
    """浮点数按 FLOAT_FORMAT 写出的 JSON 编码器, 整数值浮点数保留 ".0" 后缀"""

    def iterencode(self, o, _one_shot=False):
        def floatstr(value: float) -> str:
            if not math.isfinite(value):
                raise ValueError(f"JSON 不支持非有限浮点数: {value!r}")
            text = FLOAT_FORMAT % value
            return text + ".0" if text.lstrip("-").isdigit() else text

        if self.indent is None or isinstance(self.indent, str):
            indent = self.indent
        else:
            indent = " " * self.indent
        encoder = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring
        iterencode = json.encoder._make_iterencode(
            {} if self.check_circular else None,
            self.default,
            encoder,
            indent,
            floatstr,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot,
        )
        return iterencode(o, 0)


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as file:
            file.write(text)
    except OSError as e:
        raise IoError(f"写入 {path} 失败: {e}") from e
    return path


def write_json(payload: Any, path: Path) -> Path:
    """写出任意 JSON 对象, 键顺序保持插入顺序"""
    text = json.dumps(to_plain(payload), cls=Float17Encoder, ensure_ascii=False, indent=2)
    return _write_text(path, text + "\n")


def records_frame(records: Sequence[BaseModel]) -> pd.DataFrame:
    """列顺序取第一条记录的字段顺序"""
    columns = list(type(records[0]).model_fields)
    return pd.DataFrame([record.model_dump() for record in records], columns=columns)


def emit_report(records: Sequence[BaseModel], path: Path, fmt: ReportFormat = "csv") -> Path:
    """写出一组记录

    Raises:
        EmptyRecords: records 为空
        IoError: 文件写入失败
    """
    if not records:
        raise EmptyRecords(f"没有可写出到 {path} 的记录")
    if fmt == "csv":
        text = records_frame(records).to_csv(
            index=False,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
            na_rep="nan",
        )
        _write_text(path, text)
    elif fmt == "json":
        write_json(list(records), path)
    else:
        raise ValueError(f"不支持的报告格式: {fmt}")
    logger.debug(f"已写出 {len(records)} 条记录到 {path}")
    return path


def emit_records(
    records: Sequence[BaseModel],
    directory: Path,
    formats: Sequence[ReportFormat],
    stem: str = "records",
) -> Dict[str, Path]:
    """按配置的格式写出 <stem>.csv / <stem>.json"""
    return {fmt: emit_report(records, directory / f"{stem}.{fmt}", fmt) for fmt in formats}
