import sys
from collections import deque
from datetime import datetime
from types import TracebackType
from typing import Dict, List

from loguru import logger

from ..configs.config import config

# 内存中保存最近的日志记录
log_records: deque = deque(maxlen=1000)

LOG_FORMAT = (
    "<g>{time:MM-DD HH:mm:ss}</g> "
    "[<lvl>{level}</lvl>] "
    "<c><u>{name}</u></c> | "
    "<c>{function}:{line}</c>| "
    "{message}"
)


def format_log_entry(record: Dict) -> Dict:
    """格式化日志条目"""
    return {
        "timestamp": datetime.fromtimestamp(record["time"].timestamp()).strftime("%Y-%m-%d %H:%M:%S"),
        "level": record["level"].name,
        "level_no": record["level"].no,
        "message": record["message"],
        "source": record["name"],
        "function": record["function"],
        "line": record["line"],
    }


class LogInterceptHandler:
    """日志拦截处理器, 把记录写入内存队列"""

    def __init__(self):
        self.sequence = 0

    def __call__(self, message):
        record = message.record
        log_entry = format_log_entry(record)
        self.sequence += 1
        log_entry["sequence"] = self.sequence
        log_records.append(log_entry)


# 捕获未处理的异常处理
def exception_handler(
    _type: BaseException,
    value: BaseException,
    traceback: TracebackType,  # noqa: ARG001
):
    try:
        raise value  # noqa: TRY301
    except Exception:
        logger.exception("Uncaught exception occurred")


sys.excepthook = exception_handler

intercept_handler = LogInterceptHandler()

# 立即配置日志处理器; 标准输出留给自检结果矩阵
log_handlers = [
    {
        "sink": intercept_handler,
        "format": LOG_FORMAT,
        "level": config.LOG_LEVEL,
    },
    {
        "sink": sys.stderr,
        "format": LOG_FORMAT,
        "level": config.LOG_LEVEL,
    },
]

logger.configure(handlers=log_handlers)  # type: ignore


def current_log_sequence() -> int:
    """获取当前日志序号, 用于截取某次运行期间的日志"""
    return intercept_handler.sequence


def get_log_records(
    min_level: str = "DEBUG",
    since: int = 0,
) -> List[Dict]:
    """获取历史日志记录

    Args:
        min_level: 最低日志级别
        since: 只返回序号大于该值的记录

    Returns:
        按时间从旧到新排序的日志记录
    """
    threshold = logger.level(min_level).no
    return [
        log
        for log in log_records
        if log["level_no"] >= threshold and log["sequence"] > since
    ]
