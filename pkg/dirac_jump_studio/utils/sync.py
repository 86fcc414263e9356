from functools import partial, wraps
from typing import Any, Callable, Coroutine, List, Optional, ParamSpec, Sequence, TypeVar

import anyio
import anyio.to_thread

P = ParamSpec("P")
R = TypeVar("R")


def run_sync(
    call: Callable[P, R],
    limiter: Optional[anyio.CapacityLimiter] = None,
) -> Callable[P, Coroutine[None, None, R]]:
    """一个用于包装 sync function 为 async function 的装饰器
    参数:
        call: 被装饰的同步函数
        limiter: 工作线程容量限制器
    """

    @wraps(call)
    async def _wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        return await anyio.to_thread.run_sync(partial(call, *args, **kwargs), limiter=limiter)

    return _wrapper


class _Failure:
    def __init__(self, error: BaseException):
        self.error = error


async def gather_ordered(calls: Sequence[Callable[[], R]], jobs: int) -> List[R]:
    """在工作线程池中执行一组无参调用, 按提交顺序返回结果

    所有任务结束后才抛出第一个失败任务的异常。
    """
    limiter = anyio.CapacityLimiter(max(1, jobs))
    results: List[Any] = [None] * len(calls)

    async def _run(index: int, call: Callable[[], R]) -> None:
        try:
            results[index] = await run_sync(call, limiter=limiter)()
        except Exception as e:
            results[index] = _Failure(e)

    async with anyio.create_task_group() as task_group:
        for index, call in enumerate(calls):
            task_group.start_soon(_run, index, call)

    for result in results:
        if isinstance(result, _Failure):
            raise result.error
    return results


def run_parallel(calls: Sequence[Callable[[], R]], jobs: int = 1) -> List[R]:
    """同步入口: jobs <= 1 时顺序执行, 否则交给 anyio 线程池"""
    if jobs <= 1 or len(calls) <= 1:
        return [call() for call in calls]
    return anyio.run(gather_ordered, calls, jobs)
