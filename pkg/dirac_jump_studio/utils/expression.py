import math
from typing import Callable

from simpleeval import SimpleEval

DENSITY_FUNCTIONS = {
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
    "abs": abs,
    "min": min,
    "max": max,
}
DENSITY_NAMES = {"pi": math.pi, "e": math.e}


def compile_density(expression: str, variable: str = "s") -> Callable[[float], float]:
    """把形如 "exp(-s)" 的表达式编译为一元实函数

    表达式在 simpleeval 沙箱中求值, 只允许 DENSITY_FUNCTIONS 中的函数。
    """
    evaluator = SimpleEval(functions=DENSITY_FUNCTIONS, names=dict(DENSITY_NAMES))
    # 语法错误在编译时暴露
    parsed = evaluator.parse(expression)

    def density(value: float) -> float:
        evaluator.names[variable] = float(value)
        return float(evaluator.eval(expression, previously_parsed=parsed))

    return density
