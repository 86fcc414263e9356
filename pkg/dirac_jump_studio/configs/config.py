from pathlib import Path
from typing import Literal

from pydantic import Field

from .base import ConfigBase

CONFIG_PATH = Path("./data") / "configs" / "dirac_jump_studio.yaml"
CONFIG_DIR = Path("./data") / "configs"
CONFIG_DIR.mkdir(parents=True, exist_ok=True)


class NumericsConfig(ConfigBase):
    """全局数值容差配置"""

    HERMITIAN_RTOL: float = Field(default=1e-10, description="厄米性相对容差, 超出即抛出 NonHermitianInput")
    HERMITIAN_TOL: float = Field(default=1e-12, description="模型校验中 ϰ、μ 的厄米性绝对容差")
    UNITARY_TOL: float = Field(default=1e-12, description="σ 幺正性容差 ‖σ†σ − I‖")
    COMMUTATOR_TOL: float = Field(default=1e-10, description="[σ, ε(k)] 对易子容差")
    SYMBOL_HERMITIAN_TOL: float = Field(default=1e-12, description="符号表各项的厄米性相对容差")
    SHIFT_TOL: float = Field(default=1e-9, description="平移量与 dz 整数倍的偏差容差")
    SUPPORT_TOL: float = Field(default=1e-12, description="支撑集判定的相对质量容差")
    HARDY_TOL: float = Field(default=1e-8, description="Hardy 类成员判定的相对质量容差")
    NORMALIZATION_TOL: float = Field(default=1e-9, description="动量振幅归一化容差")
    PRECONDITION_TOL: float = Field(default=1e-12, description="时间反演对称性前提的容差")
    GUARD_FRACTION: float = Field(default=0.25, description="周期网格接缝保护带宽度, 以 L 为单位")
    GUARD_MASS_WARNING: float = Field(default=1e-10, description="保护带内相对质量超过该值时输出警告")


class RunnerConfig(ConfigBase):
    """场景运行配置"""

    JOBS: int = Field(default=1, ge=1, description="并行工作线程数, 结果与线程数无关")
    OUTPUT_DIR: str = Field(default="data/runs", description="结果文件默认输出目录")
    MC_CHUNK_SIZE: int = Field(default=8192, ge=1, description="蒙特卡洛每个计数器分块的轨迹数")
    AGREEMENT_CONSTANT: float = Field(
        default=4.0,
        description="蒙特卡洛与确定性期望一致性判据中 C·dz 的常数 C (固定值)",
    )
    SELF_TEST_BUDGET: float = Field(default=300.0, description="自检总耗时上限 (秒)")


class StudioConfig(ConfigBase):
    """dirac-jump-studio 总配置"""

    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        title="应用日志级别",
    )
    NUMERICS: NumericsConfig = Field(default_factory=NumericsConfig)
    RUNNER: RunnerConfig = Field(default_factory=RunnerConfig)


try:
    config = StudioConfig.load_config(file_path=CONFIG_PATH)
except Exception as e:
    print(f"dirac-jump-studio 配置文件加载失败: {e} | 请检查配置文件是否符合语法要求")
    print("应用将退出...")
    exit(1)
config.dump_config(file_path=CONFIG_PATH)
