import copy
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import Field, model_validator

from ..exceptions import ConfigError
from ..schemas.records import LimitSweepConfig
from ..solvers.linalg import ModelSpec
from ..solvers.spectral import HardySide, SpectralGrid, WaveField, gaussian_packet
from ..solvers.stochastic import MAX_SEED
from ..utils.expression import compile_density
from ..utils.presets import EntrySpec, MatrixSpec, resolve_matrix, resolve_vector
from .base import ConfigBase

ScenarioName = Literal["toy-equivalence", "reflect", "kappa-sweep", "monte-carlo", "full-suite"]
SCENARIO_NAMES: List[str] = ["toy-equivalence", "reflect", "kappa-sweep", "monte-carlo", "full-suite"]

DYADIC_STEPS = [2.0**-power for power in range(4, 10)]


class GridBlock(ConfigBase):
    """周期网格"""

    HALF_WIDTH: float = Field(default=16.0, gt=0, description="半宽 L, 网格覆盖 [−L, L)")
    POINTS: int = Field(default=1024, ge=2, description="网格点数 N, 必须是 2 的幂")

    def build(self) -> SpectralGrid:
        return SpectralGrid(self.HALF_WIDTH, self.POINTS)


class ModelBlock(ConfigBase):
    """模型矩阵, 支持嵌套列表、标量或命名预设"""

    DIM: int = Field(default=2, ge=1, description="内部空间维度 n")
    KAPPA: MatrixSpec = Field(default="pauli-z", description="频率矩阵 ϰ")
    SIGMA: MatrixSpec = Field(default="pauli-x", description="跃迁幺正矩阵 σ")
    MASS: MatrixSpec = Field(default=0.0, description="质量算子 μ")
    MASS_BOUND: Optional[float] = Field(default=None, ge=0, description="质量界 m, 缺省取 ‖μ‖")
    KAPPA_SHIFT: Optional[MatrixSpec] = Field(default=None, description="共轭生成元, 缺省取 ϰ")

    def build(self) -> ModelSpec:
        return ModelSpec(
            kappa_op=resolve_matrix(self.KAPPA, self.DIM),
            sigma=resolve_matrix(self.SIGMA, self.DIM),
            mass_op=resolve_matrix(self.MASS, self.DIM),
            mass_bound=self.MASS_BOUND,
        )

    def kappa_shift(self) -> Optional[np.ndarray]:
        if self.KAPPA_SHIFT is None:
            return None
        return resolve_matrix(self.KAPPA_SHIFT, self.DIM)


class PacketBlock(ConfigBase):
    """初值高斯波包"""

    CENTER: float = Field(default=6.0, description="中心位置")
    WIDTH: float = Field(default=1.0, gt=0, description="位置宽度")
    CARRIER: float = Field(default=0.0, description="载波动量")
    HARDY: Optional[Literal["minus", "plus"]] = Field(default=None, description="投影到的 Hardy 类")
    CUTOFF: float = Field(default=0.0, ge=0, description="Hardy 截断 κ°")

    def build(self, grid: SpectralGrid, eta: np.ndarray) -> WaveField:
        side = None if self.HARDY is None else HardySide(self.HARDY)
        return gaussian_packet(grid, self.CENTER, self.WIDTH, self.CARRIER, eta, side=side, cutoff=self.CUTOFF)


class RunBlock(ConfigBase):
    """运行参数, 各场景只读取自己需要的字段"""

    TIMES: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], description="玩具模型的传播时间列表")
    TIME: float = Field(default=1.0, description="传播时间 t")
    DT_LIST: List[float] = Field(default_factory=lambda: list(DYADIC_STEPS), description="Ito 残差的步长序列")
    ITO_TIME: float = Field(default=1.0, description="Ito 残差的时刻 t")
    ITO_OFF_JUMP: float = Field(default=0.5, description="窗口外的跃迁时刻 s")
    ITO_GRID: GridBlock = Field(
        default_factory=lambda: GridBlock(HALF_WIDTH=4.0, POINTS=4096),
        description="网格级跃迁方程残差使用的网格",
    )
    RANDOM_CASES: int = Field(default=10, ge=1, description="随机模型个数")
    SEED: int = Field(default=7, ge=0, le=MAX_SEED, description="64 位无符号随机种子")
    ETA: List[EntrySpec] = Field(default_factory=lambda: [0.8, 0.6], description="内部态向量 η")
    PACKET: PacketBlock = Field(default_factory=PacketBlock)
    REFINE_POINTS: List[int] = Field(default_factory=lambda: [256, 512, 1024, 2048], description="网格细化序列")
    KAPPA_BASE: float = Field(default=5.0, gt=0, description="Hardy 截断 κ°")
    KAPPA_LIST: List[float] = Field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0, 160.0], description="κ 序列")
    EPSILON: float = Field(default=0.01, description="阈值公式中的容差 ε")
    DENSITY: str = Field(default="exp(-s)", description="跃迁时刻密度 ρ(s) 表达式")
    SAMPLES: int = Field(default=100_000, ge=2, description="蒙特卡洛轨迹数 M")
    OBSERVABLE: MatrixSpec = Field(default="projector(0)", description="可观测量 A")
    SIGMAS: float = Field(default=4.0, gt=0, description="一致性判据中的标准误差倍数 k")


class TolerancesBlock(ConfigBase):
    """数值断言阈值"""

    ORACLE_DEFECT: float = Field(default=1e-10, description="闭式解与逐点余圈的最大偏差")
    COCYCLE: float = Field(default=1e-9, description="余圈群律偏差")
    UNITARITY: float = Field(default=1e-10, description="范数守恒偏差")
    RATIO_OFF_JUMP: float = Field(default=4.0, description="跃迁窗口外的细化比")
    RATIO_JUMP: float = Field(default=2.0, description="跃迁处的细化比")
    RATIO_WIDTH: float = Field(default=0.5, description="细化比的允许偏差")
    PROJECTOR: float = Field(default=1e-10, description="投影算子幂等与自伴偏差")
    NORM: float = Field(default=1e-9, description="反射模型的范数守恒偏差")
    HALVING: float = Field(default=0.2, description="边界残差减半比的相对偏差")
    CURRENT_FACTOR: float = Field(default=10.0, description="边界流 |j(0)| 与残差平方 r² 之比的上限")
    SLOPE: float = Field(default=-1.7, description="log I 对 log ϰ 的拟合斜率上限")
    MASSLESS: float = Field(default=1e-12, description="无质量对照的误差积分上限")
    CROSS: float = Field(default=1e-10, description="极限截断波与玩具解的偏差")
    STATE_NORM: float = Field(default=1e-12, description="轨迹态向量的范数偏差")
    TIME_REVERSAL: float = Field(default=1e-8, description="时间反演交换偏差")


class OutputBlock(ConfigBase):
    DIRECTORY: Optional[str] = Field(default=None, description="输出目录, 缺省为 RUNNER.OUTPUT_DIR/<场景名>")
    FORMATS: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"], description="记录文件格式")
    TIMINGS: bool = Field(default=False, description="是否记录耗时 (开启后输出不再逐字节可复现)")
    FIELDS: bool = Field(default=False, description="是否额外写出末态波场 (二进制与调试 CSV)")


# 各场景的缺省值, 用户配置逐块覆盖
SCENARIO_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "toy-equivalence": {
        "GRID": {"HALF_WIDTH": 16.0, "POINTS": 1024},
        "MODEL": {"DIM": 2, "KAPPA": "pauli-z", "SIGMA": "pauli-x", "MASS": 0.0},
        "RUN": {"PACKET": {"CENTER": 6.0, "WIDTH": 1.0, "CARRIER": 1.5}},
    },
    "reflect": {
        "GRID": {"HALF_WIDTH": 32.0, "POINTS": 1024},
        "MODEL": {"DIM": 1, "KAPPA": 0.0, "SIGMA": "1j", "MASS": 1.0},
        "RUN": {
            "TIME": 1.0,
            "ETA": [1.0],
            "PACKET": {"CENTER": 4.0, "WIDTH": 2.0, "CARRIER": -3.0, "HARDY": "minus", "CUTOFF": 0.0},
        },
    },
    "kappa-sweep": {
        "GRID": {"HALF_WIDTH": 64.0, "POINTS": 2048},
        "MODEL": {"DIM": 1, "KAPPA": 0.0, "SIGMA": -1.0, "MASS": 1.0, "MASS_BOUND": 1.0},
        "RUN": {
            "TIME": 1.0,
            "ETA": [1.0],
            "KAPPA_BASE": 5.0,
            "PACKET": {"CENTER": 0.0, "WIDTH": 8.0, "CARRIER": 4.0, "HARDY": "minus", "CUTOFF": 5.0},
        },
    },
    "monte-carlo": {
        "GRID": {"HALF_WIDTH": 16.0, "POINTS": 1024},
        "MODEL": {"DIM": 2, "KAPPA": "pauli-z", "SIGMA": "pauli-x", "MASS": 0.0},
        "RUN": {"TIME": 1.0, "ETA": [0.8, 0.6], "DENSITY": "exp(-s)", "OBSERVABLE": "projector(0)"},
    },
    "full-suite": {},
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _is_power_of_two(value: int) -> bool:
    return value >= 2 and value & (value - 1) == 0


class ScenarioConfig(ConfigBase):
    """单次运行的场景配置"""

    SCENARIO: ScenarioName = Field(description="场景名称")
    GRID: GridBlock = Field(default_factory=GridBlock)
    MODEL: ModelBlock = Field(default_factory=ModelBlock)
    RUN: RunBlock = Field(default_factory=RunBlock)
    TOLERANCES: TolerancesBlock = Field(default_factory=TolerancesBlock)
    OUTPUT: OutputBlock = Field(default_factory=OutputBlock)

    @model_validator(mode="before")
    @classmethod
    def _apply_scenario_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        defaults = SCENARIO_DEFAULTS.get(str(data.get("SCENARIO")), {})
        return _merge(defaults, data)

    @model_validator(mode="after")
    def _check_cross_fields(self) -> "ScenarioConfig":
        """所有跨字段约束在任何计算之前检查"""
        if self.SCENARIO == "full-suite":
            return self
        if not _is_power_of_two(self.GRID.POINTS):
            raise ValueError(f"GRID.POINTS = {self.GRID.POINTS} 不是 2 的幂")
        model = self.MODEL
        for name in ("KAPPA", "SIGMA", "MASS"):
            resolve_matrix(getattr(model, name), model.DIM)
        model.kappa_shift()
        eta = resolve_vector(self.RUN.ETA, model.DIM)
        if abs(float(np.linalg.norm(eta)) - 1.0) > 1e-12:
            raise ValueError(f"RUN.ETA 未归一化: ‖η‖ = {np.linalg.norm(eta)!r}")

        grid = self.GRID.build()
        run = self.RUN
        times = run.TIMES if self.SCENARIO == "toy-equivalence" else [run.TIME]
        for t in times:
            if not grid.is_commensurate(t):
                raise ValueError(f"时间 t = {t} 不是 dz = {grid.dz} 的整数倍")
        if self.SCENARIO == "toy-equivalence":
            self._check_toy(grid)
        elif self.SCENARIO == "reflect":
            self._check_reflect()
        elif self.SCENARIO == "kappa-sweep":
            self.sweep_config()
        elif self.SCENARIO == "monte-carlo":
            self._check_monte_carlo()
        return self

    def _check_toy(self, grid: SpectralGrid) -> None:
        run = self.RUN
        if len(run.DT_LIST) < 2 or any(dt <= 0 for dt in run.DT_LIST):
            raise ValueError("RUN.DT_LIST 至少需要两个正步长")
        if not _is_power_of_two(run.ITO_GRID.POINTS):
            raise ValueError(f"RUN.ITO_GRID.POINTS = {run.ITO_GRID.POINTS} 不是 2 的幂")
        ito_grid = run.ITO_GRID.build()
        for value in [run.ITO_TIME, *run.DT_LIST]:
            if not ito_grid.is_commensurate(value):
                raise ValueError(f"Ito 参数 {value} 不是 ITO_GRID 步长 {ito_grid.dz} 的整数倍")
        if not run.ITO_OFF_JUMP < run.ITO_TIME:
            raise ValueError("RUN.ITO_OFF_JUMP 必须早于 RUN.ITO_TIME")
        if max(run.TIMES, default=0.0) + run.PACKET.CENTER >= grid.half_width:
            raise ValueError("波包中心加最大传播时间超出网格半宽")

    def _check_reflect(self) -> None:
        run = self.RUN
        if len(run.REFINE_POINTS) < 2:
            raise ValueError("RUN.REFINE_POINTS 至少需要两个网格")
        for points in run.REFINE_POINTS:
            if not _is_power_of_two(points):
                raise ValueError(f"细化网格点数 {points} 不是 2 的幂")
            if not SpectralGrid(self.GRID.HALF_WIDTH, points).is_commensurate(run.TIME):
                raise ValueError(f"t = {run.TIME} 在 N = {points} 的网格上不可公度")

    def _check_monte_carlo(self) -> None:
        run = self.RUN
        resolve_matrix(run.OBSERVABLE, self.MODEL.DIM)
        try:
            compile_density(run.DENSITY)(0.0)
        except Exception as e:
            raise ValueError(f"RUN.DENSITY 无法求值: {e}") from e

    def sweep_config(self, mass_bound: Optional[float] = None) -> LimitSweepConfig:
        model = self.MODEL.build()
        return LimitSweepConfig(
            kappa_base=self.RUN.KAPPA_BASE,
            kappa_list=self.RUN.KAPPA_LIST,
            t=self.RUN.TIME,
            mass_bound=model.mass_bound if mass_bound is None else mass_bound,
            tolerance=self.RUN.EPSILON,
        )

    def eta(self) -> np.ndarray:
        return resolve_vector(self.RUN.ETA, self.MODEL.DIM)

    def observable(self) -> np.ndarray:
        return resolve_matrix(self.RUN.OBSERVABLE, self.MODEL.DIM)

    def with_overrides(self, seed: Optional[int] = None, directory: Optional[str] = None) -> "ScenarioConfig":
        """应用命令行覆盖并重新校验"""
        data = self.model_dump(mode="json")
        if seed is not None:
            data["RUN"]["SEED"] = seed
        if directory is not None:
            data["OUTPUT"]["DIRECTORY"] = directory
        return validate_scenario(data)


def validate_scenario(data: Dict[str, Any]) -> ScenarioConfig:
    """Raises: ConfigError"""
    try:
        return ScenarioConfig.model_validate(data)
    except Exception as e:
        raise ConfigError(f"场景配置无效: {e}") from e


def default_scenario(name: str) -> ScenarioConfig:
    return validate_scenario({"SCENARIO": name})


def load_scenario(file_path: Path) -> ScenarioConfig:
    """读取场景文件; 与全局配置不同, 文件缺失视为错误

    Raises:
        ConfigError: 文件不存在、格式不支持或校验失败
    """
    if not file_path.exists():
        raise ConfigError(f"场景配置文件不存在: {file_path}")
    try:
        return ScenarioConfig.load_config(file_path)
    except Exception as e:
        raise ConfigError(f"场景配置 {file_path} 无效: {e}") from e
