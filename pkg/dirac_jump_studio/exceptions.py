"""
dirac-jump-studio 异常类
"""

from typing import Any, List, Optional


class StudioError(Exception):
    """所有数值与配置异常的基础异常类"""


class NonHermitianInput(StudioError):
    """矩阵不满足厄米性"""

    def __init__(self, name: str, defect: float):
        self.name = name
        self.defect = defect
        super().__init__(f"{name} 不是厄米矩阵: ‖A − A†‖ = {defect:.3e}")


class ShapeMismatch(StudioError):
    """矩阵或向量维度不一致"""


class InvalidGrid(StudioError):
    """网格参数非法 (半宽需为正, 点数需为 2 的幂)"""


class WrongRepresentation(StudioError):
    """波场已处于目标表象"""


class GridMismatch(StudioError):
    """参与运算的对象不在同一网格上"""


class NonCommensurateShift(StudioError):
    """平移量不是 dz 的整数倍"""

    def __init__(self, shift: float, dz: float):
        self.shift = shift
        self.dz = dz
        super().__init__(f"平移量 {shift!r} 不是网格步长 dz = {dz!r} 的整数倍")


class NotInHardyClass(StudioError):
    """初值不在 Hardy 输入类中"""

    def __init__(self, outside_mass: float, total_mass: float):
        self.outside_mass = outside_mass
        self.total_mass = total_mass
        super().__init__(f"Hardy 类之外的质量 {outside_mass:.3e} (总质量 {total_mass:.3e})")


class NotInInductiveClass(StudioError):
    """波场不属于归纳族 𝓖_ϰ∓ 的 κ° 子空间, 或 κ ≤ κ°"""


class UnsupportedInput(StudioError):
    """输入波在 z ≤ 0 处存在质量"""


class SkippedPrecondition(StudioError):
    """时间反演检验的对称性前提不成立"""


class UnnormalizedAmplitudes(StudioError):
    """动量振幅未归一化"""

    def __init__(self, norm_sq: float):
        self.norm_sq = norm_sq
        super().__init__(f"动量振幅未归一化: ‖g‖² = {norm_sq!r}")


class SupportViolation(StudioError):
    """动量振幅在 k ≥ κ° 处非零"""


class NonpositiveTolerance(StudioError):
    """容差必须为正"""


class DegenerateDensity(StudioError):
    """跃迁时间密度为空或为负"""


class InvalidStateVector(StudioError):
    """内部态向量维度错误或未归一化"""


class ConfigError(StudioError):
    """场景配置无效"""


class NumericalAssertionFailure(StudioError):
    """场景中存在未通过的数值断言"""

    def __init__(self, report: Any, failed: Optional[List[str]] = None):
        self.report = report
        self.failed = list(failed or [])
        super().__init__(f"数值断言失败: {', '.join(self.failed) or '未知'}")


class EmptyRecords(StudioError):
    """没有可写出的记录"""


class IoError(StudioError):
    """结果文件读写失败"""
