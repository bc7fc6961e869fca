"""
领域异常
所有业务错误均为 ValueError 子类，CLI 统一映射为退出码
"""
from typing import Optional


class PufError(ValueError):
    """业务错误基类"""


class ConfigurationError(PufError):
    """器件或实验配置非法"""


class ModelError(PufError):
    """光学模型不收敛"""


class InputError(PufError):
    """输入范围或长度不合法"""


class NumericalError(PufError):
    """数值计算失败（NaN、奇异矩阵）"""


class NarmaDivergedError(PufError):
    """NARMA 序列发散"""

    def __init__(self, index: int, bound: float):
        self.index = index
        self.bound = bound
        super().__init__(f"NARMA 序列在第 {index} 步超出界限 {bound}")


class ChallengeGenerationError(PufError):
    """重试次数用尽仍无法生成挑战"""


class UndefinedMetricError(PufError):
    """指标无定义（目标方差为零）"""


class CalibrationError(PufError):
    """权重集合退化，无法校准"""


class DegenerateFitError(PufError):
    """高斯拟合标准差为零"""


class ParameterError(PufError):
    """BCH 参数不可行"""


class ReconstructionRejected(PufError):
    """密钥重建被拒绝"""

    def __init__(self, reason: str, detail: Optional[str] = None):
        self.reason = reason
        super().__init__(f"密钥重建被拒绝: {reason}" + (f" ({detail})" if detail else ""))


class ApplicabilityError(PufError):
    """序列不满足统计检验的适用条件"""


class ArtifactError(PufError):
    """产物文件缺失或格式错误"""
