# src/core/errors.py
"""异常层次, 每个运行级错误都带有命令行返回的进程退出码"""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INTEGRATION = 4
EXIT_NONCONVERGENCE = 5
EXIT_TELEMETRY = 6


class SpeedEmuError(Exception):
    """终止运行的错误基类"""
    exit_code = 1
    kind = "error"


class ConfigError(SpeedEmuError):
    exit_code = EXIT_CONFIG
    kind = "config"

    def __init__(self, message: str, violations=None):
        self.violations = list(violations or [])
        if self.violations:
            message = message + ": " + "; ".join(self.violations)
        super().__init__(message)


class IntegrationError(SpeedEmuError):
    """状态出现非有限值, 或运动方程无法处理的几何"""
    exit_code = EXIT_INTEGRATION
    kind = "integration"


class DegenerateSpeedError(IntegrationError):
    pass


class ConvergenceError(SpeedEmuError):
    exit_code = EXIT_NONCONVERGENCE
    kind = "convergence"


class TelemetryFormatError(SpeedEmuError):
    exit_code = EXIT_TELEMETRY
    kind = "telemetry"


class DomainError(ValueError):
    """参数超出模型函数的定义域"""


class SamplingError(ValueError):
    pass


class EvaluationError(ValueError):
    pass
