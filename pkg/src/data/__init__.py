# src/data/__init__.py
# 遥测与报告持久化模块

from .report_manager import ReportManager
from .telemetry import Telemetry, TelemetryRecord, TelemetryWriter, read_telemetry

__all__ = ['ReportManager', 'Telemetry', 'TelemetryRecord', 'TelemetryWriter', 'read_telemetry']
