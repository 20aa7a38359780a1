# src/data/telemetry.py
"""
逐步长遥测: 每个控制步长一行 CSV, 前面是以 ``#`` 开头的表头块,
包含格式版本, 配置哈希和参数回显。因故障结束的运行追加 ``# FAULT <kind>: <message>`` 尾行。

浮点数用 ``repr`` 写出, 相同配置和种子的重跑逐字节一致。
"""
import csv
import io
import os
from dataclasses import astuple, dataclass, fields
from typing import Any, Dict, List, Mapping, Optional, TextIO

import numpy as np

from src.core.errors import TelemetryFormatError
from src.utils.sim_utils import log

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TelemetryRecord:
    """一个步长的全部记录通道, 国际单位 (rad, rad/s, m, m/s, m/s², N, N·m)"""
    t: float
    s: float
    delta_hw: float
    throttle: float
    brake: float
    r_ref: float
    uy_ref: float
    ux_ref: float
    ux_dot_ref: float
    ay_ref: float
    ay_seat_ref: float
    psi_ref: float
    E_ref: float
    N_ref: float
    Mz_ref: float
    Fy_ref: float
    alpha_f_ref: float
    r: float
    uy: float
    ux: float
    ay: float
    ay_seat: float
    delta_f: float
    delta_r: float
    saturated: int
    tau_hw: float
    e_r: float
    e_uy: float
    e_ay: float
    u_ydes: float


COLUMNS = tuple(f.name for f in fields(TelemetryRecord))


def _format(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


class TelemetryWriter:
    """将记录流式写入 ``path``, 作为上下文管理器使用"""

    def __init__(self, path: str, config_sha256: str = "", params: Optional[Mapping[str, Any]] = None):
        self.path = path
        self.rows = 0
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        self._file: Optional[TextIO] = open(path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._file.write("# speedemu telemetry\n")
        self._file.write(f"# schema: {SCHEMA_VERSION}\n")
        self._file.write(f"# config_sha256: {config_sha256}\n")
        for key in sorted(params or {}):
            self._file.write(f"# param {key} = {params[key]}\n")
        self._writer.writerow(COLUMNS)

    def write(self, record: TelemetryRecord) -> None:
        self._writer.writerow([_format(v) for v in astuple(record)])
        self.rows += 1

    def fault(self, kind: str, message: str) -> None:
        """刷新已记录内容并追加故障尾行"""
        if self._file is None:
            return
        text = " ".join(str(message).split())
        self._file.write(f"# FAULT {kind}: {text}\n")
        self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
            log.info(f"遥测文件已保存: {self.path} ({self.rows} 行)")

    def __enter__(self) -> "TelemetryWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


@dataclass
class Telemetry:
    """解析后的遥测文件: 元数据, 各列数组和可选的故障尾行"""
    meta: Dict[str, str]
    params: Dict[str, str]
    columns: Dict[str, np.ndarray]
    fault: Optional[str] = None

    def __len__(self) -> int:
        return len(self.columns["t"]) if "t" in self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"telemetry has no channel '{name}'") from None

    @property
    def dt(self) -> float:
        t = self.columns["t"]
        return float(t[1] - t[0]) if len(t) > 1 else float("nan")

    @classmethod
    def from_records(cls, records: List[TelemetryRecord], meta: Optional[Dict[str, str]] = None) -> "Telemetry":
        data = np.array([astuple(r) for r in records], dtype=float).reshape(len(records), len(COLUMNS))
        columns = {name: data[:, i] for i, name in enumerate(COLUMNS)}
        return cls(meta=dict(meta or {"schema": str(SCHEMA_VERSION)}), params={}, columns=columns)


def parse_telemetry(text: str, source: str = "<string>") -> Telemetry:
    meta: Dict[str, str] = {}
    params: Dict[str, str] = {}
    fault: Optional[str] = None
    body: List[str] = []
    for line in text.splitlines():
        if line.startswith("# FAULT"):
            fault = line[len("# FAULT"):].strip()
        elif line.startswith("# param "):
            key, _, value = line[len("# param "):].partition(" = ")
            params[key.strip()] = value.strip()
        elif line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)

    if "schema" not in meta:
        raise TelemetryFormatError(f"{source}: missing schema header")
    if meta["schema"] != str(SCHEMA_VERSION):
        raise TelemetryFormatError(f"{source}: unsupported telemetry schema '{meta['schema']}'")
    if not body:
        raise TelemetryFormatError(f"{source}: no column header")

    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header = rows[0]
    try:
        data = np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(header))
    except ValueError as e:
        raise TelemetryFormatError(f"{source}: malformed telemetry row ({e})") from e
    columns = {name: data[:, i] for i, name in enumerate(header)}
    return Telemetry(meta=meta, params=params, columns=columns, fault=fault)


def read_telemetry(path: str) -> Telemetry:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise TelemetryFormatError(f"cannot read telemetry '{path}': {e}") from e
    return parse_telemetry(text, source=path)
