# src/data/report_manager.py
import csv
import json
import os
from typing import Any, Dict, List, Optional, Sequence

from src.utils.sim_utils import log, safe_mkdir

INDEX_FILE = "index.json"


class ReportManager:
    """
    管理输出目录中运行结果的 JSON 报告和可直接绘图的 CSV 表格

    ``index.json`` 按运行名称列出写入该目录的全部运行, 同名重跑时替换原条目。
    """

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        self._index_path = os.path.join(output_dir, INDEX_FILE)
        self._index: List[Dict[str, Any]] = []

    def path_for(self, name: str, suffix: str) -> str:
        return os.path.join(self.output_dir, f"{name}{suffix}")

    def load_index(self) -> List[Dict[str, Any]]:
        """读取运行索引, 文件缺失或损坏时返回空列表"""
        if not os.path.exists(self._index_path):
            self._index = []
            return self._index
        try:
            with open(self._index_path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (json.JSONDecodeError, OSError) as e:
            log.warning(f"运行索引 '{self._index_path}' 无法读取, 将重建: {e}")
            data = []
        if not isinstance(data, list):
            log.warning(f"运行索引 '{self._index_path}' 不是列表, 将重建")
            data = []
        # 只保留带 id 的条目
        self._index = [item for item in data if isinstance(item, dict) and "id" in item]
        return self._index

    def _save_index(self) -> None:
        safe_mkdir(self.output_dir)
        with open(self._index_path, "w", encoding="utf-8") as f:
            json.dump(self._index, f, ensure_ascii=False, indent=2)

    def update_entry(self, entry: Dict[str, Any]) -> None:
        """插入索引条目, 已有相同 ``id`` 时替换"""
        self.load_index()
        for i, item in enumerate(self._index):
            if item.get("id") == entry["id"]:
                self._index[i] = entry
                break
        else:
            self._index.append(entry)
        self._save_index()

    def get_entry(self, run_id: str) -> Optional[Dict[str, Any]]:
        for item in self.load_index():
            if item.get("id") == run_id:
                return item
        return None

    def save_report(self, name: str, report: Dict[str, Any], extra: Optional[Dict[str, Any]] = None) -> str:
        """
        写出 ``<name>_report.json`` 并登记到运行索引

        Args:
            name: 运行名称
            report: 报告内容
            extra: 附加字段, 合并进报告

        Returns:
            报告文件路径
        """
        safe_mkdir(self.output_dir)
        path = self.path_for(name, "_report.json")
        payload = dict(report)
        if extra:
            payload.update(extra)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
        self.update_entry({"id": name, "report": os.path.basename(path),
                           "telemetry": f"{name}.csv",
                           "complies": payload.get("compliance_pct", 0.0) >= 95.0})
        log.info(f"报告已保存: {path}")
        return path


def load_report(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_table(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """带表头的 CSV (频谱, 运行对比)"""
    directory = os.path.dirname(os.path.abspath(path))
    safe_mkdir(directory)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    log.info(f"表格已写入: {path} ({len(rows)} 行)")
    return path
