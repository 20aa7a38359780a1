# src/utils/sim_utils.py
"""
公共工具: 包日志记录器, YAML 加载, 目录创建和配置哈希。
各模块复用这里的 ``log``, 不各自创建处理器。
"""
import hashlib
import json
import logging
import os
from typing import Any, Dict

import yaml

LOG_FORMAT = '[%(asctime)s] [%(levelname)s] %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'

log = logging.getLogger("speedemu")


def setup_logging(level: int = logging.INFO) -> None:
    """配置日志记录 (只在入口调用一次)"""
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATEFMT)
    log.setLevel(level)


def load_config(path: str) -> Dict[str, Any]:
    """加载 YAML 配置文件, 空文件返回空字典"""
    try:
        with open(path, 'r', encoding="utf-8") as f:
            config = yaml.safe_load(f)
    except FileNotFoundError:
        log.error(f"错误：配置文件 '{path}' 未找到。")
        raise
    except yaml.YAMLError as e:
        log.error(f"错误：解析配置文件 '{path}' 失败: {e}")
        raise
    if config is None:
        config = {}
    if not isinstance(config, dict):
        raise ValueError(f"配置文件 '{path}' 顶层必须是映射 (mapping)。")
    log.info(f"配置文件 '{path}' 加载成功。")
    return config


def safe_mkdir(path: str) -> None:
    """安全地创建目录（如果不存在）"""
    if not os.path.exists(path):
        log.info(f"创建目录：{path}")
        os.makedirs(path, exist_ok=True)
    else:
        log.debug(f"目录已存在：{path}")


def config_hash(data: Dict[str, Any]) -> str:
    """扁平配置的规范 JSON 形式的 SHA256"""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
