"""
错误类型定义
资源上限、诊断信息与参考概念配置错误
"""

from dataclasses import dataclass
from typing import List, Sequence


@dataclass(frozen=True)
class Diagnostic:
    """带源码位置的诊断信息"""
    severity: str
    line: int
    column: int
    message: str
    source: str = "<text>"

    def __str__(self) -> str:
        return f"{self.source}:{self.line}:{self.column}: {self.severity}: {self.message}"


class ALLogError(Exception):
    """所有 AL-log 工具错误的基类"""


class DiagnosticsError(ALLogError):
    """输入文件解析或校验失败"""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ResourceLimitError(ALLogError):
    """推理资源超过配置上限"""

    def __init__(self, message: str, limit: int):
        self.limit = limit
        super().__init__(f"{message} (上限 {limit})")


class TableauLimitError(ResourceLimitError):
    """表推演节点数超限"""


class SelectionLimitError(ResourceLimitError):
    """约束析取的选择函数数量超限"""


class DepthLimitError(ResourceLimitError):
    """SLD 推导深度超限"""


class SearchLimitError(ResourceLimitError):
    """B-subsumption 的 θ 候选数超限"""


class ReferenceConceptError(ALLogError):
    """参考概念没有实例，支持度无定义"""
