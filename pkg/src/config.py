"""
配置管理模块
所有配置来自命令行参数与输入文件，不读取环境变量
"""

from typing import Literal

from pydantic import BaseModel, Field


class ReasoningConfig(BaseModel):
    """推理资源上限"""
    max_depth: int = Field(default=50, ge=1)               # SLD 推导深度
    tableau_cap: int = Field(default=1_000_000, ge=1)      # 单次一致性检查的节点上限
    selection_cap: int = Field(default=100_000, ge=1)      # 约束析取的选择数上限
    theta_cap: int = Field(default=100_000, ge=1)          # B-subsumption 的 θ 候选上限
    merge_constraints: bool = True                         # 同一常量上的约束按 ⊓ 合并


class OutputConfig(BaseModel):
    """输出配置"""
    format: Literal["text", "records"] = "text"
    show_progress: bool = True
    trace: bool = False


class Settings(BaseModel):
    """全局设置"""
    reasoning: ReasoningConfig = ReasoningConfig()
    output: OutputConfig = OutputConfig()

    @classmethod
    def from_args(cls, args) -> "Settings":
        """从命令行参数构建配置"""
        base = cls()
        return cls(
            reasoning=ReasoningConfig(
                max_depth=getattr(args, "max_depth", None) or base.reasoning.max_depth,
                tableau_cap=getattr(args, "tableau_cap", None) or base.reasoning.tableau_cap,
            ),
            output=OutputConfig(
                format=getattr(args, "format", None) or base.output.format,
                show_progress=not getattr(args, "no_progress", False),
                trace=bool(getattr(args, "trace", False)),
            ),
        )


# 全局默认配置
settings = Settings()
