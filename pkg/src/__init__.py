"""
AL-log Concept Refinement - 本体概念精化工具
ALC 描述逻辑 + 约束 Datalog 的混合知识库推理、频繁 O-query 发现与概念分类树构建
"""

__version__ = "0.2.0"
