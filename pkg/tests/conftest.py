"""
测试公共夹具
MINI-CIA 与 CIA 知识库、偏置文件，以及关闭进度输出的设置
"""

from pathlib import Path

import pytest

from src.clauses import OQuery
from src.config import OutputConfig, Settings
from src.parsers import load_bias, load_kb, parse_clause
from src.schema import And, Atomic, Bottom, Not, Or, Some, Top

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
MINI_DIR = DATA_DIR / "mini_cia"
CIA_DIR = DATA_DIR / "cia"


def oquery(text: str) -> OQuery:
    return OQuery(parse_clause(text))


def extension(c, domain, concepts, edges):
    """有限解释下概念的外延；concepts 给原子概念，edges 是唯一角色的边集"""
    if isinstance(c, Top):
        return set(domain)
    if isinstance(c, Bottom):
        return set()
    if isinstance(c, Atomic):
        return set(concepts[c.name])
    if isinstance(c, Not):
        return set(domain) - extension(c.operand, domain, concepts, edges)
    if isinstance(c, And):
        return extension(c.left, domain, concepts, edges) & extension(c.right, domain, concepts, edges)
    if isinstance(c, Or):
        return extension(c.left, domain, concepts, edges) | extension(c.right, domain, concepts, edges)
    filler = extension(c.filler, domain, concepts, edges)
    if isinstance(c, Some):
        return {d for d in domain if any((d, e) in edges for e in filler)}
    return {d for d in domain if all(e in filler for e in domain if (d, e) in edges)}


@pytest.fixture(scope="session")
def quiet() -> Settings:
    return Settings(output=OutputConfig(show_progress=False))


@pytest.fixture(scope="session")
def mini_kb():
    return load_kb(MINI_DIR / "mini_cia.onto", MINI_DIR / "mini_cia.dlp")


@pytest.fixture(scope="session")
def mini_bias(mini_kb):
    return load_bias(MINI_DIR / "mini_cia.bias", mini_kb)


@pytest.fixture(scope="session")
def cia_kb():
    return load_kb(CIA_DIR / "cia.onto", CIA_DIR / "cia.dlp")


@pytest.fixture(scope="session")
def cia_sparse_kb():
    return load_kb(CIA_DIR / "cia.onto", CIA_DIR / "cia_sparse.dlp")


@pytest.fixture(scope="session")
def cia_bias(cia_kb):
    return load_bias(CIA_DIR / "cia.bias", cia_kb)


@pytest.fixture(scope="session")
def cia_min_g3_bias(cia_kb):
    return load_bias(CIA_DIR / "cia_minG3.bias", cia_kb)


# MINI-CIA 上的四个参照查询
@pytest.fixture(scope="session")
def q1():
    return oquery("q(X) :- speaks(X,Y) & X:MiddleEastCountry, Y:Language.")


@pytest.fixture(scope="session")
def q2():
    return oquery("q(X) :- speaks(X,Y) & X:MiddleEastCountry, Y:IndoEuropeanLanguage.")


@pytest.fixture(scope="session")
def q3():
    return oquery("q(X) :- believes(X,Y) & X:MiddleEastCountry, Y:MuslimReligion.")


@pytest.fixture(scope="session")
def q4():
    return oquery("q(A) :- believes(A,B), believes(A,C) & A:MiddleEastCountry, B:MuslimReligion.")
