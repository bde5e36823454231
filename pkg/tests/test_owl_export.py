"""ALC → RDF/XML 导出"""

from lxml import etree

from src.discovery import discover
from src.owl_export import OWL, RDF, RDFS, OWLWriter, export_owl
from src.parsers import parse_ontology
from src.schema import And, Atomic, Not, Some
from src.taxonomy import build_taxonomy


def _parse(text: str) -> etree._Element:
    return etree.fromstring(text.encode("utf-8"))


def _top(root, ns: str, name: str):
    return root.findall(f"{{{ns}}}{name}")


def test_mini_ontology_export(mini_kb):
    root = _parse(export_owl(mini_kb.sigma))
    assert root.tag == f"{{{RDF}}}RDF"
    assert len(_top(root, OWL, "Ontology")) == 1
    # 14 个声明 + 10 条公理（左部均为原子概念）
    assert len(_top(root, OWL, "Class")) == 24
    assert len(_top(root, OWL, "ObjectProperty")) == 1
    assert len(root.findall(f".//{{{RDFS}}}subClassOf")) == 9
    assert len(root.findall(f".//{{{OWL}}}sameAs")) == 1


def test_defined_concept_is_written_as_restriction(mini_kb):
    root = _parse(export_owl(mini_kb.sigma))
    same = root.find(f".//{{{OWL}}}sameAs")
    intersection = same.find(f"{{{OWL}}}Class/{{{OWL}}}intersectionOf")
    assert intersection.get(f"{{{RDF}}}parseType") == "Collection"
    restriction = intersection.find(f"{{{OWL}}}Restriction")
    assert restriction.find(f"{{{OWL}}}onProperty").get(f"{{{RDF}}}resource") == "#Hosts"
    assert restriction.find(f"{{{OWL}}}someValuesFrom").get(f"{{{RDF}}}resource") == "#MiddleEasternEthnicGroup"


def test_assertions_use_local_namespace(mini_kb):
    writer = OWLWriter()
    root = _parse(export_owl(mini_kb.sigma))
    typed = root.findall(f"{{{writer.local}}}AsianCountry")
    # 3 条概念断言 + 3 条以 AsianCountry 个体为主语的角色断言
    assert len(typed) == 6
    hosts = [e.find(f"{{{writer.local}}}Hosts") for e in typed]
    assert sorted(h.get(f"{{{RDF}}}resource") for h in hosts if h is not None) == \
        ["#Arabs", "#Armenians", "#Persians"]


def test_complex_assertion_and_complement():
    sigma = parse_ontology(
        "concept A. concept B. role R. individual a.\n"
        "A <= not B.\n"
        "a : A and some(R, B).\n"
    )
    root = _parse(export_owl(sigma))
    complement = root.find(f".//{{{OWL}}}complementOf")
    assert complement.find(f"{{{OWL}}}Class").get(f"{{{RDF}}}ID") == "B"
    thing = _top(root, OWL, "Thing")
    assert len(thing) == 1
    assert thing[0].find(f"{{{RDF}}}type/{{{OWL}}}Class/{{{OWL}}}intersectionOf") is not None


def test_describe_nested_concept():
    writer = OWLWriter()
    element = writer.describe(And(Atomic("A"), And(Not(Atomic("B")), Some("r", Atomic("C")))))
    members = element.find(f"{{{OWL}}}intersectionOf")
    assert len(members) == 3


def test_export_is_stable(mini_kb):
    assert export_owl(mini_kb.sigma) == export_owl(mini_kb.sigma)


def test_taxonomy_classes(mini_kb, mini_bias, quiet):
    result = discover(mini_kb, mini_bias.language, mini_bias.thresholds, quiet)
    g = build_taxonomy(result, mini_kb, mini_bias.language, mini_bias.bias, quiet)
    root = _parse(export_owl(mini_kb.sigma, taxonomy=g))
    commented = [e for e in _top(root, OWL, "Class") if e.find(f"{{{RDFS}}}comment") is not None]
    assert [e.get(f"{{{RDF}}}ID") for e in commented] == [g.nodes[1].label, g.nodes[2].label]

    parent_of = {e.get(f"{{{RDF}}}ID"): e.find(f"{{{RDFS}}}subClassOf").get(f"{{{RDF}}}resource")
                 for e in commented}
    assert parent_of[g.nodes[1].label] == "#MiddleEastCountry"
    assert parent_of[g.nodes[2].label] == "#" + g.nodes[1].label
    comment = commented[1].find(f"{{{RDFS}}}comment").text
    assert comment.count("\n") == len(g.nodes[2].intension) - 1
