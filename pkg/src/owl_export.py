"""
ALC → OWL (RDF/XML) 导出
每个声明、公理与断言对应一个顶层片段，按声明顺序输出，结果逐字节稳定
"""

from typing import Optional, Sequence

from lxml import etree

from .schema import (
    All, And, Atomic, Bottom, Concept, ConceptAssertion, Equiv, Not, Ontology, Or, RoleAssertion,
    Some, Subsume, Top,
)

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
DEFAULT_BASE = "http://www.example.org/al-log/ontology"


def _q(ns: str, name: str) -> str:
    return f"{{{ns}}}{name}"


class OWLWriter:
    """把 Σ 写成一个 RDF/XML 文档"""

    def __init__(self, base: str = DEFAULT_BASE):
        self.base = base
        self.local = base + "#"
        self.root = etree.Element(_q(RDF, "RDF"),
                                  nsmap={None: self.local, "rdf": RDF, "rdfs": RDFS, "owl": OWL})
        self.root.set("{http://www.w3.org/XML/1998/namespace}base", base)
        ontology = etree.SubElement(self.root, _q(OWL, "Ontology"))
        ontology.set(_q(RDF, "about"), "")

    # ---------- 类表达式 ----------

    def describe(self, c: Concept) -> etree._Element:
        """概念的类描述元素"""
        if isinstance(c, Top):
            return self._named_class(OWL, "Thing")
        if isinstance(c, Bottom):
            return self._named_class(OWL, "Nothing")
        if isinstance(c, Atomic):
            element = etree.Element(_q(OWL, "Class"))
            element.set(_q(RDF, "ID"), c.name)
            return element
        if isinstance(c, Not):
            element = etree.Element(_q(OWL, "Class"))
            complement = etree.SubElement(element, _q(OWL, "complementOf"))
            complement.append(self.describe(c.operand))
            return element
        if isinstance(c, (And, Or)):
            element = etree.Element(_q(OWL, "Class"))
            tag = "intersectionOf" if isinstance(c, And) else "unionOf"
            collection = etree.SubElement(element, _q(OWL, tag))
            collection.set(_q(RDF, "parseType"), "Collection")
            for member in _flatten(c, type(c)):
                collection.append(self.describe(member))
            return element
        if isinstance(c, (Some, All)):
            element = etree.Element(_q(OWL, "Restriction"))
            prop = etree.SubElement(element, _q(OWL, "onProperty"))
            prop.set(_q(RDF, "resource"), "#" + c.role)
            tag = "someValuesFrom" if isinstance(c, Some) else "allValuesFrom"
            self._reference(etree.SubElement(element, _q(OWL, tag)), c.filler)
            return element
        raise TypeError(f"未知概念类型: {type(c).__name__}")

    def _named_class(self, ns: str, name: str) -> etree._Element:
        element = etree.Element(_q(OWL, "Class"))
        element.set(_q(RDF, "about"), ns + name)
        return element

    def _reference(self, parent: etree._Element, c: Concept):
        """原子概念写成 rdf:resource，复杂概念嵌套描述"""
        if isinstance(c, Atomic):
            parent.set(_q(RDF, "resource"), "#" + c.name)
        elif isinstance(c, Top):
            parent.set(_q(RDF, "resource"), OWL + "Thing")
        elif isinstance(c, Bottom):
            parent.set(_q(RDF, "resource"), OWL + "Nothing")
        else:
            parent.append(self.describe(c))

    # ---------- 顶层片段 ----------

    def declare_concept(self, name: str):
        etree.SubElement(self.root, _q(OWL, "Class")).set(_q(RDF, "ID"), name)

    def declare_role(self, name: str):
        etree.SubElement(self.root, _q(OWL, "ObjectProperty")).set(_q(RDF, "ID"), name)

    def axiom(self, left: Concept, right: Concept, relation: str):
        """C ⊑ D → rdfs:subClassOf；C ≡ D → owl:sameAs"""
        element = self.describe(left)
        tag = _q(RDFS, "subClassOf") if relation == "sub" else _q(OWL, "sameAs")
        self._reference(etree.SubElement(element, tag), right)
        self.root.append(element)

    def concept_assertion(self, a: ConceptAssertion):
        if isinstance(a.concept, Atomic):
            etree.SubElement(self.root, _q(self.local, a.concept.name)).set(_q(RDF, "ID"), a.individual)
            return
        element = etree.SubElement(self.root, _q(OWL, "Thing"))
        element.set(_q(RDF, "ID"), a.individual)
        self._reference(etree.SubElement(element, _q(RDF, "type")), a.concept)

    def role_assertion(self, a: RoleAssertion, sigma: Ontology):
        kind = _first_atomic_type(sigma, a.subject)
        tag = _q(self.local, kind) if kind else _q(OWL, "Thing")
        element = etree.SubElement(self.root, tag)
        element.set(_q(RDF, "ID"), a.subject)
        etree.SubElement(element, _q(self.local, a.role)).set(_q(RDF, "resource"), "#" + a.object)

    def comment_class(self, name: str, parents: Sequence[str], comment: str):
        element = etree.SubElement(self.root, _q(OWL, "Class"))
        element.set(_q(RDF, "ID"), name)
        for parent in parents:
            etree.SubElement(element, _q(RDFS, "subClassOf")).set(_q(RDF, "resource"), "#" + parent)
        etree.SubElement(element, _q(RDFS, "comment")).text = comment

    def to_string(self) -> str:
        return etree.tostring(self.root, pretty_print=True, xml_declaration=True,
                              encoding="UTF-8").decode("utf-8")


def _flatten(c: Concept, kind: type) -> list:
    if isinstance(c, kind):
        return _flatten(c.left, kind) + _flatten(c.right, kind)
    return [c]


def _first_atomic_type(sigma: Ontology, individual: str) -> Optional[str]:
    for a in sigma.assertions:
        if isinstance(a, ConceptAssertion) and a.individual == individual and isinstance(a.concept, Atomic):
            return a.concept.name
    return None


def export_owl(sigma: Ontology, base: str = DEFAULT_BASE, taxonomy=None) -> str:
    """
    导出 Σ 为 RDF/XML

    给出分类体系时，每个输出概念另写成一个 owl:Class，
    以父节点为 rdfs:subClassOf，内涵写入 rdfs:comment。
    """
    writer = OWLWriter(base)
    for name in sigma.concepts:
        writer.declare_concept(name)
    for name in sigma.roles:
        writer.declare_role(name)
    for axiom in sigma.axioms:
        if isinstance(axiom, Equiv):
            writer.axiom(axiom.left, axiom.right, "same")
        elif isinstance(axiom, Subsume):
            writer.axiom(axiom.sub, axiom.sup, "sub")
    for a in sigma.assertions:
        if isinstance(a, ConceptAssertion):
            writer.concept_assertion(a)
        else:
            writer.role_assertion(a, sigma)

    if taxonomy is not None:
        parents = {}
        for parent, child in taxonomy.edges():
            parents.setdefault(child.id, []).append(parent.label)
        root = taxonomy.root
        reference = [c.concept.name for c in root.intension[0].constraints][:1] if root else []
        for node in taxonomy.ordered_nodes():
            writer.comment_class(node.label, parents.get(node.id, reference), "\n".join(node.intension_text()))
    return writer.to_string()
