"""Reading and writing the PNML subset used for workflow nets.

Only net/place/transition/arc/name/initialMarking elements are understood.
Anything else in the document is skipped and reported through the module
logger, never silently.
"""

from __future__ import annotations

import logging
import xml.etree.ElementTree as ET

from .errors import PnmlError
from .petri import Arc, Marking, PetriNet, Place, Transition

log = logging.getLogger(__name__)

_KNOWN_CHILDREN = {
    "pnml": {"net"},
    "net": {"place", "transition", "arc", "name"},
    "place": {"name", "initialMarking"},
    "transition": {"name"},
    "arc": set(),
}
_KNOWN_ATTRS = {
    "pnml": set(),
    "net": {"id", "type"},
    "place": {"id"},
    "transition": {"id"},
    "arc": {"id", "source", "target"},
}


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _warn_unknown(element: ET.Element, kind: str) -> None:
    for child in element:
        name = _local_name(child.tag)
        if name not in _KNOWN_CHILDREN[kind]:
            log.warning("ignoring unknown element <%s> inside <%s>", name, kind)
    for attr in element.attrib:
        if attr not in _KNOWN_ATTRS[kind]:
            log.warning("ignoring unknown attribute %r on <%s>", attr, kind)


def _find_child(element: ET.Element, name: str) -> ET.Element | None:
    for child in element:
        if _local_name(child.tag) == name:
            return child
    return None


def _text_of(element: ET.Element | None) -> str | None:
    if element is None:
        return None
    text_el = _find_child(element, "text")
    if text_el is None or text_el.text is None:
        return None
    return text_el.text.strip()


def _required_attr(element: ET.Element, attr: str, kind: str) -> str:
    value = element.get(attr)
    if not value:
        raise PnmlError(f"<{kind}> element is missing required attribute {attr!r}")
    return value


def parse_pnml(document: str) -> PetriNet:
    """Parse a PNML document into a PetriNet.

    Labels default to the node id when the name element is absent, and the
    initial marking is read from initialMarking elements (absent means 0).
    Structural problems (dangling arcs, duplicate ids) raise NetStructureError
    via the net constructor; XML syntax errors raise PnmlError with position.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise PnmlError(f"malformed XML: {exc.msg}", line=line, column=column) from exc

    if _local_name(root.tag) != "pnml":
        raise PnmlError(f"expected <pnml> document root, found <{_local_name(root.tag)}>")
    _warn_unknown(root, "pnml")

    nets = [el for el in root if _local_name(el.tag) == "net"]
    if not nets:
        raise PnmlError("document contains no <net> element")
    if len(nets) > 1:
        log.warning("document contains %d <net> elements; using the first", len(nets))
    net_el = nets[0]
    _warn_unknown(net_el, "net")

    places: list[Place] = []
    transitions: list[Transition] = []
    arcs: list[Arc] = []
    tokens: dict[str, int] = {}

    for el in net_el:
        kind = _local_name(el.tag)
        if kind == "place":
            _warn_unknown(el, "place")
            pid = _required_attr(el, "id", "place")
            places.append(Place(id=pid, label=_text_of(_find_child(el, "name")) or ""))
            raw = _text_of(_find_child(el, "initialMarking"))
            if raw:
                try:
                    count = int(raw)
                except ValueError:
                    raise PnmlError(f"place {pid!r}: initialMarking {raw!r} is not an integer")
                if count < 0:
                    raise PnmlError(f"place {pid!r}: initialMarking must be >= 0, got {count}")
                tokens[pid] = count
        elif kind == "transition":
            _warn_unknown(el, "transition")
            tid = _required_attr(el, "id", "transition")
            transitions.append(Transition(id=tid, label=_text_of(_find_child(el, "name")) or ""))
        elif kind == "arc":
            _warn_unknown(el, "arc")
            arcs.append(
                Arc(
                    id=_required_attr(el, "id", "arc"),
                    source=_required_attr(el, "source", "arc"),
                    target=_required_attr(el, "target", "arc"),
                )
            )

    return PetriNet(
        id=net_el.get("id") or "net",
        places=places,
        transitions=transitions,
        arcs=arcs,
        initial_marking=Marking(tokens),
    )


def to_pnml(net: PetriNet) -> str:
    """Serialize a net back to the PNML subset; inverse of parse_pnml."""
    root = ET.Element("pnml")
    net_el = ET.SubElement(root, "net", id=net.id)
    for place in net.places:
        el = ET.SubElement(net_el, "place", id=place.id)
        name_el = ET.SubElement(ET.SubElement(el, "name"), "text")
        name_el.text = place.label
        count = net.initial_marking.count(place.id)
        if count:
            marking_el = ET.SubElement(ET.SubElement(el, "initialMarking"), "text")
            marking_el.text = str(count)
    for transition in net.transitions:
        el = ET.SubElement(net_el, "transition", id=transition.id)
        name_el = ET.SubElement(ET.SubElement(el, "name"), "text")
        name_el.text = transition.label
    for arc in net.arcs:
        if arc.weight != 1:
            log.warning(
                "arc %s has weight %d; the serialized subset cannot express it",
                arc.id, arc.weight,
            )
        ET.SubElement(net_el, "arc", id=arc.id, source=arc.source, target=arc.target)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"
