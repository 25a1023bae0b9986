"""JSON documents for nets and step transition systems, and DOT export."""

from __future__ import annotations

import json
from typing import Any

from .algebra import FORWARD, INDEXED, REVERSE, EMPTY, ActionName, Multiset
from .errors import SchemaError, SteprevError
from .petri import PTNet, PTRNet
from .sts import StepTransitionSystem

VERSION = 1
_KIND_NAMES = {FORWARD: "forward", REVERSE: "reverse", INDEXED: "indexed-reverse"}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise SchemaError("the document must be a JSON object")
    version = doc.get("version")
    if version != VERSION:
        raise SchemaError(f"unsupported schema version {version!r}", field="version")
    return doc


def _list(doc: dict, key: str, required: bool = True) -> list:
    if key not in doc:
        if required:
            raise SchemaError("missing field", field=key)
        return []
    value = doc[key]
    if not isinstance(value, list):
        raise SchemaError("expected a list", field=key)
    return value


def _str(obj: Any, where: str) -> str:
    if not isinstance(obj, str) or not obj:
        raise SchemaError("expected a non-empty string", field=where)
    return obj


def _count(obj: Any, where: str, positive: bool = False) -> int:
    if not isinstance(obj, int) or isinstance(obj, bool) or obj < (1 if positive else 0):
        raise SchemaError("expected a non-negative integer" if not positive else "expected a positive integer", field=where)
    return obj


# -- actions -----------------------------------------------------------------------


def action_entry(a: ActionName) -> dict:
    out = {"id": str(a), "kind": _KIND_NAMES[a.kind], "base": a.base}
    if a.index is not None:
        out["index"] = a.index
    return out


def _parse_actions(entries: list) -> dict[str, ActionName]:
    out: dict[str, ActionName] = {}
    for i, e in enumerate(entries):
        where = f"actions[{i}]"
        if not isinstance(e, dict):
            raise SchemaError("expected an object", field=where)
        ident = _str(e.get("id"), where + ".id")
        kind = e.get("kind", "forward")
        if kind not in _KIND_CODES:
            raise SchemaError(f"unknown action kind {kind!r}", field=where + ".kind")
        try:
            a = ActionName(e.get("base", ident), _KIND_CODES[kind], e.get("index"))
        except SteprevError as exc:
            raise SchemaError(str(exc), field=where) from exc
        if str(a) != ident:
            raise SchemaError(f"id {ident!r} does not match kind/base/index ({a})", field=where + ".id")
        if ident in out:
            raise SchemaError(f"duplicate action {ident!r}", field=where)
        out[ident] = a
    return out


# -- nets -------------------------------------------------------------------------------


def net_to_doc(net: PTNet) -> dict:
    places = [
        {"id": p, "initial": [m[p] for m in net.initial_markings]} for p in net.places
    ]
    arcs = [{"from": str(s), "to": str(t), "weight": w} for s, t, w in net.arcs()]
    doc = {
        "version": VERSION,
        "kind": "net",
        "places": places,
        "actions": [action_entry(a) for a in net.actions],
        "arcs": sorted(arcs, key=lambda e: (e["from"], e["to"])),
    }
    if net.has_read_arcs:
        doc["readArcs"] = [{"place": p, "action": str(a), "value": v} for p, a, v in net.read_arcs()]
    return doc


def net_from_doc(doc: dict) -> PTNet:
    if doc.get("kind", "net") != "net":
        raise SchemaError("expected a net document", field="kind")
    actions = _parse_actions(_list(doc, "actions"))
    places: list[str] = []
    columns = None
    initial: list[dict[str, int]] = []
    for i, e in enumerate(_list(doc, "places")):
        where = f"places[{i}]"
        if not isinstance(e, dict):
            raise SchemaError("expected an object", field=where)
        p = _str(e.get("id"), where + ".id")
        if p in places or p in actions:
            raise SchemaError(f"duplicate or clashing id {p!r}", field=where + ".id")
        values = e.get("initial", [0])
        if isinstance(values, int) and not isinstance(values, bool):
            values = [values]
        if not isinstance(values, list) or not values:
            raise SchemaError("expected a non-empty list of token counts", field=where + ".initial")
        if columns is None:
            columns = len(values)
            initial = [{} for _ in range(columns)]
        elif len(values) != columns:
            raise SchemaError(f"expected {columns} initial markings", field=where + ".initial")
        for j, v in enumerate(values):
            if _count(v, f"{where}.initial[{j}]"):
                initial[j][p] = v
        places.append(p)
    place_set = set(places)
    pre, post, seen = {}, {}, set()
    for i, e in enumerate(_list(doc, "arcs", required=False)):
        where = f"arcs[{i}]"
        if not isinstance(e, dict):
            raise SchemaError("expected an object", field=where)
        src, dst = _str(e.get("from"), where + ".from"), _str(e.get("to"), where + ".to")
        w = _count(e.get("weight", 1), where + ".weight")
        if (src, dst) in seen:
            raise SchemaError(f"duplicate arc {src} -> {dst}", field=where)
        seen.add((src, dst))
        if src in place_set and dst in actions:
            pre[(src, actions[dst])] = w
        elif src in actions and dst in place_set:
            post[(actions[src], dst)] = w
        else:
            bad = "from" if src not in place_set and src not in actions else "to"
            raise SchemaError("arc must connect a declared place and a declared action", field=f"{where}.{bad}")
    read = {}
    for i, e in enumerate(_list(doc, "readArcs", required=False)):
        where = f"readArcs[{i}]"
        if not isinstance(e, dict):
            raise SchemaError("expected an object", field=where)
        p, a = _str(e.get("place"), where + ".place"), _str(e.get("action"), where + ".action")
        if p not in place_set:
            raise SchemaError(f"undeclared place {p!r}", field=where + ".place")
        if a not in actions:
            raise SchemaError(f"undeclared action {a!r}", field=where + ".action")
        read[(p, actions[a])] = _count(e.get("value"), where + ".value")
    cls = PTRNet if read else PTNet
    try:
        return cls(places, actions.values(), pre, post, initial or [{}], read)
    except SteprevError as exc:
        raise SchemaError(str(exc)) from exc


# -- step transition systems -----------------------------------------------------------------


def sts_to_doc(sts: StepTransitionSystem) -> dict:
    implicit = all(s in sts.successors(s, EMPTY) for s in sts.states)
    transitions = [
        {"from": t.source, "step": t.step.as_dict(), "to": t.target}
        for t in sts.transitions
        if not (implicit and not t.step and t.source == t.target)
    ]
    return {
        "version": VERSION,
        "kind": "sts",
        "states": list(sts.states),
        "initials": list(sts.initials),
        "actions": [action_entry(a) for a in sts.actions],
        "transitions": transitions,
        "implicitEmptyLoops": implicit,
    }


def sts_from_doc(doc: dict) -> StepTransitionSystem:
    if doc.get("kind", "sts") != "sts":
        raise SchemaError("expected a step transition system document", field="kind")
    actions = _parse_actions(_list(doc, "actions"))
    states = []
    for i, s in enumerate(_list(doc, "states")):
        s = _str(s, f"states[{i}]")
        if s in states:
            raise SchemaError(f"duplicate state {s!r}", field=f"states[{i}]")
        states.append(s)
    state_set = set(states)
    initials = []
    for i, s in enumerate(_list(doc, "initials")):
        if _str(s, f"initials[{i}]") not in state_set:
            raise SchemaError(f"undeclared initial state {s!r}", field=f"initials[{i}]")
        initials.append(s)
    if not initials:
        raise SchemaError("at least one initial state is required", field="initials")
    transitions, seen = [], set()
    for i, e in enumerate(_list(doc, "transitions", required=False)):
        where = f"transitions[{i}]"
        if not isinstance(e, dict):
            raise SchemaError("expected an object", field=where)
        src, dst = _str(e.get("from"), where + ".from"), _str(e.get("to"), where + ".to")
        for key, s in (("from", src), ("to", dst)):
            if s not in state_set:
                raise SchemaError(f"undeclared state {s!r}", field=f"{where}.{key}")
        step = e.get("step", {})
        if not isinstance(step, dict):
            raise SchemaError("expected an object mapping actions to counts", field=where + ".step")
        counts = {}
        for a, c in step.items():
            if a not in actions:
                raise SchemaError(f"undeclared action {a!r}", field=f"{where}.step")
            if _count(c, f"{where}.step.{a}"):
                counts[actions[a]] = c
        alpha = Multiset(counts)
        if (src, alpha, dst) in seen:
            raise SchemaError("duplicate transition", field=where)
        seen.add((src, alpha, dst))
        transitions.append((src, alpha, dst))
    implicit = doc.get("implicitEmptyLoops", False)
    if not isinstance(implicit, bool):
        raise SchemaError("expected a boolean", field="implicitEmptyLoops")
    try:
        return StepTransitionSystem(states, actions.values(), transitions, initials, empty_loops=implicit)
    except SteprevError as exc:
        raise SchemaError(str(exc)) from exc


# -- files -----------------------------------------------------------------------------------


def parse(text: str):
    """Parse either document kind."""
    doc = _load(text)
    kind = doc.get("kind")
    if kind == "net":
        return net_from_doc(doc)
    if kind == "sts":
        return sts_from_doc(doc)
    raise SchemaError(f"unknown document kind {kind!r}", field="kind")


def serialize(obj) -> str:
    if isinstance(obj, PTNet):
        return dumps(net_to_doc(obj))
    if isinstance(obj, StepTransitionSystem):
        return dumps(sts_to_doc(obj))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_net(path: str) -> PTNet:
    obj = parse(_read(path))
    if not isinstance(obj, PTNet):
        raise SchemaError(f"{path} is not a net document", field="kind")
    return obj


def read_sts(path: str) -> StepTransitionSystem:
    obj = parse(_read(path))
    if not isinstance(obj, StepTransitionSystem):
        raise SchemaError(f"{path} is not a step transition system document", field="kind")
    return obj


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc


# -- DOT ---------------------------------------------------------------------------------------


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(sts: StepTransitionSystem, name: str = "sts") -> str:
    """Graphviz text; initial states are doubly circled and empty loops omitted."""
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    initial = set(sts.initials)
    for s in sts.states:
        shape = ' [shape=doublecircle]' if s in initial else ""
        lines.append(f"  {_quote(s)}{shape};")
    for t in sts.transitions:
        if not t.step:
            continue
        lines.append(f"  {_quote(t.source)} -> {_quote(t.target)} [label={_quote(t.step.literal())}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
