"""Serialize temporal graphs to a small DOT subset and parse them back.

Encoded form::

    digraph g {
      "isolated event";
      "crowd gathered downtown" -> "police made arrests" [label="before"];
    }

The decoder is more lenient than the encoder: it accepts arbitrary
whitespace, optional semicolons, an optional graph name, bare identifiers
as node names and ``is included`` as a spelling of ``is_included``. It
still rejects anything outside node and labelled-edge statements, so that
"parses" is a well-defined predicate on generated text.
"""

from __future__ import annotations

import re

from .graph import Event, RelationLabel, TemporalEdge, TemporalGraph, normalize_phrase

__all__ = [
    "DotDecodeError",
    "DotSyntaxError",
    "DotLabelError",
    "DotSelfLoopError",
    "encode",
    "decode",
    "is_valid_dot",
]

DOT_LABELS = frozenset(
    {
        RelationLabel.BEFORE,
        RelationLabel.AFTER,
        RelationLabel.INCLUDES,
        RelationLabel.IS_INCLUDED,
        RelationLabel.SIMULTANEOUS,
    }
)


class DotDecodeError(ValueError):
    """Raised when text is not a graph in the supported DOT subset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DotSyntaxError(DotDecodeError):
    pass


class DotLabelError(DotDecodeError):
    pass


class DotSelfLoopError(DotDecodeError):
    pass


def _quote(phrase: str) -> str:
    return '"' + phrase.replace("\\", "\\\\").replace('"', '\\"') + '"'


def encode(g: TemporalGraph) -> str:
    """Return the canonical DOT text for ``g``.

    Isolated events come first in event order, then one statement per edge
    in the graph's document order. Labels are written as stored.
    """
    seen = {}
    for ev in g.events:
        if ev.phrase in seen:
            raise ValueError(
                f"events at tokens {seen[ev.phrase]} and {ev.token_index} "
                f"share the node name {ev.phrase!r}"
            )
        seen[ev.phrase] = ev.token_index
    lines = ["digraph g {"]
    for ev in g.isolated_events():
        lines.append(f"  {_quote(ev.phrase)};")
    for e in g.edges:
        if e.label not in DOT_LABELS:
            raise ValueError(f"label {e.label.value!r} cannot be encoded")
        lines.append(
            f"  {_quote(e.source.phrase)} -> {_quote(e.target.phrase)}"
            f' [label="{e.label.value}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*|\#[^\n]*|/\*.*?\*/)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<arrow>->)
  | (?P<punct>[{}\[\];=,])
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*|-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<bad>.)
    """,
    re.VERBOSE | re.DOTALL,
)
_UNESCAPE = re.compile(r"\\(.)", re.DOTALL)
_EOF = "<eof>"


def _tokenize(text):
    out = []
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            pos = m.start()
            if text[pos] == '"':
                raise DotSyntaxError("unterminated string", pos)
            raise DotSyntaxError(f"unexpected character {text[pos]!r}", pos)
        out.append((kind, m.group(), m.start()))
    out.append((_EOF, "", len(text)))
    return out


def _node_name(tok):
    kind, value, _ = tok
    if kind == "str":
        inner = value[1:-1]
        return _UNESCAPE.sub(r"\1", inner) if "\\" in inner else inner
    return value


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        if tok[0] != _EOF:
            self.i += 1
        return tok

    def expect(self, value, what=None):
        tok = self.next()
        if tok[1] != value or tok[0] == "str":
            raise DotSyntaxError(f"expected {what or repr(value)}", tok[2])
        return tok

    def node(self):
        tok = self.next()
        if tok[0] not in ("str", "id"):
            raise DotSyntaxError("expected node name", tok[2])
        return tok

    def attrs(self):
        """Parse ``[label=...]``; returns (label text, offset of the value)."""
        self.expect("[")
        label = None
        while True:
            tok = self.next()
            if tok[1] == "]" and tok[0] == "punct":
                break
            if tok[0] not in ("id", "str") or _node_name(tok) != "label":
                raise DotSyntaxError("only the label attribute is supported", tok[2])
            self.expect("=")
            val = self.next()
            if val[0] not in ("id", "str"):
                raise DotSyntaxError("expected attribute value", val[2])
            if label is not None:
                raise DotSyntaxError("duplicate label attribute", tok[2])
            label = (_node_name(val), val[2])
            if self.peek()[1] in (",", ";") and self.peek()[0] == "punct":
                self.next()
        if label is None:
            raise DotSyntaxError("edge without label", tok[2])
        return label

    def statements(self):
        """Yield ``(src_tok, tgt_tok, label_text, label_at)``; ``tgt_tok`` is None for node statements."""
        tok = self.next()
        if tok[0] != "id" or tok[1] != "digraph":
            raise DotSyntaxError("expected 'digraph'", tok[2])
        if self.peek()[0] in ("id", "str"):
            self.next()
        self.expect("{")
        while True:
            tok = self.peek()
            if tok[0] == "punct" and tok[1] == "}":
                self.next()
                break
            if tok[0] == _EOF:
                raise DotSyntaxError("unexpected end of input", tok[2])
            src_tok = self.node()
            if self.peek()[0] == "arrow":
                self.next()
                tgt_tok = self.node()
                label_text, label_at = self.attrs()
                yield src_tok, tgt_tok, label_text, label_at
            else:
                if self.peek()[1] == "[" and self.peek()[0] == "punct":
                    raise DotSyntaxError("node attributes are not supported", self.peek()[2])
                yield src_tok, None, None, None
            if self.peek()[1] == ";" and self.peek()[0] == "punct":
                self.next()
        end = self.next()
        if end[0] != _EOF:
            raise DotSyntaxError("trailing content after graph", end[2])


# The exact layout written by encode(); matched line by line to skip tokenizing.
_HEAD, _TAIL = "digraph g {\n", "}\n"
_CANON_LINE = re.compile(
    r' {2}("(?:[^"\\\n]|\\.)*")(?: -> ("(?:[^"\\\n]|\\.)*") \[label=("[a-z_]+")\])?;\n'
)


def _canonical_statements(text):
    if not (text.startswith(_HEAD) and text.endswith(_TAIL)):
        return None
    pos, stop = len(_HEAD), len(text) - len(_TAIL)
    out = []
    while pos < stop:
        m = _CANON_LINE.match(text, pos)
        if m is None:
            return None
        src = ("str", m.group(1), m.start(1))
        if m.group(2) is None:
            out.append((src, None, None, None))
        else:
            out.append((src, ("str", m.group(2), m.start(2)), m.group(3)[1:-1], m.start(3)))
        pos = m.end()
    return out


def _build(statements):
    nodes = {}
    by_raw = {}
    edges = []

    def event_for(tok):
        ev = by_raw.get(tok[1])
        if ev is None:
            phrase = normalize_phrase(_node_name(tok))
            if phrase not in nodes:
                nodes[phrase] = Event.from_phrase(phrase, len(nodes))
            ev = by_raw[tok[1]] = nodes[phrase]
        return ev

    for src_tok, tgt_tok, label_text, label_at in statements:
        if tgt_tok is None:
            event_for(src_tok)
            continue
        try:
            label = RelationLabel.parse(label_text)
        except ValueError:
            label = None
        if label not in DOT_LABELS:
            raise DotLabelError(f"unknown relation label {label_text!r}", label_at)
        src, tgt = event_for(src_tok), event_for(tgt_tok)
        if src is tgt:
            raise DotSelfLoopError(f"self-loop on {src.phrase!r}", src_tok[2])
        edges.append(TemporalEdge(src, tgt, label))
    return nodes, edges


def _parse(text):
    stmts = _canonical_statements(text)
    if stmts is None:
        stmts = _Parser(text).statements()
    return _build(stmts)


def decode(text: str, doc_id: str = "") -> TemporalGraph:
    """Parse DOT text into a graph.

    Nodes get synthetic token offsets in order of first appearance and
    normalized phrases; repeated edge statements collapse to one.

    Raises
    ------
    DotSyntaxError
        Malformed input; ``offset`` is the character position of the problem.
    DotLabelError
        An edge label outside the five relation labels.
    DotSelfLoopError
        An edge from a node to itself.
    """
    nodes, edges = _parse(text)
    return TemporalGraph(doc_id=doc_id, events=nodes.values(), edges=edges)


def is_valid_dot(text: str) -> bool:
    try:
        _parse(text)
    except DotDecodeError:
        return False
    return True
