"""The ``.phase`` text format and deterministic JSON reports.

Grammar::

    phase <Ident> {
      elements: <Ident>+ ;
      defect: (<Ident>=<Nat>)+ ;
      (op <Ident>/<Nat> { (<Ident>{arity} = <Ident> ;)* })*
      (order { (<Ident> <= <Ident> ;)* })?
    }

``#`` starts a comment running to end of line.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import (
    DuplicateDefect,
    DuplicateTuple,
    MissingTuple,
    ParseError,
    SourceSpan,
    ValidationError,
)
from .phase import Phase, find_violations, validate, flat_index

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<nat>[0-9]+)|(?P<le><=)|(?P<punct>[{}:;=/])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | nat | punct | eof
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", span=SourceSpan(line, col, 1))
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("ident", "nat", "punct", "le"):
            tokens.append(Token("punct" if kind == "le" else kind, chunk, SourceSpan(line, col, len(chunk))))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, col, 0)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, what: str):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"expected {what}, found {found}", span=tok.span)

    def next(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.tok.kind == "eof" or self.tok.text != text or self.tok.kind == "nat":
            self.fail(repr(text))
        return self.next()

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(what)
        return self.next()

    def nat(self) -> Token:
        if self.tok.kind != "nat":
            self.fail("natural number")
        return self.next()

    def at(self, text: str) -> bool:
        return self.tok.kind in ("ident", "punct") and self.tok.text == text

    def parse(self):
        spans = {}
        self.expect("phase")
        name = self.ident("phase name").text
        self.expect("{")

        self.expect("elements")
        self.expect(":")
        if self.tok.kind != "ident":
            self.fail("at least one element")
        elements = []
        while self.tok.kind == "ident":
            tok = self.next()
            elements.append(tok.text)
            spans.setdefault(("element", tok.text), tok.span)
        self.expect(";")

        defect_kw = self.expect("defect")
        spans["defect"] = defect_kw.span
        self.expect(":")
        if self.tok.kind != "ident":
            self.fail("at least one defect assignment")
        defect = {}
        while self.tok.kind == "ident":
            tok = self.next()
            self.expect("=")
            value = int(self.nat().text)
            if tok.text in defect:
                raise DuplicateDefect(f"defect of {tok.text!r} given twice", span=tok.span)
            defect[tok.text] = value
            spans[("defect", tok.text)] = tok.span
        self.expect(";")

        signature, tables = [], {}
        while self.at("op"):
            self.next()
            op_tok = self.ident("operation name")
            self.expect("/")
            arity = int(self.nat().text)
            signature.append((op_tok.text, arity))
            spans[("op", op_tok.text)] = op_tok.span
            self.expect("{")
            rows = {}
            while not self.at("}"):
                start = self.tok
                args = []
                while self.tok.kind == "ident":
                    args.append(self.next().text)
                if not self.at("="):
                    self.fail("'=' or operation argument")
                if len(args) != arity:
                    raise ParseError(
                        f"row of {op_tok.text}/{arity} has {len(args)} argument(s)", span=start.span)
                self.next()
                out = self.ident("result element").text
                self.expect(";")
                key = tuple(args)
                if key in rows:
                    raise DuplicateTuple(f"{op_tok.text}: row {key} listed twice", span=start.span)
                rows[key] = out
                spans[("row", op_tok.text, key)] = start.span
            self.expect("}")
            tables.setdefault(op_tok.text, rows)

        order = None
        if self.at("order"):
            self.next()
            self.expect("{")
            order = []
            while not self.at("}"):
                a = self.ident("element").text
                self.expect("<=")
                b = self.ident("element").text
                self.expect(";")
                order.append((a, b))
            self.expect("}")
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail("end of input")

        raw = {
            "name": name,
            "elements": elements,
            "signature": signature,
            "tables": tables,
            "defect": defect,
            "order": order,
        }
        return raw, spans


def _span_for(violation, spans) -> Optional[SourceSpan]:
    if violation.op is not None and violation.where is not None:
        span = spans.get(("row", violation.op, tuple(violation.where)))
        if span is not None:
            return span
        return spans.get(("op", violation.op))
    if violation.where:
        head = violation.where[0]
        return (spans.get(("defect", head)) or spans.get(("element", head))
                or spans.get(("op", head)) or spans.get("defect"))
    return spans.get("defect")


def parse_phase(text: str) -> Phase:
    """Parse one ``.phase`` document and validate it.

    Errors carry a ``SourceSpan``; a missing table row raises ``MissingTuple``
    (a ``TotalityError``) located at the operation header.
    """
    raw, spans = _Parser(text).parse()
    violations = find_violations(raw)
    unknown = any(v.kind == "UnknownIdentifier" for v in violations)
    for v in violations:
        if not unknown and v.kind == "TotalityError" and v.op is not None:
            raise MissingTuple(v.message, span=_span_for(v, spans), violations=violations, detail=v.where)
    try:
        return validate(raw)
    except ValidationError as exc:
        exc.span = _span_for(exc.violations[0], spans)
        raise


def load_phase(path) -> Phase:
    return parse_phase(Path(path).read_text(encoding="utf-8"))


def render_phase(p: Phase) -> str:
    """Deterministic text; ``parse_phase(render_phase(p)) == p``."""
    el = p.elements
    lines = [
        f"phase {p.name} {{",
        "  elements: " + " ".join(el) + ";",
        "  defect: " + " ".join(f"{e}={d}" for e, d in zip(el, p.defect)) + ";",
    ]
    for op, table in zip(p.signature, p.tables):
        rows = []
        for args in p.tuples(op.arity):
            lhs = " ".join(el[a] for a in args)
            out = el[table[flat_index(args, p.n)]]
            rows.append(f"{lhs} = {out};" if lhs else f"= {out};")
        body = " ".join(rows)
        lines.append(f"  op {op.name}/{op.arity} {{ {body} }}" if body else f"  op {op.name}/{op.arity} {{ }}")
    if p.order is not None:
        body = " ".join(f"{el[a]} <= {el[b]};" for a, b in p.order)
        lines.append(f"  order {{ {body} }}" if body else "  order { }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps_report(obj) -> str:
    """Canonical JSON: sorted keys, compact separators, UTF-8, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
