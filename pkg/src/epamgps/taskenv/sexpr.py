"""S-expression reader that keeps a source span on every node."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Union


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


class TaskSyntaxError(Exception):
    """A diagnostic with a position; ``str()`` gives ``line:col: message``."""

    def __init__(self, message: str, span: SourceSpan, filename: str = "<input>"):
        self.message = message
        self.span = span
        self.filename = filename
        super().__init__(f"{span.line}:{span.column}: {message}")

    def format(self) -> str:
        return f"{self.filename}:{self.span.line}:{self.span.column}: {self.message}"


@dataclass
class Atom:
    value: Union[str, int]
    span: SourceSpan

    @property
    def is_var(self) -> bool:
        return isinstance(self.value, str) and self.value.startswith("?")


@dataclass
class SList:
    items: List["SExpr"]
    span: SourceSpan
    end: SourceSpan = field(default=None)


SExpr = Union[Atom, SList]

_SYMBOL_CHARS = r"A-Za-z0-9_+\-*/<>=!.:"
_TOKEN = re.compile(rf"\?[{_SYMBOL_CHARS}]*|[{_SYMBOL_CHARS}]+")
_INT = re.compile(r"-?[0-9]+\Z")


def read(text: str) -> List[SExpr]:
    """Read all top-level forms. Raises TaskSyntaxError on lexical problems."""
    forms: List[SExpr] = []
    stack: List[SList] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r\f﻿":
            i, col = i + 1, col + 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = SourceSpan(line, col)
        if c == "(":
            stack.append(SList([], span))
            i, col = i + 1, col + 1
            continue
        if c == ")":
            if not stack:
                raise TaskSyntaxError("unexpected ')'", span)
            lst = stack.pop()
            lst.end = span
            (stack[-1].items if stack else forms).append(lst)
            i, col = i + 1, col + 1
            continue
        m = _TOKEN.match(text, i)
        if m is None:
            raise TaskSyntaxError(f"unexpected character {c!r}", span)
        tok = m.group()
        span = SourceSpan(line, col, len(tok))
        if tok == "?":
            raise TaskSyntaxError("variable needs a name after '?'", span)
        if tok[0].isdigit() or (tok[0] == "-" and len(tok) > 1 and tok[1].isdigit()):
            if not _INT.match(tok):
                raise TaskSyntaxError(f"malformed number {tok!r}", span)
            value: Union[str, int] = int(tok)
        else:
            value = tok
        (stack[-1].items if stack else forms).append(Atom(value, span))
        i, col = m.end(), col + len(tok)
    if stack:
        raise TaskSyntaxError("unclosed '('", stack[-1].span)
    return forms
