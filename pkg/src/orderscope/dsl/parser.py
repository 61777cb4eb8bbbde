"""Lexer, parser, and printer for measure expressions.

Grammar (lowest to highest binding):

    expr    := let | sum
    let     := "let" IDENT "=" expr "in" expr
    sum     := prod (("+" | "-") prod)*
    prod    := unary (("*" | "/") unary)*
    unary   := "-" unary | pow
    pow     := atom ("^" unary)?
    atom    := NUMBER | IDENT | IDENT "(" args? ")" | IDENT "[" expr "]"
             | "(" expr ")"
    args    := expr ("," expr)*

"+", "-", "*", "/" associate left; "^" associates right and binds
tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  ``to_source``
emits a canonical form that parses back to the same tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import MeasureSyntaxError

_KEYWORDS = ("let", "in")

# token types
_NUMBER = "number"
_IDENT = "ident"
_KEYWORD = "keyword"
_OP = "op"
_EOF = "end of input"

_OP_CHARS = "+-*/^()[],="


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.type == _EOF:
            return _EOF
        return f"'{self.text}'"


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(Token(_NUMBER, text, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = _KEYWORD if text in _KEYWORDS else _IDENT
            tokens.append(Token(kind, text, line, start_col))
            col += j - i
            i = j
            continue
        if ch in _OP_CHARS:
            tokens.append(Token(_OP, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise MeasureSyntaxError(f"unexpected character '{ch}'", line=line, col=col)
    tokens.append(Token(_EOF, "", line, col))
    return tokens


@dataclass(frozen=True)
class Expr:
    """Base class for expression nodes.

    ``line`` and ``col`` are 1-based source positions, excluded from
    equality so that structurally identical trees compare equal.
    """

    line: int = field(compare=False)
    col: int = field(compare=False)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Index(Expr):
    name: str
    index: Expr


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Let(Expr):
    name: str
    bound: Expr
    body: Expr


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str) -> MeasureSyntaxError:
        tok = self.peek()
        return MeasureSyntaxError(
            f"expected {expected}, found {tok.describe()}",
            line=tok.line,
            col=tok.col,
        )

    def expect_op(self, text: str) -> Token:
        tok = self.peek()
        if tok.type == _OP and tok.text == text:
            return self.advance()
        raise self.fail(f"'{text}'")

    def at_op(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.type == _OP and tok.text in texts

    def parse_expr(self) -> Expr:
        tok = self.peek()
        if tok.type == _KEYWORD and tok.text == "let":
            return self.parse_let()
        return self.parse_sum()

    def parse_let(self) -> Expr:
        let_tok = self.advance()
        name_tok = self.peek()
        if name_tok.type != _IDENT:
            raise self.fail("a name to bind")
        self.advance()
        self.expect_op("=")
        bound = self.parse_expr()
        in_tok = self.peek()
        if not (in_tok.type == _KEYWORD and in_tok.text == "in"):
            raise self.fail("'in'")
        self.advance()
        body = self.parse_expr()
        return Let(let_tok.line, let_tok.col, name_tok.text, bound, body)

    def parse_sum(self) -> Expr:
        node = self.parse_prod()
        while self.at_op("+", "-"):
            op_tok = self.advance()
            right = self.parse_prod()
            node = BinOp(op_tok.line, op_tok.col, op_tok.text, node, right)
        return node

    def parse_prod(self) -> Expr:
        node = self.parse_unary()
        while self.at_op("*", "/"):
            op_tok = self.advance()
            right = self.parse_unary()
            node = BinOp(op_tok.line, op_tok.col, op_tok.text, node, right)
        return node

    def parse_unary(self) -> Expr:
        if self.at_op("-"):
            op_tok = self.advance()
            operand = self.parse_unary()
            return Neg(op_tok.line, op_tok.col, operand)
        return self.parse_pow()

    def parse_pow(self) -> Expr:
        base = self.parse_atom()
        if self.at_op("^"):
            op_tok = self.advance()
            exponent = self.parse_unary()
            return BinOp(op_tok.line, op_tok.col, "^", base, exponent)
        return base

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.type == _NUMBER:
            self.advance()
            return Num(tok.line, tok.col, float(tok.text))
        if tok.type == _IDENT:
            self.advance()
            if self.at_op("("):
                self.advance()
                args: list[Expr] = []
                if not self.at_op(")"):
                    args.append(self.parse_expr())
                    while self.at_op(","):
                        self.advance()
                        args.append(self.parse_expr())
                self.expect_op(")")
                return Call(tok.line, tok.col, tok.text, tuple(args))
            if self.at_op("["):
                self.advance()
                index = self.parse_expr()
                self.expect_op("]")
                return Index(tok.line, tok.col, tok.text, index)
            return Var(tok.line, tok.col, tok.text)
        if self.at_op("("):
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        raise self.fail("a number, a name, or '('")


def parse(source: str) -> Expr:
    """Parse *source* into an expression tree.

    Raises :class:`MeasureSyntaxError` with a 1-based position and a
    hint naming what was expected.
    """
    parser = _Parser(_tokenize(source))
    node = parser.parse_expr()
    tok = parser.peek()
    if tok.type != _EOF:
        raise parser.fail("end of input")
    return node


# Precedences used by the printer.  A child is parenthesized when its
# own level is below the level its slot requires, mirroring the grammar
# (e.g. the base of '^' must be an atom, operands of '*' at least unary).
_LEVEL_LET = 0
_LEVEL_SUM = 1
_LEVEL_PROD = 2
_LEVEL_UNARY = 3
_LEVEL_POW = 4
_LEVEL_ATOM = 5

_BINOP_LEVEL = {"+": _LEVEL_SUM, "-": _LEVEL_SUM, "*": _LEVEL_PROD, "/": _LEVEL_PROD}


def _level(node: Expr) -> int:
    if isinstance(node, Let):
        return _LEVEL_LET
    if isinstance(node, BinOp):
        return _LEVEL_POW if node.op == "^" else _BINOP_LEVEL[node.op]
    if isinstance(node, Neg):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def _fmt(node: Expr, required: int) -> str:
    text = _fmt_inner(node)
    if _level(node) < required:
        return f"({text})"
    return text


def _fmt_inner(node: Expr) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        args = ", ".join(_fmt(a, _LEVEL_LET) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, Index):
        return f"{node.name}[{_fmt(node.index, _LEVEL_LET)}]"
    if isinstance(node, Neg):
        return f"-{_fmt(node.operand, _LEVEL_UNARY)}"
    if isinstance(node, BinOp):
        if node.op == "^":
            base = _fmt(node.left, _LEVEL_ATOM)
            exponent = _fmt(node.right, _LEVEL_UNARY)
            return f"{base} ^ {exponent}"
        level = _BINOP_LEVEL[node.op]
        left = _fmt(node.left, level)
        right = _fmt(node.right, level + 1)
        return f"{left} {node.op} {right}"
    if isinstance(node, Let):
        bound = _fmt(node.bound, _LEVEL_LET)
        body = _fmt(node.body, _LEVEL_LET)
        return f"let {node.name} = {bound} in {body}"
    raise TypeError(f"unknown node {node!r}")


def to_source(node: Expr) -> str:
    """Render a tree back to source text.

    The output is canonical: parsing it yields a tree equal to *node*
    (positions aside), so parse -> print -> parse is stable.
    """
    return _fmt(node, _LEVEL_LET)
