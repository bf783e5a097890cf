"""Toy circuit DSL: tokenizer, parser, AST and content addressing.

The language is a small subset of ZoKrates::

    program := "def" "main" "(" param ("," param)* ")" "->" "bool"
               "{" stmt* "return" "true" ";" "}"
    param   := ("private" | "public") ("field" | "u32") ident
    stmt    := "assert" "(" expr ("==" | "!=") expr ")" ";"
             | "field" ident ("=" | "<==") expr ";"
    expr    := term (("+" | "-") term)*
    term    := atom ("*" atom)*
    atom    := ident | integer | "(" expr ")"

``//`` starts a comment that runs to the end of the line.  ``u32`` is accepted
and treated as ``field`` (no range checks).  ``field x <== e;`` is a
constrained definition: the compiler gives ``x`` its own witness variable and
one linear constraint tying it to ``e``.  Locals whose name starts with
``out_`` are the circuit's declared outputs.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Union

from pouw.errors import CircuitSyntaxError, DuplicateDeclaration, UndeclaredIdentifier

KEYWORDS = frozenset({
    "def", "main", "private", "public", "field", "u32", "bool",
    "assert", "return", "true",
})
OUTPUT_PREFIX = "out_"

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<sym><==|==|!=|->|[(){},;+\-*=])"
)


# -- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*"
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, BinOp]


@dataclass(frozen=True)
class Param:
    visibility: str  # "public" | "private"
    name: str
    type: str = "field"


@dataclass(frozen=True)
class Define:
    name: str
    expr: Expr
    constrained: bool = False
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assert:
    left: Expr
    op: str  # "==" | "!="
    right: Expr
    line: int = field(default=0, compare=False)


Statement = Union[Define, Assert]


@dataclass(frozen=True)
class Circuit:
    name: str
    params: tuple[Param, ...]
    statements: tuple[Statement, ...]

    def __post_init__(self) -> None:
        _check_scopes(self)

    @property
    def public_params(self) -> tuple[Param, ...]:
        return tuple(p for p in self.params if p.visibility == "public")

    @property
    def private_params(self) -> tuple[Param, ...]:
        return tuple(p for p in self.params if p.visibility == "private")

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(
            s.name for s in self.statements
            if isinstance(s, Define) and s.name.startswith(OUTPUT_PREFIX)
        )

    @property
    def assert_count(self) -> int:
        return sum(1 for s in self.statements if isinstance(s, Assert))

    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def to_source(self) -> str:
        """Render the circuit back to DSL text that parses to an equal AST."""
        params = ",\n".join(f"    {p.visibility} {p.type} {p.name}" for p in self.params)
        lines = [f"def {self.name}(\n{params}\n) -> bool {{"]
        for stmt in self.statements:
            if isinstance(stmt, Define):
                arrow = "<==" if stmt.constrained else "="
                lines.append(f"    field {stmt.name} {arrow} {render_expr(stmt.expr)};")
            else:
                lines.append(
                    f"    assert({render_expr(stmt.left)} {stmt.op} {render_expr(stmt.right)});"
                )
        lines.append("    return true;")
        lines.append("}")
        return "\n".join(lines) + "\n"


_PRECEDENCE = {"+": 1, "-": 1, "*": 2}


def render_expr(expr: Expr) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    prec = _PRECEDENCE[expr.op]
    left = render_expr(expr.left)
    right = render_expr(expr.right)
    if isinstance(expr.left, BinOp) and _PRECEDENCE[expr.left.op] < prec:
        left = f"({left})"
    # Parsing is left-associative, so a same-precedence right child came from parentheses.
    if isinstance(expr.right, BinOp) and _PRECEDENCE[expr.right.op] <= prec:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def expr_names(expr: Expr) -> list[Var]:
    if isinstance(expr, Var):
        return [expr]
    if isinstance(expr, BinOp):
        return expr_names(expr.left) + expr_names(expr.right)
    return []


def _check_scopes(circuit: Circuit) -> None:
    declared: set[str] = set()
    for p in circuit.params:
        if p.name in declared:
            raise DuplicateDeclaration(p.name)
        declared.add(p.name)
    for stmt in circuit.statements:
        exprs = (stmt.expr,) if isinstance(stmt, Define) else (stmt.left, stmt.right)
        for expr in exprs:
            for var in expr_names(expr):
                if var.name not in declared:
                    raise UndeclaredIdentifier(var.name, var.line or stmt.line)
        if isinstance(stmt, Define):
            if stmt.name in declared:
                raise DuplicateDeclaration(stmt.name, stmt.line)
            declared.add(stmt.name)


# -- tokenizer / parser ---------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "sym" | "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise CircuitSyntaxError(line, pos - line_start + 1, "a token", source[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "int", "sym"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str) -> None:
        self._tokens = tokenize(source)
        self._i = 0

    @property
    def _tok(self) -> Token:
        return self._tokens[self._i]

    def _fail(self, expected: str) -> CircuitSyntaxError:
        tok = self._tok
        return CircuitSyntaxError(tok.line, tok.col, expected, tok.text or "end of input")

    def _expect(self, text: str) -> Token:
        tok = self._tok
        if tok.text != text or tok.kind == "int":
            raise self._fail(repr(text))
        self._i += 1
        return tok

    def _accept(self, text: str) -> bool:
        if self._tok.text == text and self._tok.kind == "sym":
            self._i += 1
            return True
        return False

    def _ident(self) -> Token:
        tok = self._tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self._fail("identifier")
        self._i += 1
        return tok

    def program(self) -> tuple[str, list[Param], list[Statement]]:
        self._expect("def")
        name = self._expect("main").text
        self._expect("(")
        params = [self._param()]
        while self._accept(","):
            params.append(self._param())
        self._expect(")")
        self._expect("->")
        self._expect("bool")
        self._expect("{")
        statements: list[Statement] = []
        while self._tok.text != "return":
            statements.append(self._statement())
        self._expect("return")
        self._expect("true")
        self._expect(";")
        self._expect("}")
        if self._tok.kind != "eof":
            raise self._fail("end of input")
        return name, params, statements

    def _param(self) -> Param:
        tok = self._tok
        if tok.text not in ("private", "public"):
            raise self._fail("'private' or 'public'")
        self._i += 1
        ty = self._tok
        if ty.text not in ("field", "u32"):
            raise self._fail("'field' or 'u32'")
        self._i += 1
        return Param(tok.text, self._ident().text, ty.text)

    def _statement(self) -> Statement:
        tok = self._tok
        if tok.text == "assert":
            self._i += 1
            self._expect("(")
            left = self._expr()
            op = self._tok.text
            if op not in ("==", "!="):
                raise self._fail("'==' or '!='")
            self._i += 1
            right = self._expr()
            self._expect(")")
            self._expect(";")
            return Assert(left, op, right, tok.line)
        if tok.text == "field":
            self._i += 1
            name = self._ident().text
            if self._accept("<=="):
                constrained = True
            elif self._accept("="):
                constrained = False
            else:
                raise self._fail("'=' or '<=='")
            expr = self._expr()
            self._expect(";")
            return Define(name, expr, constrained, tok.line)
        raise self._fail("'assert', 'field' or 'return'")

    def _expr(self) -> Expr:
        node = self._term()
        while self._tok.kind == "sym" and self._tok.text in ("+", "-"):
            op = self._tok.text
            self._i += 1
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._atom()
        while self._accept("*"):
            node = BinOp("*", node, self._atom())
        return node

    def _atom(self) -> Expr:
        tok = self._tok
        if tok.kind == "int":
            self._i += 1
            return Const(int(tok.text))
        if self._accept("("):
            node = self._expr()
            self._expect(")")
            return node
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self._i += 1
            return Var(tok.text, tok.line)
        raise self._fail("identifier, integer or '('")


def parse_circuit(source: str) -> Circuit:
    """Parse DSL text into a scope-checked `Circuit`."""
    name, params, statements = _Parser(source).program()
    return Circuit(name, tuple(params), tuple(statements))


# -- content addressing ---------------------------------------------------------

@dataclass(frozen=True)
class CircuitId:
    digest: bytes

    def __post_init__(self) -> None:
        if len(self.digest) != 32:
            raise ValueError("circuit id must be a 32-byte digest")

    @property
    def hex(self) -> str:
        return self.digest.hex()

    @classmethod
    def from_hex(cls, text: str) -> "CircuitId":
        return cls(bytes.fromhex(text))

    def __str__(self) -> str:
        return self.hex


_COMMENT_RE = re.compile(r"//[^\n]*")
_WS_RE = re.compile(r"\s+")


def canonical_source(source: str) -> str:
    """Strip comments, collapse whitespace runs to one space, trim."""
    return _WS_RE.sub(" ", _COMMENT_RE.sub("", source)).strip()


def circuit_id(source: str) -> CircuitId:
    return CircuitId(hashlib.sha256(canonical_source(source).encode("utf-8")).digest())


# -- generated circuits -------------------------------------------------------

def synthetic_chain_circuit(n_constraints: int, n_private: int = 2) -> Circuit:
    """A multiplication chain with exactly *n_constraints* constraints.

    ``n_constraints - 1`` product locals followed by one tautological assert,
    so any private input assignment satisfies it.
    """
    if n_constraints < 1 or n_private < 1:
        raise ValueError("need at least one constraint and one private input")
    params = tuple(Param("private", f"s{i}") for i in range(n_private))
    statements: list[Statement] = []
    prev: Expr = Var("s0")
    for k in range(1, n_constraints):
        factor = BinOp("+", Var(f"s{k % n_private}"), Const(k))
        statements.append(Define(f"x{k}", BinOp("*", prev, factor)))
        prev = Var(f"x{k}")
    statements.append(Assert(prev, "==", prev))
    return Circuit("main", params, tuple(statements))
