"""Recursive-descent parser for MiniC.

parse() returns a SourceUnit with statement ids assigned in source
(pre-)order starting at 1; the unit's next_stmt_id field is primed so
later edits can mint fresh ids without collisions.
"""

from __future__ import annotations

from dataclasses import dataclass

from leader.minic import ast
from leader.minic.lexer import LexError, Token, tokenize


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error"
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


def _err(message: str, tok: Token) -> ParseError:
    return ParseError([Diagnostic("error", message, tok.line, tok.col)])


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0
        self.next_id = 1

    # --- token plumbing ---

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def take(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            got = t.text if t.text else t.kind
            raise _err(f"expected {want!r}, found {got!r}", t)
        return self.take()

    def last_line(self) -> int:
        return self.toks[max(self.pos - 1, 0)].line

    def fresh_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    # --- unit ---

    def parse_unit(self, name: str) -> ast.SourceUnit:
        globals_: list[ast.VarDecl] = []
        functions: list[ast.Function] = []
        while not self.at("eof"):
            t = self.peek()
            if t.kind == "kw" and t.text in ("int", "void"):
                if t.text == "void" or self.peek(2).text == "(":
                    functions.append(self.parse_function())
                else:
                    globals_.append(self.parse_global())
            else:
                raise _err("expected declaration or function", t)
        unit = ast.SourceUnit(name, globals_, functions, next_stmt_id=self.next_id)
        return unit

    def parse_global(self) -> ast.VarDecl:
        start = self.expect("kw", "int")
        sid = self.fresh_id()
        name_tok = self.expect("ident")
        typ = ast.INT
        init = None
        if self.at("op", "["):
            self.take()
            length_tok = self.expect("num")
            self.expect("op", "]")
            typ = ast.Type("array", int(length_tok.text))
        elif self.at("op", "="):
            self.take()
            neg = False
            if self.at("op", "-"):
                self.take()
                neg = True
            v = int(self.expect("num").text)
            init = ast.IntLit(-v if neg else v)
        self.expect("op", ";")
        return ast.VarDecl(
            name_tok.text, typ, init, stmt_id=sid, span=(start.line, self.last_line())
        )

    def parse_function(self) -> ast.Function:
        ret_tok = self.take()
        ret = ast.INT if ret_tok.text == "int" else ast.VOID
        name_tok = self.expect("ident")
        self.expect("op", "(")
        params: list[tuple[str, ast.Type]] = []
        if not self.at("op", ")"):
            while True:
                self.expect("kw", "int")
                ptyp = ast.INT
                if self.at("op", "*"):
                    self.take()
                    ptyp = ast.PTR
                pname = self.expect("ident")
                params.append((pname.text, ptyp))
                if self.at("op", ","):
                    self.take()
                    continue
                break
        self.expect("op", ")")
        body = self.parse_block()
        return ast.Function(
            name_tok.text, ret, params, body, span=(ret_tok.line, self.last_line())
        )

    # --- statements ---

    def parse_block(self) -> ast.Block:
        start = self.expect("op", "{")
        sid = self.fresh_id()
        stmts: list[ast.Stmt] = []
        while not self.at("op", "}"):
            if self.at("eof"):
                raise _err("unterminated block", self.peek())
            stmts.append(self.parse_stmt())
        self.expect("op", "}")
        return ast.Block(stmts, stmt_id=sid, span=(start.line, self.last_line()))

    def parse_stmt(self) -> ast.Stmt:
        t = self.peek()
        if t.kind == "kw":
            handler = {
                "int": self.parse_vardecl,
                "if": self.parse_if,
                "while": self.parse_while,
                "for": self.parse_for,
                "switch": self.parse_switch,
                "goto": self.parse_goto,
                "return": self.parse_return,
                "break": self.parse_break,
                "continue": self.parse_continue,
            }.get(t.text)
            if handler is None:
                raise _err(f"unexpected keyword {t.text!r}", t)
            return handler()
        if t.kind == "op" and t.text == ";":
            sid = self.fresh_id()
            self.take()
            return ast.Null(stmt_id=sid, span=(t.line, t.line))
        if t.kind == "op" and t.text == "{":
            return self.parse_block()
        if t.kind == "ident" and self.peek(1).kind == "op" and self.peek(1).text == ":":
            sid = self.fresh_id()
            self.take()
            self.take()
            return ast.Label(t.text, stmt_id=sid, span=(t.line, t.line))
        return self.parse_assign_or_expr()

    def parse_vardecl(self) -> ast.VarDecl:
        start = self.expect("kw", "int")
        sid = self.fresh_id()
        typ = ast.INT
        if self.at("op", "*"):
            self.take()
            typ = ast.PTR
        name_tok = self.expect("ident")
        init = None
        if typ is not ast.PTR and self.at("op", "["):
            self.take()
            length_tok = self.expect("num")
            self.expect("op", "]")
            typ = ast.Type("array", int(length_tok.text))
        elif self.at("op", "="):
            self.take()
            init = self.parse_expr()
        self.expect("op", ";")
        return ast.VarDecl(
            name_tok.text, typ, init, stmt_id=sid, span=(start.line, self.last_line())
        )

    def parse_if(self) -> ast.If:
        start = self.expect("kw", "if")
        sid = self.fresh_id()
        self.expect("op", "(")
        cond = self.parse_expr()
        self.expect("op", ")")
        then = self.parse_block()
        els = None
        if self.at("kw", "else"):
            self.take()
            if self.at("kw", "if"):
                inner = self.parse_if()
                els = ast.Block(
                    [inner], stmt_id=self.fresh_id(), span=inner.span
                )
            else:
                els = self.parse_block()
        return ast.If(cond, then, els, stmt_id=sid, span=(start.line, self.last_line()))

    def parse_while(self) -> ast.While:
        start = self.expect("kw", "while")
        sid = self.fresh_id()
        self.expect("op", "(")
        cond = self.parse_expr()
        self.expect("op", ")")
        body = self.parse_block()
        return ast.While(cond, body, stmt_id=sid, span=(start.line, self.last_line()))

    def parse_assign_clause(self) -> ast.AssignClause:
        target = self.parse_unary()
        self.expect("op", "=")
        value = self.parse_expr()
        if not _is_lvalue(target):
            raise _err("assignment target is not assignable", self.peek())
        return ast.AssignClause(target, value)

    def parse_for(self) -> ast.For:
        start = self.expect("kw", "for")
        sid = self.fresh_id()
        self.expect("op", "(")
        init = self.parse_assign_clause()
        self.expect("op", ";")
        cond = self.parse_expr()
        self.expect("op", ";")
        step = self.parse_assign_clause()
        self.expect("op", ")")
        body = self.parse_block()
        return ast.For(
            init, cond, step, body, stmt_id=sid, span=(start.line, self.last_line())
        )

    def parse_switch(self) -> ast.Switch:
        start = self.expect("kw", "switch")
        sid = self.fresh_id()
        self.expect("op", "(")
        expr = self.parse_expr()
        self.expect("op", ")")
        brace = self.expect("op", "{")
        body_id = self.fresh_id()
        stmts: list[ast.Stmt] = []
        while not self.at("op", "}"):
            if self.at("eof"):
                raise _err("unterminated switch", self.peek())
            if self.at("kw", "case"):
                ctok = self.take()
                cid = self.fresh_id()
                neg = False
                if self.at("op", "-"):
                    self.take()
                    neg = True
                num = self.expect("num")
                self.expect("op", ":")
                val = -int(num.text) if neg else int(num.text)
                stmts.append(ast.Case(val, stmt_id=cid, span=(ctok.line, ctok.line)))
            elif self.at("kw", "default"):
                ctok = self.take()
                cid = self.fresh_id()
                self.expect("op", ":")
                stmts.append(ast.Case(None, stmt_id=cid, span=(ctok.line, ctok.line)))
            else:
                stmts.append(self.parse_stmt())
        self.expect("op", "}")
        body = ast.Block(stmts, stmt_id=body_id, span=(brace.line, self.last_line()))
        return ast.Switch(expr, body, stmt_id=sid, span=(start.line, self.last_line()))

    def parse_goto(self) -> ast.Goto:
        start = self.expect("kw", "goto")
        sid = self.fresh_id()
        name = self.expect("ident")
        self.expect("op", ";")
        return ast.Goto(name.text, stmt_id=sid, span=(start.line, self.last_line()))

    def parse_return(self) -> ast.Return:
        start = self.expect("kw", "return")
        sid = self.fresh_id()
        value = None
        if not self.at("op", ";"):
            value = self.parse_expr()
        self.expect("op", ";")
        return ast.Return(value, stmt_id=sid, span=(start.line, self.last_line()))

    def parse_break(self) -> ast.Break:
        start = self.expect("kw", "break")
        sid = self.fresh_id()
        self.expect("op", ";")
        return ast.Break(stmt_id=sid, span=(start.line, self.last_line()))

    def parse_continue(self) -> ast.Continue:
        start = self.expect("kw", "continue")
        sid = self.fresh_id()
        self.expect("op", ";")
        return ast.Continue(stmt_id=sid, span=(start.line, self.last_line()))

    def parse_assign_or_expr(self) -> ast.Stmt:
        start = self.peek()
        sid = self.fresh_id()
        first = self.parse_expr()
        if self.at("op", "="):
            if not _is_lvalue(first):
                raise _err("assignment target is not assignable", start)
            self.take()
            value = self.parse_expr()
            self.expect("op", ";")
            return ast.Assign(
                first, value, stmt_id=sid, span=(start.line, self.last_line())
            )
        self.expect("op", ";")
        return ast.ExprStmt(first, stmt_id=sid, span=(start.line, self.last_line()))

    # --- expressions ---

    def parse_expr(self) -> ast.Expr:
        return self.parse_or()

    def parse_or(self) -> ast.Expr:
        left = self.parse_and()
        while self.at("op", "||"):
            self.take()
            left = ast.Binary("||", left, self.parse_and())
        return left

    def parse_and(self) -> ast.Expr:
        left = self.parse_eq()
        while self.at("op", "&&"):
            self.take()
            left = ast.Binary("&&", left, self.parse_eq())
        return left

    def parse_eq(self) -> ast.Expr:
        left = self.parse_rel()
        while self.at("op", "==") or self.at("op", "!="):
            op = self.take().text
            left = ast.Binary(op, left, self.parse_rel())
        return left

    def parse_rel(self) -> ast.Expr:
        left = self.parse_add()
        while self.peek().kind == "op" and self.peek().text in ("<", "<=", ">", ">="):
            op = self.take().text
            left = ast.Binary(op, left, self.parse_add())
        return left

    def parse_add(self) -> ast.Expr:
        left = self.parse_mul()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.take().text
            left = ast.Binary(op, left, self.parse_mul())
        return left

    def parse_mul(self) -> ast.Expr:
        left = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/", "%"):
            op = self.take().text
            left = ast.Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> ast.Expr:
        t = self.peek()
        if t.kind == "op" and t.text in ("-", "!", "*", "&"):
            self.take()
            operand = self.parse_unary()
            if t.text == "-" and isinstance(operand, ast.IntLit):
                return ast.IntLit(-operand.value)  # keep -3 a literal
            return ast.Unary(t.text, operand)
        return self.parse_primary()

    def parse_primary(self) -> ast.Expr:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return ast.IntLit(int(t.text))
        if t.kind == "op" and t.text == "(":
            self.take()
            inner = self.parse_expr()
            self.expect("op", ")")
            return inner
        if t.kind == "ident":
            self.take()
            if self.at("op", "("):
                self.take()
                args: list[ast.Expr] = []
                if not self.at("op", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at("op", ","):
                            self.take()
                            continue
                        break
                self.expect("op", ")")
                return ast.Call(t.text, args)
            if self.at("op", "["):
                self.take()
                idx = self.parse_expr()
                self.expect("op", "]")
                return ast.Index(t.text, idx)
            return ast.Var(t.text)
        raise _err(f"expected expression, found {t.text or t.kind!r}", t)


def _is_lvalue(e: ast.Expr) -> bool:
    if isinstance(e, (ast.Var, ast.Index)):
        return True
    return isinstance(e, ast.Unary) and e.op == "*"


def parse(text: str, name: str = "unit") -> ast.SourceUnit:
    """Parse MiniC source text into a SourceUnit.

    Raises ParseError carrying Diagnostics on malformed input.
    """
    try:
        toks = tokenize(text)
    except LexError as e:
        raise ParseError([Diagnostic("error", e.message, e.line, e.col)]) from e
    return _Parser(toks).parse_unit(name)


def parse_function_text(text: str) -> ast.Function:
    """Parse a single function definition (used for model replies)."""
    unit = parse(text, name="reply")
    if unit.globals or len(unit.functions) != 1:
        raise ParseError(
            [Diagnostic("error", "expected exactly one function definition", 1, 1)]
        )
    return unit.functions[0]
