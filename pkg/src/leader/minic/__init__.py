"""MiniC front end: AST, lexer, parser, printer, type checker, IR."""

from leader.minic.ast import (  # noqa: F401
    Function,
    SourceUnit,
    Stmt,
    structural_hash,
)
from leader.minic.parser import ParseError, parse  # noqa: F401
from leader.minic.printer import print_function, print_unit  # noqa: F401
from leader.minic.typecheck import TypeCheckError, check_unit, typecheck  # noqa: F401
from leader.minic.ir import IrModule, lower  # noqa: F401
from leader.minic.edit import delete_statements, replace_function  # noqa: F401
