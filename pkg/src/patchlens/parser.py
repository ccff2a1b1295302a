"""Recursive-descent parser for the analyzed Java-like subset.

The subset covers class declarations with fields and methods, the usual
statement forms (blocks, if/else, while, for, try/catch/finally, return,
throw, break, continue, local declarations, expression statements) and
expressions with Java operator precedence. Anything outside the subset is
rejected with a ParseError pointing at the first offending token; there is
no error recovery.

Representation choices that matter downstream:

* an ``else`` branch is always an explicit Else container whose single child
  is either a Block or an If (so ``else if`` chains nest as Else -> If);
* a call without an explicit receiver gets a synthesized ``this`` receiver,
  so MethodCall children are uniformly ``[receiver, arg...]``;
* generic type arguments are folded into the TypeRef label text
  (``ArrayList<Object>``), never parsed structurally;
* for-loop headers must have all three parts (init; condition; update),
  giving ForLoop the fixed child shape ``[init, condition, update, body]``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tree import AstNode, NodeKind, SourceSpan


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


MODIFIERS = frozenset({"public", "private", "protected", "static", "final", "abstract"})
PRIMITIVE_TYPES = frozenset({"void", "int", "long", "short", "byte", "char", "boolean", "float", "double"})
KEYWORDS = (
    frozenset(
        {
            "class",
            "if",
            "else",
            "while",
            "for",
            "try",
            "catch",
            "finally",
            "return",
            "throw",
            "break",
            "continue",
            "new",
            "null",
            "true",
            "false",
            "this",
        }
    )
    | MODIFIERS
    | PRIMITIVE_TYPES
)

_TWO_CHAR_OPS = ("<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "++", "--")
_ONE_CHAR_OPS = "+-*/%<>!=?:;,.(){}[]"

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/="})

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'", "0": "\0", "b": "\b", "f": "\f"}


@dataclass(frozen=True)
class Token:
    type: str  # name | keyword | int | float | string | char | op | eof
    text: str
    line: int
    col: int
    end_line: int
    end_col: int


def _lex(source: str, file: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def span_here(length: int = 1) -> SourceSpan:
        return SourceSpan(file, line, col, line, col + max(length - 1, 0))

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        if source.startswith("/*", i):
            i += 2
            col += 2
            while i < n and not source.startswith("*/", i):
                if source[i] == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
                i += 1
            if i >= n:
                raise ParseError("unterminated block comment", span_here())
            i += 2
            col += 2
            continue
        if ch.isalpha() or ch in "_$":
            start_col = col
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
                col += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "name"
            tokens.append(Token(kind, text, line, start_col, line, col - 1))
            i = j
            continue
        if ch.isdigit():
            start_col = col
            j = i
            while j < n and source[j].isdigit():
                j += 1
                col += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                col += 1
                while j < n and source[j].isdigit():
                    j += 1
                    col += 1
            if j < n and source[j] in "fFdD":
                is_float = True
                j += 1
                col += 1
            elif j < n and source[j] in "lL":
                j += 1
                col += 1
            tokens.append(Token("float" if is_float else "int", source[i:j], line, start_col, line, col - 1))
            i = j
            continue
        if ch == '"' or ch == "'":
            quote = ch
            start_col = col
            j = i + 1
            col += 1
            value = []
            while True:
                if j >= n or source[j] == "\n":
                    raise ParseError("unterminated literal", SourceSpan(file, line, start_col, line, col))
                c = source[j]
                if c == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        raise ParseError("unsupported escape sequence", SourceSpan(file, line, col, line, col + 1))
                    value.append(_ESCAPES[source[j + 1]])
                    j += 2
                    col += 2
                    continue
                if c == quote:
                    j += 1
                    col += 1
                    break
                value.append(c)
                j += 1
                col += 1
            text = "".join(value)
            if quote == "'" and len(text) != 1:
                raise ParseError("char literal must hold exactly one character", SourceSpan(file, line, start_col, line, col - 1))
            tokens.append(Token("string" if quote == '"' else "char", text, line, start_col, line, col - 1))
            i = j
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("op", two, line, col, line, col + 1))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("op", ch, line, col, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", span_here())
    tokens.append(Token("eof", "", line, col, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.pos = 0

    # -- token helpers -------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        return self.cur.type in ("op", "keyword") and self.cur.text == text

    def at_name(self) -> bool:
        return self.cur.type == "name"

    def advance(self) -> Token:
        tok = self.cur
        if tok.type != "eof":
            self.pos += 1
        return tok

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.cur.text!r}" if self.cur.type != "eof" else f"expected {text!r}, found end of input")
        return self.advance()

    def expect_name(self) -> Token:
        if not self.at_name():
            self.fail(f"expected identifier, found {self.cur.text!r}")
        return self.advance()

    def fail(self, message: str) -> None:
        tok = self.cur
        raise ParseError(message, SourceSpan(self.file, tok.line, tok.col, tok.end_line, tok.end_col))

    def span_between(self, start: Token, end: Token) -> SourceSpan:
        return SourceSpan(self.file, start.line, start.col, end.end_line, end.end_col)

    def span_of(self, tok: Token) -> SourceSpan:
        return SourceSpan(self.file, tok.line, tok.col, tok.end_line, tok.end_col)

    def span_covering(self, start: Token, *nodes: AstNode) -> SourceSpan:
        last = nodes[-1].span
        return SourceSpan(self.file, start.line, start.col, last.end_line, last.end_col)

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1]

    # -- declarations --------------------------------------------------

    def parse_compilation_unit(self) -> AstNode:
        start = self.cur
        classes = []
        while self.cur.type != "eof":
            classes.append(self.parse_class())
        end = self.prev if self.pos > 0 else start
        span = SourceSpan(self.file, 1, 1, max(end.end_line, 1), max(end.end_col, 1))
        return AstNode(NodeKind.COMPILATION_UNIT, "", classes, span)

    def parse_modifiers(self) -> list[AstNode]:
        mods = []
        while self.cur.type == "keyword" and self.cur.text in MODIFIERS:
            tok = self.advance()
            mods.append(AstNode(NodeKind.MODIFIER, tok.text, [], self.span_of(tok)))
        return mods

    def parse_class(self) -> AstNode:
        start = self.cur
        mods = self.parse_modifiers()
        self.expect("class")
        name = self.expect_name()
        self.expect("{")
        members = []
        while not self.at("}"):
            if self.cur.type == "eof":
                self.fail("unterminated class body")
            members.append(self.parse_member())
        end = self.expect("}")
        return AstNode(NodeKind.CLASS_DECL, name.text, mods + members, self.span_between(start, end))

    def parse_member(self) -> AstNode:
        start = self.cur
        mods = self.parse_modifiers()
        type_ref = self.parse_type()
        name = self.expect_name()
        if self.at("("):
            return self.parse_method_rest(start, mods, type_ref, name)
        children = mods + [type_ref]
        if self.accept("="):
            children.append(self.parse_expression())
        end = self.expect(";")
        return AstNode(NodeKind.FIELD_DECL, name.text, children, self.span_between(start, end))

    def parse_method_rest(self, start: Token, mods: list[AstNode], type_ref: AstNode, name: Token) -> AstNode:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                params.append(self.parse_parameter())
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_block()
        return AstNode(NodeKind.METHOD_DECL, name.text, mods + [type_ref] + params + [body], self.span_covering(start, body))

    def parse_parameter(self) -> AstNode:
        start = self.cur
        type_ref = self.parse_type()
        name = self.expect_name()
        return AstNode(NodeKind.PARAMETER, name.text, [type_ref], self.span_between(start, name))

    def parse_type(self) -> AstNode:
        start = self.cur
        if self.cur.type == "keyword" and self.cur.text in PRIMITIVE_TYPES:
            parts = [self.advance().text]
        elif self.at_name():
            parts = [self.advance().text]
            while self.at(".") and self.tokens[self.pos + 1].type == "name":
                self.advance()
                parts.append("." + self.advance().text)
        else:
            self.fail(f"expected type, found {self.cur.text!r}")
        text = "".join(parts)
        if self.at("<"):
            text += self._consume_generic_suffix()
        while self.at("[") and self.tokens[self.pos + 1].text == "]":
            self.advance()
            self.advance()
            text += "[]"
        return AstNode(NodeKind.TYPE_REF, text, [], self.span_between(start, self.prev))

    def _consume_generic_suffix(self) -> str:
        # Angle-bracket arguments are kept as label text, not structure.
        depth = 0
        parts = []
        while True:
            tok = self.cur
            if tok.type == "eof":
                self.fail("unterminated type arguments")
            if tok.type == "string":
                self.fail("string literal inside type arguments")
            self.advance()
            parts.append(tok.text)
            if tok.text == "<":
                depth += 1
            elif tok.text == ">":
                depth -= 1
                if depth == 0:
                    return "".join(parts)
            elif depth == 0:
                self.fail("malformed type arguments")

    # -- statements ----------------------------------------------------

    def parse_block(self) -> AstNode:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.cur.type == "eof":
                self.fail("unterminated block")
            stmts.append(self.parse_statement())
        end = self.expect("}")
        return AstNode(NodeKind.BLOCK, "", stmts, self.span_between(start, end))

    def parse_statement(self) -> AstNode:
        tok = self.cur
        if self.at("{"):
            return self.parse_block()
        if self.at("if"):
            return self.parse_if()
        if self.at("while"):
            return self.parse_while()
        if self.at("for"):
            return self.parse_for()
        if self.at("try"):
            return self.parse_try()
        if self.at("return"):
            self.advance()
            children = []
            if not self.at(";"):
                children.append(self.parse_expression())
            end = self.expect(";")
            return AstNode(NodeKind.RETURN, "", children, self.span_between(tok, end))
        if self.at("throw"):
            self.advance()
            expr = self.parse_expression()
            end = self.expect(";")
            return AstNode(NodeKind.THROW, "", [expr], self.span_between(tok, end))
        if self.at("break"):
            self.advance()
            end = self.expect(";")
            return AstNode(NodeKind.BREAK, "", [], self.span_between(tok, end))
        if self.at("continue"):
            self.advance()
            end = self.expect(";")
            return AstNode(NodeKind.CONTINUE, "", [], self.span_between(tok, end))
        if self._looks_like_var_decl():
            return self.parse_var_decl(require_semi=True)
        expr = self.parse_expression()
        end = self.expect(";")
        return AstNode(NodeKind.EXPRESSION_STMT, "", [expr], self.span_between(tok, end))

    def _looks_like_var_decl(self) -> bool:
        if self.cur.type == "keyword" and self.cur.text in PRIMITIVE_TYPES:
            return True
        if not self.at_name():
            return False
        saved = self.pos
        try:
            self.parse_type()
            ok = self.at_name() and self.tokens[self.pos + 1].text in ("=", ";")
        except ParseError:
            ok = False
        finally:
            self.pos = saved
        return ok

    def parse_var_decl(self, require_semi: bool) -> AstNode:
        start = self.cur
        type_ref = self.parse_type()
        name = self.expect_name()
        children = [type_ref]
        if self.accept("="):
            children.append(self.parse_expression())
        if require_semi:
            end = self.expect(";")
            return AstNode(NodeKind.VAR_DECL, name.text, children, self.span_between(start, end))
        return AstNode(NodeKind.VAR_DECL, name.text, children, self.span_between(start, self.prev))

    def parse_if(self) -> AstNode:
        start = self.expect("if")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        then = self.parse_statement()
        children = [cond, then]
        if self.at("else"):
            else_tok = self.advance()
            if self.at("if"):
                inner: AstNode = self.parse_if()
            else:
                inner = self.parse_statement()
            children.append(AstNode(NodeKind.ELSE, "", [inner], self.span_covering(else_tok, inner)))
        return AstNode(NodeKind.IF, "", children, self.span_covering(start, children[-1]))

    def parse_while(self) -> AstNode:
        start = self.expect("while")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return AstNode(NodeKind.WHILE_LOOP, "", [cond, body], self.span_covering(start, body))

    def parse_for(self) -> AstNode:
        # All three header parts are required in the subset, which keeps the
        # ForLoop child layout fixed: [init, condition, update, body].
        start = self.expect("for")
        self.expect("(")
        if self._looks_like_var_decl():
            init: AstNode = self.parse_var_decl(require_semi=False)
        else:
            init = self.parse_expression()
        self.expect(";")
        cond = self.parse_expression()
        self.expect(";")
        update = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return AstNode(NodeKind.FOR_LOOP, "", [init, cond, update, body], self.span_covering(start, body))

    def parse_try(self) -> AstNode:
        start = self.expect("try")
        body = self.parse_block()
        children = [body]
        saw_handler = False
        while self.at("catch"):
            saw_handler = True
            catch_tok = self.advance()
            self.expect("(")
            param = self.parse_parameter()
            self.expect(")")
            catch_body = self.parse_block()
            children.append(AstNode(NodeKind.CATCH_CLAUSE, "", [param, catch_body], self.span_covering(catch_tok, catch_body)))
        if self.at("finally"):
            saw_handler = True
            fin_tok = self.advance()
            fin_body = self.parse_block()
            children.append(AstNode(NodeKind.FINALLY_BLOCK, "", [fin_body], self.span_covering(fin_tok, fin_body)))
        if not saw_handler:
            self.fail("try requires at least one catch or finally")
        return AstNode(NodeKind.TRY_BLOCK, "", children, self.span_covering(start, children[-1]))

    # -- expressions ---------------------------------------------------

    def parse_expression(self) -> AstNode:
        return self.parse_assignment()

    def parse_assignment(self) -> AstNode:
        left = self.parse_ternary()
        if self.cur.type == "op" and self.cur.text in ASSIGN_OPS:
            op = self.advance()
            right = self.parse_assignment()
            span = SourceSpan(self.file, left.span.start_line, left.span.start_col, right.span.end_line, right.span.end_col)
            return AstNode(NodeKind.ASSIGNMENT, op.text, [left, right], span)
        return left

    def parse_ternary(self) -> AstNode:
        cond = self.parse_binary(0)
        if self.accept("?"):
            then_expr = self.parse_expression()
            self.expect(":")
            else_expr = self.parse_ternary()
            span = SourceSpan(self.file, cond.span.start_line, cond.span.start_col, else_expr.span.end_line, else_expr.span.end_col)
            return AstNode(NodeKind.TERNARY, "", [cond, then_expr, else_expr], span)
        return cond

    _BINARY_LEVELS = (("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%"))

    def parse_binary(self, level: int) -> AstNode:
        if level >= len(self._BINARY_LEVELS):
            return self.parse_unary()
        ops = self._BINARY_LEVELS[level]
        left = self.parse_binary(level + 1)
        while self.cur.type == "op" and self.cur.text in ops:
            op = self.advance()
            right = self.parse_binary(level + 1)
            span = SourceSpan(self.file, left.span.start_line, left.span.start_col, right.span.end_line, right.span.end_col)
            left = AstNode(NodeKind.BINARY_OP, op.text, [left, right], span)
        return left

    def parse_unary(self) -> AstNode:
        tok = self.cur
        if tok.type == "op" and tok.text in ("!", "-", "+", "++", "--"):
            self.advance()
            operand = self.parse_unary()
            return AstNode(NodeKind.UNARY_OP, tok.text, [operand], self.span_covering(tok, operand))
        return self.parse_postfix()

    def parse_postfix(self) -> AstNode:
        node = self.parse_primary()
        while True:
            if self.at("."):
                dot = self.advance()
                if self.at("class"):
                    name = self.advance()  # `.class` reads as a field access
                elif self.at_name():
                    name = self.advance()
                else:
                    self.fail(f"expected member name after '.', found {self.cur.text!r}")
                if self.at("("):
                    args = self.parse_arguments()
                    end = self.prev
                    span = SourceSpan(self.file, node.span.start_line, node.span.start_col, end.end_line, end.end_col)
                    node = AstNode(NodeKind.METHOD_CALL, name.text, [node] + args, span)
                else:
                    span = SourceSpan(self.file, node.span.start_line, node.span.start_col, name.end_line, name.end_col)
                    node = AstNode(NodeKind.FIELD_ACCESS, name.text, [node], span)
                del dot
                continue
            if self.at("["):
                self.advance()
                index = self.parse_expression()
                end = self.expect("]")
                span = SourceSpan(self.file, node.span.start_line, node.span.start_col, end.end_line, end.end_col)
                node = AstNode(NodeKind.ARRAY_ACCESS, "", [node, index], span)
                continue
            if self.cur.type == "op" and self.cur.text in ("++", "--"):
                op = self.advance()
                span = SourceSpan(self.file, node.span.start_line, node.span.start_col, op.end_line, op.end_col)
                node = AstNode(NodeKind.UNARY_OP, op.text, [node], span)
                continue
            return node

    def parse_arguments(self) -> list[AstNode]:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expression())
                if not self.accept(","):
                    break
        self.expect(")")
        return args

    def parse_primary(self) -> AstNode:
        tok = self.cur
        if self.accept("("):
            expr = self.parse_expression()
            self.expect(")")
            return expr
        if tok.type == "int":
            self.advance()
            return AstNode(NodeKind.LITERAL_INT, tok.text, [], self.span_of(tok))
        if tok.type == "float":
            self.advance()
            return AstNode(NodeKind.LITERAL_FLOAT, tok.text, [], self.span_of(tok))
        if tok.type == "string":
            self.advance()
            return AstNode(NodeKind.LITERAL_STRING, tok.text, [], self.span_of(tok))
        if tok.type == "char":
            self.advance()
            return AstNode(NodeKind.LITERAL_CHAR, tok.text, [], self.span_of(tok))
        if self.at("null"):
            self.advance()
            return AstNode(NodeKind.LITERAL_NULL, "null", [], self.span_of(tok))
        if self.at("true") or self.at("false"):
            self.advance()
            return AstNode(NodeKind.LITERAL_BOOL, tok.text, [], self.span_of(tok))
        if self.at("this"):
            self.advance()
            return AstNode(NodeKind.VARIABLE_READ, "this", [], self.span_of(tok))
        if self.at("new"):
            self.advance()
            type_ref = self.parse_type()
            simple_name = type_ref.label.split("<")[0].split(".")[-1].rstrip("[]")
            args = self.parse_arguments()
            end = self.prev
            span = SourceSpan(self.file, tok.line, tok.col, end.end_line, end.end_col)
            return AstNode(NodeKind.CONSTRUCTOR_CALL, simple_name, [type_ref] + args, span)
        if self.at_name():
            name = self.advance()
            if self.at("("):
                # Receiverless call: synthesize the implicit `this` receiver so
                # the child layout matches explicit-receiver calls.
                receiver = AstNode(NodeKind.VARIABLE_READ, "this", [], self.span_of(name))
                args = self.parse_arguments()
                end = self.prev
                span = SourceSpan(self.file, name.line, name.col, end.end_line, end.end_col)
                return AstNode(NodeKind.METHOD_CALL, name.text, [receiver] + args, span)
            return AstNode(NodeKind.VARIABLE_READ, name.text, [], self.span_of(name))
        self.fail(f"unexpected token {tok.text!r}" if tok.type != "eof" else "unexpected end of input")
        raise AssertionError("unreachable")


def parse(source: str, file: str = "<input>") -> AstNode:
    """Parse subset source text into a CompilationUnit tree with spans."""
    tokens = _lex(source, file)
    parser = _Parser(tokens, file)
    return parser.parse_compilation_unit()
