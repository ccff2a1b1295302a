"""Canonical source renderer for subset trees.

Mainly a test aid: ``parse(pretty_print(parse(s)))`` must be isomorphic to
``parse(s)``. Output is one canonical formatting, so span fidelity is not a
goal here.
"""

from __future__ import annotations

from .tree import AstNode, NodeKind

_ESCAPE_MAP = {"\\": "\\\\", '"': '\\"', "'": "\\'", "\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0", "\b": "\\b", "\f": "\\f"}

_ATOMIC = {
    NodeKind.VARIABLE_READ,
    NodeKind.LITERAL_NULL,
    NodeKind.LITERAL_INT,
    NodeKind.LITERAL_FLOAT,
    NodeKind.LITERAL_STRING,
    NodeKind.LITERAL_BOOL,
    NodeKind.LITERAL_CHAR,
    NodeKind.METHOD_CALL,
    NodeKind.FIELD_ACCESS,
    NodeKind.ARRAY_ACCESS,
    NodeKind.CONSTRUCTOR_CALL,
}


def _escape(text: str) -> str:
    return "".join(_ESCAPE_MAP.get(ch, ch) for ch in text)


def _operand(node: AstNode) -> str:
    text = _expr(node)
    if node.kind in _ATOMIC:
        return text
    return f"({text})"


def _expr(node: AstNode) -> str:
    k = node.kind
    if k is NodeKind.VARIABLE_READ:
        return node.label
    if k is NodeKind.LITERAL_NULL or k is NodeKind.LITERAL_BOOL or k is NodeKind.LITERAL_INT or k is NodeKind.LITERAL_FLOAT:
        return node.label
    if k is NodeKind.LITERAL_STRING:
        return f'"{_escape(node.label)}"'
    if k is NodeKind.LITERAL_CHAR:
        return f"'{_escape(node.label)}'"
    if k is NodeKind.BINARY_OP:
        return f"{_operand(node.children[0])} {node.label} {_operand(node.children[1])}"
    if k is NodeKind.UNARY_OP:
        if node.label in ("++", "--"):
            return f"{_operand(node.children[0])}{node.label}"
        return f"{node.label}{_operand(node.children[0])}"
    if k is NodeKind.ASSIGNMENT:
        return f"{_operand(node.children[0])} {node.label} {_expr(node.children[1])}"
    if k is NodeKind.TERNARY:
        cond, then_e, else_e = node.children
        return f"{_operand(cond)} ? {_operand(then_e)} : {_operand(else_e)}"
    if k is NodeKind.METHOD_CALL:
        receiver = _operand(node.children[0])
        args = ", ".join(_expr(a) for a in node.children[1:])
        return f"{receiver}.{node.label}({args})"
    if k is NodeKind.FIELD_ACCESS:
        return f"{_operand(node.children[0])}.{node.label}"
    if k is NodeKind.ARRAY_ACCESS:
        return f"{_operand(node.children[0])}[{_expr(node.children[1])}]"
    if k is NodeKind.CONSTRUCTOR_CALL:
        args = ", ".join(_expr(a) for a in node.children[1:])
        return f"new {node.children[0].label}({args})"
    raise ValueError(f"not an expression node: {node.kind}")


def _indent(level: int) -> str:
    return "    " * level


def _stmt(node: AstNode, level: int, lines: list[str]) -> None:
    pad = _indent(level)
    k = node.kind
    if k is NodeKind.BLOCK:
        lines.append(pad + "{")
        for child in node.children:
            _stmt(child, level + 1, lines)
        lines.append(pad + "}")
        return
    if k is NodeKind.IF:
        _if_chain(node, level, lines, prefix="")
        return
    if k is NodeKind.WHILE_LOOP:
        cond, body = node.children
        lines.append(f"{pad}while ({_expr(cond)})")
        _stmt(body, level if body.kind is NodeKind.BLOCK else level + 1, lines)
        return
    if k is NodeKind.FOR_LOOP:
        init, cond, update, body = node.children
        init_text = _var_decl_text(init) if init.kind is NodeKind.VAR_DECL else _expr(init)
        lines.append(f"{pad}for ({init_text}; {_expr(cond)}; {_expr(update)})")
        _stmt(body, level if body.kind is NodeKind.BLOCK else level + 1, lines)
        return
    if k is NodeKind.TRY_BLOCK:
        lines.append(pad + "try")
        _stmt(node.children[0], level, lines)
        for clause in node.children[1:]:
            if clause.kind is NodeKind.CATCH_CLAUSE:
                param, body = clause.children
                lines.append(f"{pad}catch ({param.children[0].label} {param.label})")
                _stmt(body, level, lines)
            else:
                lines.append(pad + "finally")
                _stmt(clause.children[0], level, lines)
        return
    if k is NodeKind.RETURN:
        lines.append(pad + ("return;" if not node.children else f"return {_expr(node.children[0])};"))
        return
    if k is NodeKind.THROW:
        lines.append(f"{pad}throw {_expr(node.children[0])};")
        return
    if k is NodeKind.BREAK:
        lines.append(pad + "break;")
        return
    if k is NodeKind.CONTINUE:
        lines.append(pad + "continue;")
        return
    if k is NodeKind.VAR_DECL:
        lines.append(pad + _var_decl_text(node) + ";")
        return
    if k is NodeKind.EXPRESSION_STMT:
        lines.append(pad + _expr(node.children[0]) + ";")
        return
    raise ValueError(f"not a statement node: {node.kind}")


def _if_chain(node: AstNode, level: int, lines: list[str], prefix: str) -> None:
    pad = _indent(level)
    cond = node.children[0]
    then = node.children[1]
    lines.append(f"{pad}{prefix}if ({_expr(cond)})")
    _stmt(then, level if then.kind is NodeKind.BLOCK else level + 1, lines)
    if len(node.children) == 3:
        inner = node.children[2].children[0]
        if inner.kind is NodeKind.IF:
            _if_chain(inner, level, lines, prefix="else ")
        else:
            lines.append(pad + "else")
            _stmt(inner, level if inner.kind is NodeKind.BLOCK else level + 1, lines)


def _var_decl_text(node: AstNode) -> str:
    type_ref = node.children[0]
    if len(node.children) > 1:
        return f"{type_ref.label} {node.label} = {_expr(node.children[1])}"
    return f"{type_ref.label} {node.label}"


def pretty_print(root: AstNode) -> str:
    if root.kind is not NodeKind.COMPILATION_UNIT:
        raise ValueError("pretty_print expects a CompilationUnit root")
    lines: list[str] = []
    for cls in root.children:
        mods = [c for c in cls.children if c.kind is NodeKind.MODIFIER]
        members = [c for c in cls.children if c.kind is not NodeKind.MODIFIER]
        head = " ".join([m.label for m in mods] + ["class", cls.label])
        lines.append(head + " {")
        for member in members:
            if member.kind is NodeKind.FIELD_DECL:
                fmods = [c.label for c in member.children if c.kind is NodeKind.MODIFIER]
                rest = [c for c in member.children if c.kind is not NodeKind.MODIFIER]
                text = " ".join(fmods + [rest[0].label, member.label])
                if len(rest) > 1:
                    text += f" = {_expr(rest[1])}"
                lines.append(_indent(1) + text + ";")
            elif member.kind is NodeKind.METHOD_DECL:
                mmods = [c.label for c in member.children if c.kind is NodeKind.MODIFIER]
                rest = [c for c in member.children if c.kind is not NodeKind.MODIFIER]
                ret = rest[0].label
                params = [c for c in rest[1:] if c.kind is NodeKind.PARAMETER]
                body = rest[-1]
                params_text = ", ".join(f"{p.children[0].label} {p.label}" for p in params)
                lines.append(_indent(1) + " ".join(mmods + [ret, f"{member.label}({params_text})"]))
                _stmt(body, 1, lines)
            else:
                raise ValueError(f"unexpected class member: {member.kind}")
        lines.append("}")
    return "\n".join(lines) + "\n"
