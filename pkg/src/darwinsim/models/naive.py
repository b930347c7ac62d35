"""Naive three-address lowering of model update equations.

The yardstick for code density: each model's per-step update is written as
a few lines of Python-syntax assignments and conditionals, then lowered the
way a simple load/store compiler without register allocation would do it.
Every variable read is a ``LD``, every literal an ``LI``, every arithmetic
operator one instruction, every assignment a ``ST``, and every condition a
compare plus branch.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

UPDATE_EQUATIONS: dict[str, str] = {
    "lif": """
v = p0*v + p1*I + c0
if v > v_th:
    spike()
    v = v0
""",
    "qif": """
v = (p3*v + c1)*v + p1*I + c0
if v > v_th:
    spike()
    v = v0
""",
    "expif": """
v = p0*v + p1*I + c0 + s*exp(p5*v + c1)
if v > v_th:
    spike()
    v = v0
""",
    "izhikevich": """
u = p3*u + p4*v
v = (p5*v + c1)*v + p1*I + p2*u + c0
if v > v_th:
    spike()
    v = v0
    u = u + c2
""",
    "stdp": """
x0 = P3*x0 + C0*x2
y0 = P4*y0 + C1*y2
w = w + P0*x0*y2 + P1*y0*x2
""",
    "triplet_stdp": """
x0 = P3*x0 + C0*x2
y0 = P4*y0 + C1*y2
y1 = P5*y1 + C2*y2
w = w + P0*r0*x0*y2 + P1*r0*y0*x2 + P2*r0*y1*x2
""",
    "rstdp": """
x0 = P3*x0 + C0*x2
y0 = P4*y0 + C1*y2
r0 = P6*r0 + C3*r2
w = w + P0*r0*x0*y2 + P1*r0*y0*x2
""",
    "sdsp": """
step = C0*x2
if v >= v_gate:
    if ca >= ca_low:
        if ca <= ca_high:
            if ca > ca_mid:
                w = w + step
            else:
                w = w - step
""",
    "stp": """
if layer == 0:
    w = w + p2*v*x2
else:
    w = w + P1*x2*r2
""",
}


class LoweringError(ValueError):
    pass


@dataclass
class Lowered:
    code: list[str] = field(default_factory=list)
    _temps: int = 0
    _labels: int = 0

    def temp(self) -> str:
        self._temps += 1
        return f"t{self._temps}"

    def label(self) -> str:
        self._labels += 1
        return f"L{self._labels}"

    def emit(self, text: str) -> None:
        self.code.append(text)

    @property
    def count(self) -> int:
        return sum(1 for line in self.code if not line.endswith(":"))


_BINOPS = {ast.Add: "ADD", ast.Sub: "SUB", ast.Mult: "MUL", ast.Div: "DIV"}
_CMPS = {ast.Gt: "BLE", ast.GtE: "BLT", ast.Lt: "BGE", ast.LtE: "BGT", ast.Eq: "BNE", ast.NotEq: "BEQ"}


def _expr(node: ast.expr, out: Lowered) -> str:
    if isinstance(node, ast.Name):
        t = out.temp()
        out.emit(f"LD {t}, [{node.id}]")
        return t
    if isinstance(node, ast.Constant):
        t = out.temp()
        out.emit(f"LI {t}, {node.value}")
        return t
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        a = _expr(node.left, out)
        b = _expr(node.right, out)
        t = out.temp()
        out.emit(f"{_BINOPS[type(node.op)]} {t}, {a}, {b}")
        return t
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        a = _expr(node.operand, out)
        t = out.temp()
        out.emit(f"NEG {t}, {a}")
        return t
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "exp":
        a = _expr(node.args[0], out)
        t = out.temp()
        out.emit(f"EXP {t}, {a}")
        return t
    raise LoweringError(f"unsupported expression {ast.dump(node)}")


def _stmts(body: list[ast.stmt], out: Lowered) -> None:
    for node in body:
        if isinstance(node, ast.Assign) and len(node.targets) == 1 and isinstance(node.targets[0], ast.Name):
            t = _expr(node.value, out)
            out.emit(f"ST [{node.targets[0].id}], {t}")
        elif isinstance(node, ast.Expr) and isinstance(node.value, ast.Call) and node.value.func.id == "spike":
            out.emit("SEND")
        elif isinstance(node, ast.If):
            test = node.test
            if not (isinstance(test, ast.Compare) and len(test.ops) == 1 and type(test.ops[0]) in _CMPS):
                raise LoweringError("conditions must be a single comparison")
            a = _expr(test.left, out)
            b = _expr(test.comparators[0], out)
            skip = out.label()
            out.emit(f"CMP {a}, {b}")
            out.emit(f"{_CMPS[type(test.ops[0])]} {skip}")
            _stmts(node.body, out)
            if node.orelse:
                end = out.label()
                out.emit(f"JMP {end}")
                out.emit(f"{skip}:")
                _stmts(node.orelse, out)
                out.emit(f"{end}:")
            else:
                out.emit(f"{skip}:")
        else:
            raise LoweringError(f"unsupported statement {ast.dump(node)}")


def lower(source: str) -> Lowered:
    out = Lowered()
    _stmts(ast.parse(source.strip()).body, out)
    return out


def naive_instruction_count(model: str) -> int:
    return lower(UPDATE_EQUATIONS[model]).count


def density_table() -> dict[str, dict[str, float]]:
    """Per model: published instruction count, naive count and their ratio."""
    from .templates import GOLDEN_COUNTS, get_template

    rows = {}
    for name in GOLDEN_COUNTS:
        darwin = get_template(name).instruction_count
        naive = naive_instruction_count(name)
        rows[name] = {"darwin": darwin, "naive": naive, "ratio": naive / darwin}
    return rows


__all__ = ["LoweringError", "UPDATE_EQUATIONS", "density_table", "lower", "naive_instruction_count"]
