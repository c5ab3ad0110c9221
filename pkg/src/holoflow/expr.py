"""Complex-expression DSL in one variable z.

Grammar (left-associative +,-,*,/; right-associative ^):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | 'i' | 'z' | func '(' expr ')' | '(' expr ')' | '-' base
    func   := 'log' | 'exp' | 'sqrt'

Evaluation uses principal branches everywhere (arg in (-pi, pi]);
a^b is exp(b log a).  conj/abs are deliberately absent: they would break
holomorphy, and callers take real/imaginary parts outside the AST.
"""
from __future__ import annotations

import cmath
import warnings

import numpy as np

NUM, VAR_Z, NEG, ADD, SUB, MUL, DIV, POW, LOG, EXP, SQRT = range(11)

_KIND_NAMES = {
    NUM: "num", VAR_Z: "z", NEG: "neg", ADD: "add", SUB: "sub", MUL: "mul",
    DIV: "div", POW: "pow", LOG: "log", EXP: "exp", SQRT: "sqrt",
}
_FUNCS = {"log": LOG, "exp": EXP, "sqrt": SQRT}
_UNARY = (NEG, LOG, EXP, SQRT)


class Ast:
    """Immutable expression node."""

    __slots__ = ("kind", "value", "a", "b")

    def __init__(self, kind, value=None, a=None, b=None):
        self.kind = kind
        self.value = value
        self.a = a
        self.b = b

    def __eq__(self, other):
        if not isinstance(other, Ast):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.value == other.value
            and self.a == other.a
            and self.b == other.b
        )

    def __hash__(self):
        return hash((self.kind, self.value, self.a, self.b))

    def __repr__(self):
        return f"Ast<{to_string(self)}>"


Z = Ast(VAR_Z)
ONE = Ast(NUM, 1.0 + 0j)
ZERO = Ast(NUM, 0.0 + 0j)
I_UNIT = Ast(NUM, 1j)


def num(value) -> Ast:
    return Ast(NUM, complex(value))


class ParseError(ValueError):
    """Syntax error with the byte offset and what was expected there."""

    def __init__(self, offset: int, expected: str):
        self.offset = offset
        self.expected = expected
        super().__init__(f"parse error at offset {offset}: expected {expected}")


class EvalError(ArithmeticError):
    """Evaluation hit a pole or an undefined principal value."""


class BranchCutWarning(RuntimeWarning):
    """An argument landed exactly on the negative real axis of log/sqrt/pow."""


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ParseError(self.pos, f"'{ch}'")
        self.pos += 1

    def parse(self) -> Ast:
        if not self.text.strip():
            raise ParseError(0, "an expression")
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise ParseError(self.pos, "end of input")
        return node

    def expr(self) -> Ast:
        node = self.term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                node = Ast(ADD, a=node, b=self.term())
            elif ch == "-":
                self.pos += 1
                node = Ast(SUB, a=node, b=self.term())
            else:
                return node

    def term(self) -> Ast:
        node = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                node = Ast(MUL, a=node, b=self.factor())
            elif ch == "/":
                self.pos += 1
                node = Ast(DIV, a=node, b=self.factor())
            else:
                return node

    def factor(self) -> Ast:
        node = self.base()
        if self.peek() == "^":
            self.pos += 1
            return Ast(POW, a=node, b=self.factor())
        return node

    def base(self) -> Ast:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch == "-":
            self.pos += 1
            return Ast(NEG, a=self.base())
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha():
            return self.identifier()
        raise ParseError(self.pos, "a number, 'z', 'i', a function, '(' or '-'")

    def number(self) -> Ast:
        start = self.pos
        text = self.text
        n = len(text)
        while self.pos < n and text[self.pos].isdigit():
            self.pos += 1
        if self.pos < n and text[self.pos] == ".":
            self.pos += 1
            while self.pos < n and text[self.pos].isdigit():
                self.pos += 1
        if self.pos < n and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < n and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < n and text[self.pos].isdigit():
                while self.pos < n and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark   # "e" belonged to something else; not ours
        lexeme = text[start:self.pos]
        try:
            return num(float(lexeme))
        except ValueError:
            raise ParseError(start, "a decimal number") from None

    def identifier(self) -> Ast:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start:self.pos]
        if name == "z":
            return Z
        if name == "i":
            return I_UNIT
        if name in _FUNCS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Ast(_FUNCS[name], a=arg)
        raise ParseError(start, "'z', 'i' or one of log/exp/sqrt")


def parse(text: str) -> Ast:
    """Parse an expression string into an Ast; raises ParseError with an offset."""
    return _Parser(text).parse()


def _warn_cut(w: complex):
    if w.imag == 0.0 and w.real < 0.0:
        warnings.warn(
            f"principal branch evaluated on the cut at {w}", BranchCutWarning, stacklevel=3
        )


def _pow(a: complex, b: complex, checked: bool) -> complex:
    if a == 0:
        if b.imag == 0.0 and b.real > 0.0:
            return 0j
        raise EvalError(f"0^{b} is undefined")
    if checked:
        _warn_cut(a)
    return cmath.exp(b * cmath.log(a))


def evaluate(node: Ast, z: complex, checked: bool = True) -> complex:
    """Principal-branch evaluation at z.

    With checked=True, poles raise EvalError and arguments landing exactly
    on a branch cut emit BranchCutWarning (the principal value is still
    returned).  The unchecked path mirrors the compiled kernel: poles
    produce inf/nan silently.
    """
    k = node.kind
    if k == NUM:
        return node.value
    if k == VAR_Z:
        return complex(z)
    if k == NEG:
        return -evaluate(node.a, z, checked)
    if k in (ADD, SUB, MUL, DIV, POW):
        a = evaluate(node.a, z, checked)
        b = evaluate(node.b, z, checked)
        if k == ADD:
            return a + b
        if k == SUB:
            return a - b
        if k == MUL:
            return a * b
        if k == DIV:
            if b == 0:
                if checked:
                    raise EvalError(f"division by zero in {to_string(node)}")
                return complex("nan")
            return a / b
        return _pow(a, b, checked)
    a = evaluate(node.a, z, checked)
    if k == LOG:
        if a == 0:
            raise EvalError("log(0)")
        if checked:
            _warn_cut(a)
        return cmath.log(a)
    if k == EXP:
        return cmath.exp(a)
    if k == SQRT:
        if checked:
            _warn_cut(a)
        return cmath.sqrt(a)
    raise AssertionError(f"unknown node kind {k}")


# ---------------------------------------------------------------------------
# printing (round-trips through parse for parser-built trees)

_PREC = {ADD: 1, SUB: 1, MUL: 2, DIV: 2, NEG: 3, POW: 4}


def _fmt_const(v: complex) -> str:
    if v == 1j:
        return "i"
    if v.imag == 0.0:
        r = v.real
        if r < 0:
            return f"(-{_fmt_real(-r)})"
        return _fmt_real(r)
    return f"({_fmt_real(v.real)}+{_fmt_real(v.imag)}*i)"


def _fmt_real(r: float) -> str:
    if r == int(r) and abs(r) < 1e16:
        return str(int(r))
    return repr(r)


def to_string(node: Ast, parent_prec: int = 0) -> str:
    k = node.kind
    if k == NUM:
        return _fmt_const(node.value)
    if k == VAR_Z:
        return "z"
    if k == NEG:
        s = "-" + to_string(node.a, _PREC[NEG])
        return f"({s})" if parent_prec > _PREC[NEG] else s
    if k in (LOG, EXP, SQRT):
        return f"{_KIND_NAMES[k]}({to_string(node.a)})"
    op = {ADD: "+", SUB: "-", MUL: "*", DIV: "/", POW: "^"}[k]
    prec = _PREC[k]
    # left-assoc chains keep the left child at equal precedence; '^' is
    # right-assoc, so its right child may sit at equal precedence instead
    if k == POW:
        s = to_string(node.a, prec + 1) + op + to_string(node.b, prec)
    else:
        s = to_string(node.a, prec) + op + to_string(node.b, prec + 1)
    return f"({s})" if parent_prec > prec else s


# ---------------------------------------------------------------------------
# symbolic differentiation

def _is_const(node: Ast) -> bool:
    return node.kind == NUM


def mk_neg(a: Ast) -> Ast:
    if _is_const(a):
        return num(-a.value)
    return Ast(NEG, a=a)


def mk_add(a: Ast, b: Ast) -> Ast:
    if _is_const(a) and a.value == 0:
        return b
    if _is_const(b) and b.value == 0:
        return a
    if _is_const(a) and _is_const(b):
        return num(a.value + b.value)
    return Ast(ADD, a=a, b=b)


def mk_sub(a: Ast, b: Ast) -> Ast:
    if _is_const(b) and b.value == 0:
        return a
    if _is_const(a) and _is_const(b):
        return num(a.value - b.value)
    if _is_const(a) and a.value == 0:
        return mk_neg(b)
    return Ast(SUB, a=a, b=b)


def mk_mul(a: Ast, b: Ast) -> Ast:
    if _is_const(a):
        if a.value == 0:
            return ZERO
        if a.value == 1:
            return b
        if _is_const(b):
            return num(a.value * b.value)
    if _is_const(b):
        if b.value == 0:
            return ZERO
        if b.value == 1:
            return a
    return Ast(MUL, a=a, b=b)


def mk_div(a: Ast, b: Ast) -> Ast:
    if _is_const(a) and a.value == 0:
        return ZERO
    if _is_const(b) and b.value == 1:
        return a
    return Ast(DIV, a=a, b=b)


def mk_pow(a: Ast, b: Ast) -> Ast:
    if _is_const(b):
        if b.value == 1:
            return a
        if b.value == 0:
            return ONE
    return Ast(POW, a=a, b=b)


def differentiate(node: Ast) -> Ast:
    """Symbolic d/dz with principal-branch semantics preserved."""
    k = node.kind
    if k in (NUM,):
        return ZERO
    if k == VAR_Z:
        return ONE
    if k == NEG:
        return mk_neg(differentiate(node.a))
    if k == ADD:
        return mk_add(differentiate(node.a), differentiate(node.b))
    if k == SUB:
        return mk_sub(differentiate(node.a), differentiate(node.b))
    if k == MUL:
        return mk_add(
            mk_mul(differentiate(node.a), node.b),
            mk_mul(node.a, differentiate(node.b)),
        )
    if k == DIV:
        numr = mk_sub(
            mk_mul(differentiate(node.a), node.b),
            mk_mul(node.a, differentiate(node.b)),
        )
        return mk_div(numr, mk_pow(node.b, num(2)))
    if k == POW:
        a, b = node.a, node.b
        da = differentiate(a)
        if _is_const(b):
            return mk_mul(mk_mul(b, mk_pow(a, num(b.value - 1))), da)
        # non-constant exponent: a^b = exp(b log a)
        db = differentiate(b)
        inner = mk_add(mk_mul(db, Ast(LOG, a=a)), mk_div(mk_mul(b, da), a))
        return mk_mul(node, inner)
    if k == LOG:
        return mk_div(differentiate(node.a), node.a)
    if k == EXP:
        return mk_mul(node, differentiate(node.a))
    if k == SQRT:
        return mk_div(differentiate(node.a), mk_mul(num(2), node))
    raise AssertionError(f"unknown node kind {k}")


def substitute(node: Ast, replacement: Ast) -> Ast:
    """Replace the variable z by another expression."""
    k = node.kind
    if k == NUM:
        return node
    if k == VAR_Z:
        return replacement
    if k in _UNARY:
        return Ast(k, a=substitute(node.a, replacement))
    return Ast(k, a=substitute(node.a, replacement), b=substitute(node.b, replacement))


# ---------------------------------------------------------------------------
# tape compilation (stack machine shared by both kernels)

OP_CONST, OP_Z, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_LOG, OP_EXP, OP_SQRT = range(11)

_NODE_TO_OP = {
    NEG: OP_NEG, ADD: OP_ADD, SUB: OP_SUB, MUL: OP_MUL, DIV: OP_DIV,
    POW: OP_POW, LOG: OP_LOG, EXP: OP_EXP, SQRT: OP_SQRT,
}


class Tape:
    """Flattened postfix program: int32 (op, arg) pairs plus a constant pool."""

    __slots__ = ("code", "consts", "stack_size")

    def __init__(self, code: np.ndarray, consts: np.ndarray, stack_size: int):
        self.code = code
        self.consts = consts
        self.stack_size = stack_size


def compile_tape(node: Ast) -> Tape:
    code: list[int] = []
    consts: list[complex] = []
    index: dict[complex, int] = {}

    def emit(op, arg=0):
        code.append(op)
        code.append(arg)

    depth = 0
    max_depth = 0

    def walk(n: Ast):
        nonlocal depth, max_depth
        k = n.kind
        if k == NUM:
            v = complex(n.value)
            if v not in index:
                index[v] = len(consts)
                consts.append(v)
            emit(OP_CONST, index[v])
            depth += 1
        elif k == VAR_Z:
            emit(OP_Z)
            depth += 1
        elif k in _UNARY:
            walk(n.a)
            emit(_NODE_TO_OP[k])
        else:
            walk(n.a)
            walk(n.b)
            emit(_NODE_TO_OP[k])
            depth -= 1
        max_depth = max(max_depth, depth)

    walk(node)
    return Tape(
        np.asarray(code, dtype=np.int32),
        np.asarray(consts, dtype=np.complex128),
        max(max_depth, 1),
    )
