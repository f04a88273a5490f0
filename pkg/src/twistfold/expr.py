"""Expression grammar for the CLI and scenario files: a small deterministic
precedence parser (^ above unary minus above * / above + -), a printer whose
output reparses to the same tree, and an evaluator over engine values.

Named calls: star(a,b), wedge(a,b), pair(X,w), act(u,T), d(w) and the
square-bracket form bracket[X,Y].
"""

from __future__ import annotations

from fractions import Fraction

from .fields import PForm, VectorField, pairing
from .hopf import UElement
from .poly import Polynomial, RatFunc
from .scalars import I, NuSeries, Scalar


class ParseError(Exception):
    def __init__(self, message, line=1, col=None):
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if col is not None else ""
        super().__init__(f"{message}{where}")


class ExprTypeError(Exception):
    pass


CALLS = {"star": 2, "wedge": 2, "pair": 2, "act": 2, "d": 1}


# -- tokens -------------------------------------------------------------------

def tokenize(src: str):
    tokens = []
    i = 0
    line, col = 1, 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            tokens.append(("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            tokens.append(("name", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^(),[]":
            tokens.append((ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(("end", "", line, col))
    return tokens


# -- AST ----------------------------------------------------------------------

class Node:
    __slots__ = ("kind", "value", "args")

    def __init__(self, kind, value=None, args=()):
        self.kind = kind
        self.value = value
        self.args = tuple(args)

    def __eq__(self, other):
        return (isinstance(other, Node) and self.kind == other.kind
                and self.value == other.value and self.args == other.args)

    def __hash__(self):
        return hash((self.kind, self.value, self.args))

    def __repr__(self):
        if self.kind in ("num", "name"):
            return f"Node({self.kind}, {self.value!r})"
        return f"Node({self.kind}, args={list(self.args)!r})"


class Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what=None):
        t = self.peek()
        if t[0] != kind:
            if t[0] == "end":
                raise ParseError(f"unbalanced delimiters: expected "
                                 f"{what or kind}", t[2], t[3])
            raise ParseError(f"expected {what or kind}, found {t[1]!r}",
                             t[2], t[3])
        return self.next()

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected trailing {t[1]!r}", t[2], t[3])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.term()
            node = Node("add" if op == "+" else "sub", args=(node, rhs))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.unary()
            node = Node("mul" if op == "*" else "div", args=(node, rhs))
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.next()
            return Node("neg", args=(self.unary(),))
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[0] == "^":
            self.next()
            # right-associative, exponent binds any further powers
            if self.peek()[0] == "-":
                self.next()
                exp = Node("neg", args=(self.power(),))
            else:
                exp = self.power()
            node = Node("pow", args=(node, exp))
        return node

    def atom(self):
        t = self.peek()
        if t[0] == "num":
            self.next()
            return Node("num", value=int(t[1]))
        if t[0] == "(":
            self.next()
            node = self.expr()
            self.expect(")", "')'")
            return node
        if t[0] == "name":
            self.next()
            name = t[1]
            if name == "bracket":
                self.expect("[", "'['")
                a = self.expr()
                self.expect(",", "','")
                b = self.expr()
                self.expect("]", "']'")
                return Node("call", value="bracket", args=(a, b))
            if name in CALLS and self.peek()[0] == "(":
                self.next()
                args = [self.expr()]
                while self.peek()[0] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")", "')'")
                if len(args) != CALLS[name]:
                    raise ParseError(
                        f"{name} takes {CALLS[name]} argument(s), "
                        f"got {len(args)}", t[2], t[3])
                return Node("call", value=name, args=args)
            return Node("name", value=name)
        if t[0] == "end":
            raise ParseError("unexpected end of input", t[2], t[3])
        raise ParseError(f"unexpected {t[1]!r}", t[2], t[3])


def parse_expression(src: str) -> Node:
    return Parser(tokenize(src)).parse()


# -- printing -----------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4,
         "num": 5, "name": 5, "call": 5}


def print_expression(node: Node) -> str:
    return _print(node, 0)


def _print(node, parent_prec):
    p = _PREC[node.kind]
    if node.kind == "num":
        s = str(node.value)
    elif node.kind == "name":
        s = node.value
    elif node.kind == "call":
        if node.value == "bracket":
            s = "bracket[" + ", ".join(_print(a, 0) for a in node.args) + "]"
        else:
            s = node.value + "(" + \
                ", ".join(_print(a, 0) for a in node.args) + ")"
    elif node.kind == "neg":
        s = "-" + _print(node.args[0], p)
    elif node.kind == "pow":
        s = _print(node.args[0], p + 1) + "^" + _print(node.args[1], p)
    else:
        op = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[node.kind]
        left = _print(node.args[0], p)
        # left-associative: the right operand needs strictly higher binding
        right = _print(node.args[1], p + 1)
        s = left + op + right
    if p < parent_prec:
        return "(" + s + ")"
    return s


# -- evaluation ---------------------------------------------------------------

class Environment:
    """Name resolution for the evaluator: chart coordinates, partials
    d1..dn, nu, i, plus named engine values (generators, frames, defined
    expressions)."""

    def __init__(self, chart, star_context=None, names=None):
        self.chart = chart
        self.ctx = star_context
        self.names = dict(names or {})

    def define(self, name, value):
        self.names[name] = value

    def resolve(self, name):
        if name in self.names:
            return self.names[name]
        if name == "nu":
            return Polynomial.constant(self.chart, NuSeries.nu(1))
        if name == "i":
            return Polynomial.constant(self.chart, I)
        if name in self.chart.all_vars:
            return Polynomial.var(self.chart, name)
        if name.startswith("d") and name[1:].isdigit():
            k = int(name[1:])
            if 1 <= k <= self.chart.n:
                return VectorField.coordinate(self.chart, k - 1)
        raise ExprTypeError(f"unknown name {name!r}")


def _is_function(v):
    return isinstance(v, (Polynomial, RatFunc))


def evaluate(node: Node, env: Environment):
    """Evaluate with the small type discipline: functions, vector fields,
    1-forms and enveloping-algebra elements, combined by arity-checked
    operations."""
    k = node.kind
    if k == "num":
        return Polynomial.constant(env.chart, node.value)
    if k == "name":
        return env.resolve(node.value)
    if k == "neg":
        return -evaluate(node.args[0], env)
    if k in ("add", "sub"):
        a = evaluate(node.args[0], env)
        b = evaluate(node.args[1], env)
        try:
            return a + b if k == "add" else a - b
        except Exception as exc:
            raise ExprTypeError(f"cannot {k} {type(a).__name__} and "
                                f"{type(b).__name__}") from exc
    if k == "mul":
        a = evaluate(node.args[0], env)
        b = evaluate(node.args[1], env)
        if _is_function(a) and _is_function(b):
            return a * b
        if _is_function(a):
            return b.scale(a)
        if _is_function(b):
            return a.scale(b)
        if isinstance(a, UElement) and isinstance(b, UElement):
            return a * b
        raise ExprTypeError(
            f"cannot multiply {type(a).__name__} by {type(b).__name__}")
    if k == "div":
        a = evaluate(node.args[0], env)
        b = evaluate(node.args[1], env)
        if not _is_function(b):
            raise ExprTypeError("division needs a function divisor")
        if _is_function(a):
            return a / b
        inv = RatFunc(Polynomial.constant(env.chart, 1)) / RatFunc.coerce(
            RatFunc(Polynomial.constant(env.chart, 1)), b)
        return a.scale(inv)
    if k == "pow":
        a = evaluate(node.args[0], env)
        exp = node.args[1]
        neg = False
        if exp.kind == "neg":
            neg = True
            exp = exp.args[0]
        if exp.kind != "num":
            raise ExprTypeError("exponents must be integer literals")
        if not _is_function(a):
            raise ExprTypeError("only functions can be raised to powers")
        if neg:
            one = RatFunc(Polynomial.constant(env.chart, 1))
            base = a if isinstance(a, RatFunc) else RatFunc(a)
            out = one
            for _ in range(exp.value):
                out = out / base
            return out
        if isinstance(a, RatFunc):
            out = RatFunc(Polynomial.constant(env.chart, 1))
            for _ in range(exp.value):
                out = out * a
            return out
        return a ** exp.value
    if k == "call":
        return _call(node.value, node.args, env)
    raise ExprTypeError(f"cannot evaluate node kind {k!r}")


def _call(fname, arg_nodes, env):
    if fname == "d":
        a = evaluate(arg_nodes[0], env)
        if _is_function(a):
            return PForm.from_function(env.chart, a).d()
        if isinstance(a, PForm):
            return a.d()
        raise ExprTypeError("d() expects a function or a form")
    if fname == "act":
        u = _as_uelement(arg_nodes[0], env)
        t = evaluate(arg_nodes[1], env)
        return u.act(t)
    a = evaluate(arg_nodes[0], env)
    b = evaluate(arg_nodes[1], env)
    if fname == "star":
        if env.ctx is None:
            raise ExprTypeError("no star context configured")
        if isinstance(a, PForm) and isinstance(b, PForm):
            return env.ctx.star_wedge(a, b)
        return env.ctx.star(a, b)
    if fname == "wedge":
        if _is_function(a):
            a = PForm.from_function(env.chart, a)
        if _is_function(b):
            b = PForm.from_function(env.chart, b)
        if not isinstance(a, PForm) or not isinstance(b, PForm):
            raise ExprTypeError("wedge expects forms")
        return a.wedge(b)
    if fname == "pair":
        if env.ctx is not None:
            return env.ctx.star_pairing(a, b)
        return pairing(a, b)
    if fname == "bracket":
        if isinstance(a, UElement) or isinstance(b, UElement):
            raise ExprTypeError("bracket expects vector fields")
        if env.ctx is not None:
            return env.ctx.star_bracket(a, b)
        return a.bracket(b)
    raise ExprTypeError(f"unknown call {fname!r}")


def _as_uelement(node, env):
    """Evaluate an expression over generator names as an enveloping-algebra
    element (for act(u, T))."""
    if env.ctx is None:
        raise ExprTypeError("act() needs a star context with generators")
    gens = env.ctx.gens

    def rec(nd):
        if nd.kind == "name":
            if nd.value in gens.names:
                return UElement.generator(gens, nd.value)
            raise ExprTypeError(f"{nd.value!r} is not a twist generator")
        if nd.kind == "num":
            return UElement.unit(gens, nd.value)
        if nd.kind == "neg":
            return -rec(nd.args[0])
        if nd.kind in ("add", "sub"):
            a, b = rec(nd.args[0]), rec(nd.args[1])
            return a + b if nd.kind == "add" else a - b
        if nd.kind == "mul":
            return rec(nd.args[0]) * rec(nd.args[1])
        raise ExprTypeError("act() takes a word in the twist generators")
    return rec(node)


# -- value printing ------------------------------------------------------------

def format_value(v) -> str:
    """Exact, grammar-compatible rendering of engine values."""
    if isinstance(v, (Polynomial, RatFunc, VectorField, PForm, UElement)):
        return str(v)
    if isinstance(v, (NuSeries, Scalar, int, Fraction)):
        return str(v)
    return str(v)
