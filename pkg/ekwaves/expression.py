# -*- coding: utf-8 -*-
# License: MIT
# Project: EK Solitary Waves
#
# Text processor for user models: a tiny rational grammar turned into sympy trees.
#
#   expr    :: term [ ('+' | '-') term ]*
#   term    :: unary [ ('*' | '/') unary ]*
#   unary   :: ('+' | '-') unary | power
#   power   :: primary [ '^' unary ]          (right associative)
#   primary :: number | identifier | '(' expr ')'
#
import logging

import numpy as np
import pyparsing as pp
import sympy as sp

from .errors import ExpressionError, ExpressionSyntaxError, UnknownIdentifier
# The only free variable of a model expression
V = sp.Symbol('v', real=True)
NUMBER_RE = r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?"


class ExpressionParser:
    def __init__(self, params=None):
        # Named positive parameters, the numeric values are bound later, in `lower`
        self.params = dict(params or {})
        for name, value in self.params.items():
            if name == 'v':
                raise ExpressionError("`v` is the model variable, it can't be used as a parameter")
            if not value > 0:
                raise ExpressionError(f"Parameter `{name}` must be positive, got {value}")
        self.symbols = {name: sp.Symbol(name, positive=True) for name in self.params}
        self.bnf = self._grammar()

    def _grammar(self):
        lpar = pp.Suppress('(')
        rpar = pp.Suppress(')')
        number = pp.Regex(NUMBER_RE).set_parse_action(lambda t: sp.Rational(t[0]))
        identifier = pp.Word(pp.alphas + '_', pp.alphanums + '_').set_parse_action(self._identifier)

        expr = pp.Forward()
        unary = pp.Forward()
        primary = number | identifier | (lpar - expr - rpar)
        # After an operator the operand is mandatory: `-` stops the backtracking so the error
        # points to the place where the operand was expected
        power = (primary + pp.Optional(pp.Suppress('^') - unary)).set_parse_action(self._power)
        unary <<= (pp.one_of('+ -') - unary).set_parse_action(self._sign) | power
        term = (unary + pp.ZeroOrMore(pp.one_of('* /') - unary)).set_parse_action(self._fold)
        expr <<= (term + pp.ZeroOrMore(pp.one_of('+ -') - term)).set_parse_action(self._fold)
        return expr

    def _identifier(self, s, loc, toks):
        name = toks[0]
        if name == 'v':
            return V
        sym = self.symbols.get(name)
        if sym is None:
            raise UnknownIdentifier(name, loc)
        return sym

    @staticmethod
    def _power(toks):
        if len(toks) == 1:
            return toks[0]
        return sp.Pow(toks[0], toks[1])

    @staticmethod
    def _sign(toks):
        return -toks[1] if toks[0] == '-' else toks[1]

    @staticmethod
    def _fold(toks):
        acc = toks[0]
        for i in range(1, len(toks), 2):
            op, rhs = toks[i], toks[i+1]
            if op == '+':
                acc = acc + rhs
            elif op == '-':
                acc = acc - rhs
            elif op == '*':
                acc = acc*rhs
            else:
                acc = acc/rhs
        return acc

    def __call__(self, text):
        try:
            res = self.bnf.parse_string(text, parse_all=True)
        except pp.ParseBaseException as e:
            raise ExpressionSyntaxError(f"Syntax error in `{text}`: {e.msg}", e.loc) from None
        expr = res[0]
        logging.debug(f"Parsed `{text}` as {expr}")
        return sp.sympify(expr)

    def lower(self, expr):
        """ Numeric version of a parsed expression, vectorized over v """
        subs = {self.symbols[k]: sp.nsimplify(v) for k, v in self.params.items()}
        return lambdify_v(expr.subs(subs))


def derivative(expr):
    """ d/dv of a parsed expression. The grammar is closed under differentiation, but check it """
    if expr.atoms(sp.Function):
        raise ExpressionError(f"Functions are not part of the model grammar: {expr}")
    d = sp.diff(expr, V)
    if d.has(sp.Derivative) or d.has(sp.Subs):
        raise ExpressionError(f"Can't differentiate {expr}")
    return d


def lambdify_v(expr):
    f = sp.lambdify(V, expr, modules='numpy')

    def evaluate(v):
        v = np.asarray(v, dtype=float)
        # Constants come back as scalars, give them the shape of v
        return np.asarray(f(v), dtype=float) + np.zeros_like(v)
    return evaluate


def to_text(expr):
    """ Printed form using the grammar operators """
    return sp.sstr(expr).replace('**', '^')
