"""
Exact arithmetic for the shifted loop group computations.

    LaurentPoly       sparse Laurent polynomials over Q in named variables
    RatFunc           rational functions with a factored denominator
    USeries           truncated series in the spectral variable u
    VirtualCharacter  integer combinations of Laurent monomials, with Adams operations

Every value is immutable after construction and every coefficient is an int or
a Fraction. Truncation bounds are always explicit arguments.
"""

from fractions import Fraction
from functools import lru_cache

import sympy

from logger_config import setup_logger
from shifted.exceptions import ExpansionError, PoleOrderError, TruncationError

logger = setup_logger(__name__)

SERIES_VAR = 'u'
INFINITY = 'inf'

# USeries directions
POWERS_OF_U = 'u'
POWERS_OF_U_INV = 'u_inv'
TWO_SIDED = 'two_sided'
DIRECTIONS = (POWERS_OF_U, POWERS_OF_U_INV, TWO_SIDED)

# Trial cancellation of denominator factors is skipped above these sizes
CANCEL_MAX_FACTOR_TERMS = 4
CANCEL_MAX_NUM_TERMS = 600


@lru_cache(maxsize=None)
def variable_rank(name):
    """Sort key of a variable name: q, t, chi1..chiN, other names, zeta, u, v."""
    if name == 'q':
        return (0, 0, '')
    if name == 't':
        return (1, 0, '')
    if name.startswith('chi') and name[3:].isdigit():
        return (2, int(name[3:]), '')
    if name == 'zeta':
        return (4, 0, '')
    if name == 'u':
        return (5, 0, '')
    if name == 'v':
        return (6, 0, '')
    return (3, 0, name)


def _item_rank(item):
    return variable_rank(item[0])


def _mono(pairs):
    """Canonical monomial from (variable, exponent) pairs."""
    acc = {}
    for name, exp in pairs:
        acc[name] = acc.get(name, 0) + exp
    return tuple(sorted(((n, e) for n, e in acc.items() if e), key=_item_rank))


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    return _mono(a + b)


def _mono_pow(a, n):
    if n == 0:
        return ()
    return tuple((name, exp * n) for name, exp in a)


def _mono_exp(a, var):
    for name, exp in a:
        if name == var:
            return exp
    return 0


def _mono_drop(a, var):
    return tuple(item for item in a if item[0] != var)


def _mono_str(mono):
    return '*'.join(name if exp == 1 else f'{name}^{exp}' for name, exp in mono)


def _dense_key(mono, variables):
    exps = dict(mono)
    return tuple(exps.get(v, 0) for v in variables)


def _norm(coeff):
    if isinstance(coeff, Fraction) and coeff.denominator == 1:
        return coeff.numerator
    return coeff


def _term_str(mono, coeff):
    if not mono:
        return str(coeff)
    if coeff == 1:
        return _mono_str(mono)
    if coeff == -1:
        return '-' + _mono_str(mono)
    return f'{coeff}*{_mono_str(mono)}'


class LaurentPoly:
    """
    Sparse Laurent polynomial with rational coefficients.

    Terms map a canonical monomial, a tuple of (variable, exponent) pairs in
    variable order, to a nonzero int or Fraction.
    """

    __slots__ = ('_terms', '_hash', '_text')

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff:
                    clean[mono] = _norm(coeff)
        self._terms = clean
        self._hash = None
        self._text = None

    @classmethod
    def _raw(cls, terms):
        poly = cls.__new__(cls)
        poly._terms = terms
        poly._hash = None
        poly._text = None
        return poly

    @classmethod
    def constant(cls, value):
        return cls({(): value})

    @classmethod
    def var(cls, name, exp=1):
        return cls({_mono([(name, exp)]): 1})

    @classmethod
    def monomial(cls, exps, coeff=1):
        """Monomial from a mapping variable -> exponent."""
        return cls({_mono(exps.items()): coeff})

    @classmethod
    def coerce(cls, value):
        if isinstance(value, LaurentPoly):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.constant(value)
        raise TypeError(f'cannot use {type(value).__name__} as a Laurent polynomial')

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def is_constant(self):
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def constant_value(self):
        return self._terms.get((), 0)

    def is_monomial(self):
        return len(self._terms) == 1

    def variables(self):
        return {name for mono in self._terms for name, _ in mono}

    def degree_range(self, var):
        exps = [_mono_exp(mono, var) for mono in self._terms]
        if not exps:
            return (0, 0)
        return (min(exps), max(exps))

    def split(self, var):
        """Coefficients in powers of var: exponent -> LaurentPoly free of var."""
        parts = {}
        for mono, coeff in self._terms.items():
            parts.setdefault(_mono_exp(mono, var), {})[_mono_drop(mono, var)] = coeff
        return {exp: LaurentPoly._raw(terms) for exp, terms in parts.items()}

    def monomial_content(self):
        """Largest monomial dividing every term (componentwise minimum exponent)."""
        lows = []
        for name in self.variables():
            lows.append((name, min(_mono_exp(mono, name) for mono in self._terms)))
        return _mono(lows)

    def shift(self, mono, coeff=1):
        """Multiply by coeff times the monomial mono."""
        return LaurentPoly._raw({_mono_mul(mono, m): _norm(c * coeff) for m, c in self._terms.items()})

    def scale(self, coeff):
        if not coeff:
            return LaurentPoly()
        return LaurentPoly._raw({m: _norm(c * coeff) for m, c in self._terms.items()})

    def unit_inverse(self):
        if not self.is_monomial():
            raise ZeroDivisionError(f'{self} is not a unit of the Laurent ring')
        (mono, coeff), = self._terms.items()
        return LaurentPoly._raw({_mono_pow(mono, -1): _norm(Fraction(1) / coeff)})

    def adams(self, m):
        """Ring endomorphism raising every variable to its m-th power."""
        return LaurentPoly._raw({_mono_pow(mono, m): c for mono, c in self._terms.items()})

    def derivative(self, var):
        terms = {}
        for mono, coeff in self._terms.items():
            exp = _mono_exp(mono, var)
            if exp:
                terms[_mono_mul(mono, ((var, -1),))] = coeff * exp
        return LaurentPoly(terms)

    def evaluate(self, point):
        """Value at a point given as {variable: nonzero rational}."""
        total = Fraction(0)
        for mono, coeff in self._terms.items():
            value = Fraction(coeff)
            for name, exp in mono:
                value *= Fraction(point[name]) ** exp
            total += value
        return _norm(total)

    def exact_quotient(self, divisor):
        """self / divisor if divisor divides self in the Laurent ring, else None."""
        divisor = LaurentPoly.coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError('division by the zero polynomial')
        if self.is_zero():
            return LaurentPoly()
        if divisor.is_monomial():
            return self * divisor.unit_inverse()
        own_content = self.monomial_content()
        div_content = divisor.monomial_content()
        dividend = self.shift(_mono_pow(own_content, -1))
        poly_divisor = divisor.shift(_mono_pow(div_content, -1))
        variables = sorted(dividend.variables() | poly_divisor.variables(), key=variable_rank)

        def lex(mono):
            return _dense_key(mono, variables)

        lead_mono = max(poly_divisor._terms, key=lex)
        lead_coeff = Fraction(poly_divisor._terms[lead_mono])
        remainder = dict(dividend._terms)
        quotient = {}
        while remainder:
            top = max(remainder, key=lex)
            ratio = _mono_mul(top, _mono_pow(lead_mono, -1))
            if any(exp < 0 for _, exp in ratio):
                return None
            factor = remainder[top] / lead_coeff
            quotient[ratio] = quotient.get(ratio, 0) + factor
            for mono, coeff in poly_divisor._terms.items():
                target = _mono_mul(ratio, mono)
                value = remainder.get(target, 0) - factor * coeff
                if value:
                    remainder[target] = value
                else:
                    remainder.pop(target, None)
        shift = _mono_mul(own_content, _mono_pow(div_content, -1))
        return LaurentPoly(quotient).shift(shift)

    def ordered_terms(self):
        """Terms in descending graded-lex order over the fixed variable order."""
        variables = sorted(self.variables(), key=variable_rank)

        def key(item):
            vec = _dense_key(item[0], variables)
            return (sum(vec), vec)

        return sorted(self._terms.items(), key=key, reverse=True)

    def to_sympy(self):
        expr = sympy.Integer(0)
        for mono, coeff in self._terms.items():
            term = sympy.Rational(Fraction(coeff).numerator, Fraction(coeff).denominator)
            for name, exp in mono:
                term *= sympy.Symbol(name) ** exp
            expr += term
        return expr

    def __str__(self):
        if self._text is None:
            if not self._terms:
                self._text = '0'
            else:
                text = ''
                for mono, coeff in self.ordered_terms():
                    piece = _term_str(mono, coeff)
                    if text and not piece.startswith('-'):
                        text += '+'
                    text += piece
                self._text = text
        return self._text

    def __repr__(self):
        return f'LaurentPoly({self})'

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.constant(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __neg__(self):
        return LaurentPoly._raw({m: -c for m, c in self._terms.items()})

    def __add__(self, other):
        if not isinstance(other, (LaurentPoly, int, Fraction)):
            return NotImplemented
        other = LaurentPoly.coerce(other)
        terms = dict(self._terms)
        for mono, coeff in other._terms.items():
            total = terms.get(mono, 0) + coeff
            if total:
                terms[mono] = _norm(total)
            else:
                terms.pop(mono, None)
        return LaurentPoly._raw(terms)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (LaurentPoly, int, Fraction)):
            return NotImplemented
        return self + (-LaurentPoly.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (LaurentPoly, int, Fraction)):
            return NotImplemented
        other = LaurentPoly.coerce(other)
        if not self._terms or not other._terms:
            return LaurentPoly()
        terms = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                terms[mono] = terms.get(mono, 0) + c1 * c2
        return LaurentPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.unit_inverse() ** (-n)
        result = LaurentPoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result


def _normalize_factor(poly):
    """
    Split poly = unit * factor.

    The unit is a single term; the factor has no monomial content and
    lex-leading coefficient 1. Returns (unit, None) when poly is a unit.
    """
    content = poly.monomial_content()
    reduced = poly.shift(_mono_pow(content, -1)) if content else poly
    if reduced.is_constant():
        return poly, None
    variables = sorted(reduced.variables(), key=variable_rank)
    lead_mono = max(reduced._terms, key=lambda m: _dense_key(m, variables))
    lead = reduced._terms[lead_mono]
    return LaurentPoly._raw({content: lead}), reduced.scale(Fraction(1) / lead)


def _cancel(num, factors):
    if len(num) > CANCEL_MAX_NUM_TERMS:
        return num, factors
    kept = {}
    for factor, mult in factors.items():
        if len(factor) <= CANCEL_MAX_FACTOR_TERMS:
            while mult > 0:
                quotient = num.exact_quotient(factor)
                if quotient is None:
                    break
                num = quotient
                mult -= 1
        if mult:
            kept[factor] = mult
    return num, kept


def _product(factors):
    result = LaurentPoly.constant(1)
    for factor, mult in factors.items():
        result = result * factor ** mult
    return result


class RatFunc:
    """
    Rational function num / prod(factor^mult).

    Denominator factors are normalized (no monomial content, leading
    coefficient 1) so units live in the numerator. A factor is cancelled
    whenever trial division shows it divides the numerator; there is no
    general gcd. Equality clears denominators over the common multiple of
    the factor multisets and compares numerators.
    """

    __slots__ = ('num', 'factors')
    __hash__ = None

    def __init__(self, num=0, den=1):
        num = LaurentPoly.coerce(num)
        den = LaurentPoly.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError('rational function with zero denominator')
        unit, factor = _normalize_factor(den)
        factors = {} if factor is None else {factor: 1}
        self._init(num * unit.unit_inverse(), factors)

    def _init(self, num, factors):
        if num.is_zero():
            self.num, self.factors = num, ()
            return
        num, factors = _cancel(num, factors)
        self.num = num
        self.factors = tuple(sorted(((f, e) for f, e in factors.items() if e > 0), key=lambda fe: str(fe[0])))

    @classmethod
    def _build(cls, num, factors):
        value = cls.__new__(cls)
        value._init(num, factors)
        return value

    @classmethod
    def from_factors(cls, num, den_factors):
        """num / prod(den_factors), keeping the denominator factored."""
        num = LaurentPoly.coerce(num)
        factors = {}
        for poly in den_factors:
            poly = LaurentPoly.coerce(poly)
            if poly.is_zero():
                raise ZeroDivisionError('zero denominator factor')
            unit, factor = _normalize_factor(poly)
            num = num * unit.unit_inverse()
            if factor is not None:
                factors[factor] = factors.get(factor, 0) + 1
        return cls._build(num, factors)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, RatFunc):
            return value
        return cls(value)

    @property
    def den(self):
        return _product(dict(self.factors))

    def is_zero(self):
        return self.num.is_zero()

    def is_constant(self):
        return not self.factors and self.num.is_constant()

    def constant_value(self):
        return self.num.constant_value()

    def free_of(self, var):
        return var not in self.num.variables() and all(var not in f.variables() for f, _ in self.factors)

    def __neg__(self):
        return RatFunc._build(-self.num, dict(self.factors))

    def __add__(self, other):
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        mine, theirs = dict(self.factors), dict(other.factors)
        common = dict(mine)
        for factor, mult in theirs.items():
            common[factor] = max(common.get(factor, 0), mult)
        num = (self.num * _product({f: e - mine.get(f, 0) for f, e in common.items()})
               + other.num * _product({f: e - theirs.get(f, 0) for f, e in common.items()}))
        return RatFunc._build(num, common)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, USeries):
            return NotImplemented
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return RatFunc(0)
        factors = dict(self.factors)
        for factor, mult in other.factors:
            factors[factor] = factors.get(factor, 0) + mult
        return RatFunc._build(self.num * other.num, factors)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError('inverse of the zero rational function')
        unit, factor = _normalize_factor(self.num)
        factors = {} if factor is None else {factor: 1}
        return RatFunc._build(self.den * unit.unit_inverse(), factors)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError('division by zero')
            return RatFunc._build(self.num.scale(Fraction(1) / other), dict(self.factors))
        return self * RatFunc.coerce(other).inverse()

    def __rtruediv__(self, other):
        return RatFunc.coerce(other) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return RatFunc(1)
        factors = {f: e * n for f, e in self.factors}
        return RatFunc._build(self.num ** n, factors)

    def __eq__(self, other):
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if self.factors == other.factors:
            return self.num == other.num
        return (self - other).num.is_zero()

    def subs(self, var, value):
        """Substitute var := value (a RatFunc free of var or any coercible value)."""
        value = RatFunc.coerce(value)
        result = _subs_poly(self.num, var, value)
        for factor, mult in self.factors:
            image = _subs_poly(factor, var, value)
            if image.is_zero():
                raise ZeroDivisionError(f'denominator factor {factor} vanishes at {var} = {value}')
            result = result * image.inverse() ** mult
        return result

    def derivative(self, var):
        result = RatFunc._build(self.num.derivative(var), dict(self.factors))
        for factor, mult in self.factors:
            slope = factor.derivative(var)
            if slope.is_zero():
                continue
            factors = dict(self.factors)
            factors[factor] = mult + 1
            result = result - RatFunc._build(self.num * slope * mult, factors)
        return result

    def evaluate(self, point):
        value = Fraction(self.num.evaluate(point))
        for factor, mult in self.factors:
            value /= Fraction(factor.evaluate(point)) ** mult
        return _norm(value)

    def to_sympy(self):
        expr = self.num.to_sympy()
        for factor, mult in self.factors:
            expr /= factor.to_sympy() ** mult
        return expr

    def _split_denominator(self, var):
        """Separate factors free of var from factors linear in var.

        Returns (scalar factors, [(factor, lead, root, mult)]) where
        factor = lead * (var - root).
        """
        scalar, poles = {}, []
        for factor, mult in self.factors:
            _, top = factor.degree_range(var)
            if top == 0:
                scalar[factor] = mult
            elif top == 1:
                parts = factor.split(var)
                lead = parts[1]
                root = RatFunc(-parts.get(0, LaurentPoly()), lead)
                poles.append((factor, lead, root, mult))
            else:
                raise ExpansionError(f'denominator factor {factor} is not linear in {var}')
        return scalar, poles

    def __str__(self):
        if not self.factors:
            return str(self.num)
        den = '*'.join(f'({f})' if e == 1 else f'({f})^{e}' for f, e in self.factors)
        return f'({self.num})/({den})'

    def __repr__(self):
        return f'RatFunc({self})'


def _subs_poly(poly, var, value):
    total = RatFunc(0)
    for exp, coeff in sorted(poly.split(var).items()):
        term = RatFunc(coeff)
        if exp:
            term = term * value ** exp
        total = total + term
    return total


class USeries:
    """
    Truncated series sum c_e u^e with RatFunc coefficients.

    powers-of-u (POWERS_OF_U): zero below trunc_lo, exact up to trunc_hi.
    powers-of-u-inverse (POWERS_OF_U_INV): zero above trunc_hi, exact down to trunc_lo.
    two-sided: exact on [trunc_lo, trunc_hi] only.
    """

    __slots__ = ('direction', 'coeffs', 'trunc_lo', 'trunc_hi')
    __hash__ = None

    def __init__(self, direction, coeffs, trunc_lo, trunc_hi):
        if direction not in DIRECTIONS:
            raise ExpansionError(f'unknown series direction {direction!r}')
        self.direction = direction
        self.trunc_lo = trunc_lo
        self.trunc_hi = trunc_hi
        self.coeffs = {e: c for e, c in sorted(coeffs.items())
                       if trunc_lo <= e <= trunc_hi and not c.is_zero()}

    def _known(self):
        lo = self.trunc_lo
        hi = self.trunc_hi
        if self.direction == POWERS_OF_U_INV:
            return lo, None
        if self.direction == POWERS_OF_U:
            return None, hi
        return lo, hi

    def coefficient(self, exp):
        if self.direction == POWERS_OF_U_INV and exp > self.trunc_hi:
            return RatFunc(0)
        if self.direction == POWERS_OF_U and exp < self.trunc_lo:
            return RatFunc(0)
        if not self.trunc_lo <= exp <= self.trunc_hi:
            raise TruncationError(
                f'coefficient of u^{exp} is outside the exact window [{self.trunc_lo}, {self.trunc_hi}]')
        return self.coeffs.get(exp, RatFunc(0))

    def window(self, lo, hi):
        """Two-sided restriction to [lo, hi]."""
        return USeries(TWO_SIDED, {e: self.coefficient(e) for e in range(lo, hi + 1)}, lo, hi)

    def shift(self, k):
        """Multiply by u^k."""
        return USeries(self.direction, {e + k: c for e, c in self.coeffs.items()},
                       self.trunc_lo + k, self.trunc_hi + k)

    def __neg__(self):
        return USeries(self.direction, {e: -c for e, c in self.coeffs.items()}, self.trunc_lo, self.trunc_hi)

    def __add__(self, other):
        if not isinstance(other, USeries):
            return NotImplemented
        if self.direction == other.direction and self.direction != TWO_SIDED:
            if self.direction == POWERS_OF_U_INV:
                lo, hi = max(self.trunc_lo, other.trunc_lo), max(self.trunc_hi, other.trunc_hi)
            else:
                lo, hi = min(self.trunc_lo, other.trunc_lo), min(self.trunc_hi, other.trunc_hi)
            direction = self.direction
        else:
            bounds = [self._known(), other._known()]
            lows = [b[0] for b in bounds if b[0] is not None]
            highs = [b[1] for b in bounds if b[1] is not None]
            lo = max(lows) if lows else min(self.trunc_lo, other.trunc_lo)
            hi = min(highs) if highs else max(self.trunc_hi, other.trunc_hi)
            direction = TWO_SIDED
        coeffs = {}
        for e in range(lo, hi + 1):
            value = self.coefficient(e) + other.coefficient(e)
            if not value.is_zero():
                coeffs[e] = value
        return USeries(direction, coeffs, lo, hi)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, USeries):
            scalar = RatFunc.coerce(other)
            return USeries(self.direction, {e: c * scalar for e, c in self.coeffs.items()},
                           self.trunc_lo, self.trunc_hi)
        if self.direction != other.direction or self.direction == TWO_SIDED:
            raise ExpansionError('only one-directional series of the same direction can be multiplied')
        if self.direction == POWERS_OF_U_INV:
            hi = self.trunc_hi + other.trunc_hi
            lo = max(self.trunc_lo + other.trunc_hi, other.trunc_lo + self.trunc_hi)
        else:
            lo = self.trunc_lo + other.trunc_lo
            hi = min(self.trunc_hi + other.trunc_lo, other.trunc_hi + self.trunc_lo)
        coeffs = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                e = a + b
                if lo <= e <= hi:
                    coeffs[e] = coeffs[e] + ca * cb if e in coeffs else ca * cb
        return USeries(self.direction, coeffs, lo, hi)

    def __rmul__(self, other):
        return self * other

    def to_dict(self):
        return {str(e): str(c) for e, c in self.coeffs.items()}

    def __repr__(self):
        return f'USeries({self.direction}, [{self.trunc_lo}, {self.trunc_hi}], {self.to_dict()})'


def _complete_homogeneous(roots, depth):
    """h_0..h_depth of the root multiset: coefficients of prod 1/(1 - r x)."""
    if depth < 0:
        return []
    h = [RatFunc(1)] + [RatFunc(0)] * depth
    for root in roots:
        for t in range(1, depth + 1):
            h[t] = h[t] + root * h[t - 1]
    return h


def expand(f, direction, lo, hi, var=SERIES_VAR):
    """
    Expand a rational function in non-negative powers of u or of u^-1.

    Args:
        f: RatFunc whose denominator factors are free of var or linear in var
        direction: POWERS_OF_U or POWERS_OF_U_INV
        lo, hi: exponent window that must be exact in the result

    Returns:
        USeries exact on [lo, hi]; for u^-1 expansions the zero region above the
        top exponent is also recorded, for u expansions the region below the bottom.
    """
    f = RatFunc.coerce(f)
    if direction not in (POWERS_OF_U, POWERS_OF_U_INV):
        raise ExpansionError(f'cannot expand in direction {direction!r}')
    if lo > hi:
        raise ExpansionError(f'empty expansion window [{lo}, {hi}]')
    if f.is_zero():
        return USeries(direction, {}, lo, hi)

    scalar, poles = f._split_denominator(var)
    prefactor = RatFunc._build(LaurentPoly.constant(1), scalar)
    roots = []
    for _, lead, root, mult in poles:
        prefactor = prefactor * RatFunc(1, lead) ** mult
        roots.extend([root] * mult)
    numerator = f.num.split(var)
    order = len(roots)

    if direction == POWERS_OF_U_INV:
        top = max(numerator) - order
        depth = max(numerator) - order - lo
        series = _complete_homogeneous(roots, depth)

        def geometric(x):
            t = -order - x
            return series[t] if 0 <= t <= depth else None

        exps = range(lo, top + 1)
        trunc_lo, trunc_hi = lo, max(hi, top)
    else:
        bottom = min(numerator)
        depth = hi - bottom
        inverse_roots = [root.inverse() for root in roots]
        series = _complete_homogeneous(inverse_roots, depth)
        sign = RatFunc(1)
        for inverse_root in inverse_roots:
            sign = sign * (-inverse_root)

        def geometric(x):
            return sign * series[x] if 0 <= x <= depth else None

        exps = range(bottom, hi + 1)
        trunc_lo, trunc_hi = min(lo, bottom), hi

    coeffs = {}
    for e in exps:
        total = RatFunc(0)
        for j, part in numerator.items():
            value = geometric(e - j)
            if value is not None and not value.is_zero():
                total = total + RatFunc(part) * value
        if not total.is_zero():
            coeffs[e] = total * prefactor
    return USeries(direction, coeffs, trunc_lo, trunc_hi)


def series_exp(ell, order):
    """exp of sum_{m>=1} ell[m] x^m as coefficients a_0..a_order (ell[0] ignored)."""
    a = [RatFunc(1)]
    for k in range(1, order + 1):
        acc = RatFunc(0)
        for j in range(1, k + 1):
            if j < len(ell) and not ell[j].is_zero():
                acc = acc + ell[j] * a[k - j] * j
        a.append(acc / k)
    return a


def series_log(p, order):
    """log of 1 + sum_{k>=1} p[k] x^k as coefficients ell_1..ell_order (index 0 is 0)."""
    ell = [RatFunc(0)]
    for m in range(1, order + 1):
        acc = RatFunc(0)
        for k in range(1, m):
            if not ell[k].is_zero():
                acc = acc + ell[k] * p[m - k] * k
        ell.append(p[m] - acc / m)
    return ell


class VirtualCharacter:
    """Finite Z-linear combination of Laurent monomials."""

    __slots__ = ('_terms',)

    def __init__(self, terms=None):
        self._terms = {mono: int(n) for mono, n in (terms or {}).items() if n}

    @classmethod
    def from_poly(cls, poly):
        poly = LaurentPoly.coerce(poly)
        terms = {}
        for mono, coeff in poly.items():
            if Fraction(coeff).denominator != 1:
                raise ValueError(f'character multiplicity {coeff} is not an integer')
            terms[mono] = int(coeff)
        return cls(terms)

    @classmethod
    def from_monomials(cls, monomials):
        total = LaurentPoly()
        for mono in monomials:
            total = total + mono
        return cls.from_poly(total)

    def to_poly(self):
        return LaurentPoly(dict(self._terms))

    def items(self):
        return self._terms.items()

    def monomials(self):
        """Monomials with multiplicity, as LaurentPoly units, in canonical order."""
        out = []
        for mono, n in sorted(self._terms.items(), key=lambda mn: _mono_str(mn[0])):
            out.extend([LaurentPoly._raw({mono: 1})] * abs(n))
        return out

    def adams(self, m):
        return VirtualCharacter({_mono_pow(mono, m): n for mono, n in self._terms.items()})

    def dual(self):
        return self.adams(-1)

    def rank(self):
        return sum(self._terms.values())

    def determinant(self):
        pairs = []
        for mono, n in self._terms.items():
            pairs.extend(_mono_pow(mono, n))
        return LaurentPoly._raw({_mono(pairs): 1})

    def __add__(self, other):
        return VirtualCharacter.from_poly(self.to_poly() + _as_poly(other))

    __radd__ = __add__

    def __sub__(self, other):
        return VirtualCharacter.from_poly(self.to_poly() - _as_poly(other))

    def __neg__(self):
        return VirtualCharacter({m: -n for m, n in self._terms.items()})

    def __mul__(self, other):
        return VirtualCharacter.from_poly(self.to_poly() * _as_poly(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VirtualCharacter):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __str__(self):
        return str(self.to_poly())

    def __repr__(self):
        return f'VirtualCharacter({self})'


def _as_poly(value):
    if isinstance(value, VirtualCharacter):
        return value.to_poly()
    return LaurentPoly.coerce(value)


def lambda_series(character, direction, trunc):
    """
    Lambda_{-x}(E) = prod_e (1 - x e)^{n_e} to order trunc, x = u or u^-1.

    Computed from Adams operations by Newton's identity
    a_k = -(1/k) sum_{j=1}^{k} psi^j(E) a_{k-j}.
    """
    if trunc < 0:
        raise ValueError(f'truncation order must be non-negative, got {trunc}')
    if direction not in (POWERS_OF_U, POWERS_OF_U_INV):
        raise ExpansionError(f'cannot build a lambda series in direction {direction!r}')
    powers = [None] + [character.adams(j).to_poly() for j in range(1, trunc + 1)]
    a = [LaurentPoly.constant(1)]
    for k in range(1, trunc + 1):
        acc = LaurentPoly()
        for j in range(1, k + 1):
            acc = acc + powers[j] * a[k - j]
        a.append(acc.scale(Fraction(-1, k)))
    if direction == POWERS_OF_U:
        return USeries(direction, {k: RatFunc(c) for k, c in enumerate(a)}, 0, trunc)
    return USeries(direction, {-k: RatFunc(c) for k, c in enumerate(a)}, -trunc, 0)


def residue(f, pole, var=SERIES_VAR):
    """
    Residue of f at var = pole (a RatFunc free of var) or at INFINITY.

    Poles of order above 2 are rejected; a point that is not a pole gives 0.
    """
    f = RatFunc.coerce(f)
    if isinstance(pole, str):
        if pole != INFINITY:
            raise ExpansionError(f'unknown pole {pole!r}')
        return -expand(f, POWERS_OF_U_INV, -1, -1, var).coefficient(-1)
    pole = RatFunc.coerce(pole)
    vanishing, rest = [], {}
    for factor, mult in f.factors:
        if _subs_poly(factor, var, pole).is_zero():
            vanishing.append((factor, mult))
        else:
            rest[factor] = mult
    num = f.num
    order = sum(mult for _, mult in vanishing)
    if pole.is_zero():
        # powers of var in the denominator live in num as negative exponents
        zero_order = -num.degree_range(var)[0]
        if zero_order > 0:
            num = num.shift(((var, zero_order),))
            order += zero_order
    if order == 0:
        return RatFunc(0)
    if order > 2:
        raise PoleOrderError(f'pole of order {order} at {var} = {pole}')
    g = RatFunc._build(num, rest)
    for factor, mult in vanishing:
        if factor.degree_range(var)[1] != 1:
            raise ExpansionError(f'denominator factor {factor} is not linear in {var}')
        g = g * RatFunc(1, factor.split(var)[1]) ** mult
    if order == 1:
        return g.subs(var, pole)
    return g.derivative(var).subs(var, pole)


def finite_poles(f, var=SERIES_VAR):
    """Distinct finite poles of f in var, including 0 when var divides the denominator."""
    f = RatFunc.coerce(f)
    _, linear = f._split_denominator(var)
    poles = []
    if f.num.degree_range(var)[0] < 0:
        poles.append(RatFunc(0))
    for _, _, root, _ in linear:
        if all(root != seen for seen in poles):
            poles.append(root)
    return poles


def residue_sum(f, var=SERIES_VAR):
    """Sum of the residues of f over its finite poles and infinity; 0 for every admissible f."""
    total = residue(f, INFINITY, var)
    for pole in finite_poles(f, var):
        total = total + residue(f, pole, var)
    return total


# Frequently used constants
Q = LaurentPoly.var('q')
U = LaurentPoly.var(SERIES_VAR)


def chi(s):
    """Fundamental character of the s-th framing torus factor (1-based)."""
    return LaurentPoly.var(f'chi{s}')


def q_power(n):
    return LaurentPoly.var('q', n) if n else LaurentPoly.constant(1)


def q_integer(m):
    """[m]_q = (q^m - q^-m)/(q - q^-1) as a Laurent polynomial."""
    if m == 0:
        return LaurentPoly()
    if m < 0:
        return -q_integer(-m)
    total = LaurentPoly()
    for j in range(m):
        total = total + q_power(m - 1 - 2 * j)
    return total


@lru_cache(maxsize=None)
def q_binomial(n, k):
    """Symmetric Gaussian binomial [n choose k]_q."""
    if k < 0 or k > n:
        return LaurentPoly()
    if k == 0 or k == n:
        return LaurentPoly.constant(1)
    return q_binomial(n - 1, k) * q_power(-k) + q_binomial(n - 1, k - 1) * q_power(n - k)
