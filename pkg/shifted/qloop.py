"""
Drinfeld presentations of (0,-w)-shifted quantum loop groups and of the
shifted toroidal gl_1 algebra, and a checker that verifies every relation
on a representation given by operator tables.

Mode conventions: psi^{+/-}_{i,k} is the coefficient of u^{-k} in psi^{+/-}_i(u),
so psi+ lives on k >= 0 and psi- on k <= -w_i. For the simply-laced kind both
x^{+/-}_i(u) are sum_n x_{i,n} u^{-n}; for the toroidal kind x^{+/-}(u) is
sum_n x_n u^{-/+n}.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations

from logger_config import setup_logger
from shifted.exact_algebra import (
    POWERS_OF_U, POWERS_OF_U_INV, Q, U, LaurentPoly, RatFunc, USeries,
    expand, q_binomial, q_integer, q_power, series_log,
)
from shifted.exceptions import NonInvertibleError, PreconditionError, QuiverError
from shifted.quiver_core import SUPPORT_I, DimVec

logger = setup_logger(__name__)

SIMPLY_LACED = 'shifted_simply_laced'
TOROIDAL = 'shifted_toroidal_gl1'
KINDS = (SIMPLY_LACED, TOROIDAL)

X_PLUS = 'x+'
X_MINUS = 'x-'
PSI_PLUS = 'psi+'
PSI_MINUS = 'psi-'
H = 'h'

PASS = 'pass'
FAIL = 'fail'
UNDETERMINED = 'undetermined'

V = LaurentPoly.var('v')
T = LaurentPoly.var('t')


def toroidal_parameters():
    """q_1 = q t^-1, q_2 = q t, q_3 = q^-2."""
    return (Q * T ** -1, Q * T, q_power(-2))


@dataclass(frozen=True)
class PresentationSpec:
    kind: str
    quiver: object
    shift: DimVec

    def __post_init__(self):
        if self.kind not in KINDS:
            raise QuiverError(f'unknown presentation kind {self.kind!r}')
        if self.shift.support != SUPPORT_I:
            raise QuiverError('the shift is an ungraded dimension vector')
        if self.kind == TOROIDAL and self.quiver.rank() != 1:
            raise QuiverError('the toroidal presentation lives on the Jordan quiver')

    @property
    def vertices(self):
        return self.quiver.cartan_vertices

    def w(self, i):
        return self.shift.get(i)

    def series_sign(self, sign):
        """Exponent sign s with x^sign(u) = sum_n x_n u^(s n)."""
        if self.kind == TOROIDAL and sign == X_MINUS:
            return 1
        return -1

    def _roots(self, i, j):
        """Monomials p with g(u) = prod (u - p)/(p u - 1)."""
        if self.kind == TOROIDAL:
            return [p.unit_inverse() for p in toroidal_parameters()]
        return [q_power(self.quiver.c(i, j))]

    def structure_function(self, i, j, power=1):
        """g_ij(u)^power as a RatFunc in u."""
        num, den = [], []
        for p in self._roots(i, j):
            num.append(U - p)
            den.append(p * U - 1)
        if power < 0:
            num, den = den, num
        top = LaurentPoly.constant(1)
        for poly in num:
            top = top * poly
        return RatFunc.from_factors(top, den)

    def structure_parts(self, i, j):
        """(N, D) in u, v with g_ij(u/v) = N/D."""
        num = LaurentPoly.constant(1)
        den = LaurentPoly.constant(1)
        for p in self._roots(i, j):
            num = num * (U - p * V)
            den = den * (p * U - V)
        return num, den

    def commutator_prefactor(self):
        if self.kind == TOROIDAL:
            value = LaurentPoly.constant(1)
            for p in toroidal_parameters():
                value = value * (1 - p)
            return RatFunc(value)
        return RatFunc(Q - Q ** -1)

    def relation_prefix(self):
        return 'B' if self.kind == TOROIDAL else 'A'


class SparseMatrix:
    """Square matrix with RatFunc entries stored by column."""

    __slots__ = ('size', 'columns')

    def __init__(self, size, entries=None):
        self.size = size
        self.columns = {}
        for (row, col), value in (entries or {}).items():
            value = RatFunc.coerce(value)
            if not value.is_zero():
                self.columns.setdefault(col, {})[row] = value

    def entry(self, row, col):
        return self.columns.get(col, {}).get(row, RatFunc(0))

    def entries(self):
        return {(r, c): v for c, column in self.columns.items() for r, v in column.items()}

    def apply(self, vector):
        out = {}
        for col, coeff in vector.items():
            for row, value in self.columns.get(col, {}).items():
                term = value * coeff
                out[row] = out[row] + term if row in out else term
        return {r: v for r, v in out.items() if not v.is_zero()}

    def is_diagonal(self):
        return all(set(column) <= {col} for col, column in self.columns.items())

    def with_entry(self, row, col, value):
        entries = self.entries()
        entries[(row, col)] = value
        return SparseMatrix(self.size, entries)


@dataclass
class OperatorTable:
    """
    Finite-dimensional representation given by generator matrices.

    Generator keys are (kind, vertex, mode) with kind in x+, x-, psi+, psi-, h.
    weights[b] is the weight of basis vector b as a tuple over vertices;
    weight_cap, when set, is the largest total weight kept in a truncated module.
    """
    basis: tuple
    weights: tuple
    vertices: tuple
    generators: dict = field(default_factory=dict)
    weight_cap: int = None

    def __len__(self):
        return len(self.basis)

    def label(self, index):
        return str(self.basis[index])

    def weight_shift(self, key):
        kind, vertex, _ = key
        if kind not in (X_PLUS, X_MINUS):
            return None
        shift = [0] * len(self.vertices)
        shift[self.vertices.index(vertex)] = 1 if kind == X_PLUS else -1
        return tuple(shift)

    def replace(self, key, matrix):
        generators = dict(self.generators)
        generators[key] = matrix
        return OperatorTable(self.basis, self.weights, self.vertices, generators, self.weight_cap)


@dataclass(frozen=True)
class RelationCheck:
    name: str
    family: str
    statement: str
    vertices: tuple
    convention: str = None


@dataclass(frozen=True, eq=False)
class RelationInstance:
    relation: str
    indices: tuple
    lhs: tuple = ()
    rhs: tuple = ()
    invertible: tuple = ()


@dataclass(frozen=True)
class HSeries:
    """h_{i,+m} and h_{i,-m} for m = 1..order, raw and divided by [m]_q."""
    plus: tuple
    minus: tuple
    plus_normalized: tuple
    minus_normalized: tuple


def relation_catalogue(spec):
    """Symbolic relations of the presentation, one entry per relation and vertex tuple."""
    prefix = spec.relation_prefix()
    vertices = spec.vertices
    pairs = [(i, j) for i in vertices for j in vertices]
    entries = []
    for i in vertices:
        entries.append(RelationCheck(f'{prefix}.2', 'mode',
                                     f'psi+_{{{i},0}} and psi-_{{{i},{-spec.w(i)}}} are invertible', (i,)))
        entries.append(RelationCheck(f'{prefix}.2c', 'mode',
                                     f'psi+_{{{i},0}} psi-_{{{i},{-spec.w(i)}}} is central', (i,)))
    for i, j in pairs:
        entries.append(RelationCheck(f'{prefix}.3', 'series',
                                     f'psi^a_{i}(u) psi^b_{j}(v) = psi^b_{j}(v) psi^a_{i}(u)', (i, j)))
    g = 'g(u/v)' if spec.kind == TOROIDAL else 'g_{ij}(u/v)'
    for i, j in pairs:
        entries.append(RelationCheck(
            f'{prefix}.4', 'series', f'x^a_{j}(u) psi^b_{i}(v) = psi^b_{i}(v) x^a_{j}(u) {g}^a',
            (i, j), 'expanded in powers of v^-1 for psi+ and of v for psi-'))
        if spec.kind == SIMPLY_LACED:
            c = spec.quiver.c(i, j)
            entries.append(RelationCheck(
                f'{prefix}.4a', 'mode',
                f'x^a_{{{j},n}} psi^b_{{{i},lead}} = q^(b a {c}) psi^b_{{{i},lead}} x^a_{{{j},n}}', (i, j)))
            entries.append(RelationCheck(
                f'{prefix}.4b', 'mode', f'[h_{{{i},m}}, x^a_{{{j},n}}] = -a [{c} m]_q x^a_{{{j},n+m}} / m',
                (i, j), 'sign fixed by the exponential definition of h'))
        else:
            entries.append(RelationCheck(
                f'{prefix}.4a', 'mode', 'x^a_n psi^b_lead = psi^b_lead x^a_n', (i, j)))
    for i, j in pairs:
        entries.append(RelationCheck(
            f'{prefix}.5', 'series', f'x^a_{i}(u) x^a_{j}(v) = x^a_{j}(v) x^a_{i}(u) {g}^a',
            (i, j), 'checked with denominators cleared: D(u,v) x(u) x(v) = N(u,v) x(v) x(u)'))
    if spec.kind == TOROIDAL:
        entries.append(RelationCheck(f'{prefix}.6', 'mode', '[x^a_m, [x^a_{m+1}, x^a_{m-1}]] = 0', tuple(vertices)))
        entries.append(RelationCheck(
            f'{prefix}.7', 'series',
            '(1-q_1)(1-q_2)(1-q_3)[x+(u), x-(v)] = delta(u/v)(psi+(u) - psi-(u))', tuple(vertices)))
    else:
        for i, j in pairs:
            entries.append(RelationCheck(
                f'{prefix}.6', 'series',
                f'(q-q^-1)[x+_{i}(u), x-_{j}(v)] = delta_{{{i}{j}}} delta(u/v)(psi+_{i}(u) - psi-_{i}(u))', (i, j)))
        for i, j in pairs:
            c = spec.quiver.c(i, j)
            if i != j and c < 0:
                entries.append(RelationCheck(
                    f'{prefix}.7', 'series',
                    f'sum_sigma sum_k (-1)^k [{1 - c} k]_q x_{i}(u_s1)..x_{i}(u_sk) x_{j}(v) '
                    f'x_{i}(u_s(k+1))..x_{i}(u_s{1 - c}) = 0',
                    (i, j), 'standard simply-laced symmetrized form'))
    return entries


def integral_generators(spec, n_window, max_power=2):
    """Names of the generators of the integral form, for modes |n| <= n_window."""
    names = []
    for i in spec.vertices:
        lead = -spec.w(i)
        names += [f'psi+_{{{i},0}}', f'(psi+_{{{i},0}})^-1',
                  f'psi-_{{{i},{lead}}}', f'(psi-_{{{i},{lead}}})^-1']
        for m in range(1, n_window + 1):
            names += [f'h_{{{i},{m}}}/[{m}]_q', f'h_{{{i},{-m}}}/[{m}]_q']
        for n in range(-n_window, n_window + 1):
            for m in range(1, max_power + 1):
                names += [f'(x+_{{{i},{n}}})^[{m}]', f'(x-_{{{i},{n}}})^[{m}]']
    return names


def hseries_from_psi(psi_plus, psi_minus, shift_value, order):
    """
    Invert psi+(u) = psi+_0 exp((q-q^-1) sum h_m u^-m) and
    psi-(u) = psi-_lead u^shift_value exp(-(q-q^-1) sum h_-m u^m).

    Args:
        psi_plus: USeries in powers of u^-1 exact on [-order, 0]
        psi_minus: USeries in powers of u exact on [shift_value, shift_value + order], or None
        shift_value: exponent of the leading term of psi-
        order: number of h modes per sign

    Returns:
        HSeries
    """
    denominator = RatFunc(Q - Q ** -1)

    def logs(series, start, step):
        lead = series.coefficient(start)
        if lead.is_zero():
            raise NonInvertibleError(f'leading coefficient of psi at u^{start} is zero')
        inverse = lead.inverse()
        p = [RatFunc(1)] + [series.coefficient(start + step * k) * inverse for k in range(1, order + 1)]
        return series_log(p, order)

    plus, plus_norm = [], []
    ell = logs(psi_plus, 0, -1)
    for m in range(1, order + 1):
        plus.append(ell[m] / denominator)
        plus_norm.append(ell[m] / RatFunc(q_power(m) - q_power(-m)))
    minus, minus_norm = [], []
    if psi_minus is not None:
        ell = logs(psi_minus, shift_value, 1)
        for m in range(1, order + 1):
            minus.append(-ell[m] / denominator)
            minus_norm.append(-ell[m] / RatFunc(q_power(m) - q_power(-m)))
    return HSeries(tuple(plus), tuple(minus), tuple(plus_norm), tuple(minus_norm))


def psi_modes(spec, i, sign, depth):
    """Mode indices of psi^sign_i kept in a table of the given depth."""
    if sign == PSI_PLUS:
        return range(0, depth + 1)
    lead = -spec.w(i)
    return range(lead - depth, lead + 1)


def highest_weight_line(spec, lweights, n_window, psi_depth=None):
    """
    One-dimensional table with x^{+/-} = 0 and psi^{+/-}_i(u) = Psi_i(u).

    Args:
        lweights: vertex -> RatFunc Psi_i(u); its expansion in powers of u must
            start at u^{w_i} for the psi- modes to respect the shift
        n_window: x modes |n| <= n_window are present (as zero matrices)
        psi_depth: psi modes kept; defaults to 2 n_window + max w
    """
    if psi_depth is None:
        psi_depth = 2 * n_window + max([abs(spec.w(i)) for i in spec.vertices] + [0])
    generators = {}
    zero = SparseMatrix(1)
    for i in spec.vertices:
        for n in range(-n_window, n_window + 1):
            generators[(X_PLUS, i, n)] = zero
            generators[(X_MINUS, i, n)] = zero
        weight = RatFunc.coerce(lweights.get(i, RatFunc(1)))
        lead = -spec.w(i)
        plus = expand(weight, POWERS_OF_U_INV, -psi_depth, 0)
        if plus.trunc_hi > 0 and any(e > 0 for e in plus.coeffs):
            raise PreconditionError(f'Psi_{i}(u) has positive powers of u in its u^-1 expansion')
        minus = expand(weight, POWERS_OF_U, -lead, -lead + psi_depth)
        if any(e < -lead for e in minus.coeffs):
            raise PreconditionError(f'Psi_{i}(u) expanded in u starts below u^{spec.w(i)}')
        for k in psi_modes(spec, i, PSI_PLUS, psi_depth):
            generators[(PSI_PLUS, i, k)] = SparseMatrix(1, {(0, 0): plus.coefficient(-k)})
        for k in psi_modes(spec, i, PSI_MINUS, psi_depth):
            generators[(PSI_MINUS, i, k)] = SparseMatrix(1, {(0, 0): minus.coefficient(-k)})
    zero_weight = tuple(0 for _ in spec.vertices)
    return OperatorTable(('v',), (zero_weight,), tuple(spec.vertices), generators)


def _with_h_generators(spec, table, n_window):
    """Add diagonal h_{i,+/-m} matrices computed from diagonal psi tables."""
    generators = dict(table.generators)
    for i in spec.vertices:
        lead = -spec.w(i)
        plus_keys = [(PSI_PLUS, i, k) for k in range(0, n_window + 1)]
        minus_keys = [(PSI_MINUS, i, k) for k in range(lead - n_window, lead + 1)]
        needed = plus_keys + minus_keys
        if any(key not in generators or not generators[key].is_diagonal() for key in needed):
            logger.debug(f'No h modes for vertex {i}: psi data missing or not diagonal')
            continue
        plus_h = {m: {} for m in range(1, n_window + 1)}
        minus_h = {m: {} for m in range(1, n_window + 1)}
        for b in range(len(table)):
            plus = USeries(POWERS_OF_U_INV, {-k: generators[(PSI_PLUS, i, k)].entry(b, b)
                                             for k in range(0, n_window + 1)}, -n_window, 0)
            minus = USeries(POWERS_OF_U, {-k: generators[(PSI_MINUS, i, k)].entry(b, b)
                                          for k in range(lead - n_window, lead + 1)},
                            -lead, -lead + n_window)
            try:
                series = hseries_from_psi(plus, minus, -lead, n_window)
            except NonInvertibleError:
                break
            for m in range(1, n_window + 1):
                plus_h[m][(b, b)] = series.plus[m - 1]
                minus_h[m][(b, b)] = series.minus[m - 1]
        else:
            for m in range(1, n_window + 1):
                generators[(H, i, m)] = SparseMatrix(len(table), plus_h[m])
                generators[(H, i, -m)] = SparseMatrix(len(table), minus_h[m])
    return OperatorTable(table.basis, table.weights, table.vertices, generators, table.weight_cap)


def _x(sign, i, n):
    return (sign, i, n)


def _in_support(spec, sign, i, k):
    if sign == PSI_PLUS:
        return k >= 0
    return k <= -spec.w(i)


def _psi_key_list(spec, n_window):
    keys = []
    for i in spec.vertices:
        keys += [(PSI_PLUS, i, k) for k in psi_modes(spec, i, PSI_PLUS, n_window)]
        keys += [(PSI_MINUS, i, k) for k in psi_modes(spec, i, PSI_MINUS, n_window)]
    return keys


def _one():
    return RatFunc(1)


def _instances(spec, n_window, wanted):
    prefix = spec.relation_prefix()
    window = range(-n_window, n_window + 1)
    vertices = spec.vertices
    out = []

    def want(name):
        return wanted is None or name in wanted

    if want(f'{prefix}.2'):
        for i in vertices:
            out.append(RelationInstance(f'{prefix}.2', (('i', i),),
                                        invertible=((PSI_PLUS, i, 0), (PSI_MINUS, i, -spec.w(i)))))

    if want(f'{prefix}.2c'):
        for i in vertices:
            central = ((PSI_PLUS, i, 0), (PSI_MINUS, i, -spec.w(i)))
            for j in vertices:
                for sign in (X_PLUS, X_MINUS):
                    for n in window:
                        g = _x(sign, j, n)
                        out.append(RelationInstance(
                            f'{prefix}.2c', (('i', i), ('generator', f'{sign}_{{{j},{n}}}')),
                            lhs=((_one(), central + (g,)),), rhs=((_one(), (g,) + central),)))

    if want(f'{prefix}.3'):
        keys = _psi_key_list(spec, n_window)
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                first, second = keys[a], keys[b]
                out.append(RelationInstance(
                    f'{prefix}.3', (('first', _key_text(first)), ('second', _key_text(second))),
                    lhs=((_one(), (first, second)),), rhs=((_one(), (second, first)),)))

    expansions = {}

    def structure_series(i, j, x_sign, psi_sign):
        key = (i, j, x_sign, psi_sign)
        if key not in expansions:
            g = spec.structure_function(i, j, 1 if x_sign == X_PLUS else -1)
            if psi_sign == PSI_PLUS:
                expansions[key] = expand(g, POWERS_OF_U, 0, n_window)
            else:
                expansions[key] = expand(g, POWERS_OF_U_INV, -n_window, 0)
        return expansions[key]

    if want(f'{prefix}.4') or want(f'{prefix}.4a'):
        for x_sign in (X_PLUS, X_MINUS):
            s = spec.series_sign(x_sign)
            for psi_sign in (PSI_PLUS, PSI_MINUS):
                for i in vertices:
                    for j in vertices:
                        series = structure_series(i, j, x_sign, psi_sign)
                        lead = 0 if psi_sign == PSI_PLUS else -spec.w(i)
                        for n in window:
                            for k in psi_modes(spec, i, psi_sign, n_window):
                                if psi_sign == PSI_PLUS:
                                    shifts = range(0, k + 1)
                                else:
                                    shifts = range(k + spec.w(i), 1)
                                rhs = []
                                for e in shifts:
                                    gamma = series.coefficient(e)
                                    if not gamma.is_zero():
                                        rhs.append((gamma, ((psi_sign, i, k - e), _x(x_sign, j, n - s * e))))
                                indices = (('x', f'{x_sign}_{{{j},{n}}}'), ('psi', f'{psi_sign}_{{{i},{k}}}'))
                                lhs = ((_one(), (_x(x_sign, j, n), (psi_sign, i, k))),)
                                if want(f'{prefix}.4'):
                                    out.append(RelationInstance(f'{prefix}.4', indices, lhs=lhs, rhs=tuple(rhs)))
                                if k == lead and want(f'{prefix}.4a'):
                                    out.append(RelationInstance(f'{prefix}.4a', indices, lhs=lhs, rhs=tuple(rhs)))

    if spec.kind == SIMPLY_LACED and want(f'{prefix}.4b'):
        for x_sign in (X_PLUS, X_MINUS):
            a = 1 if x_sign == X_PLUS else -1
            for i in vertices:
                for j in vertices:
                    c = spec.quiver.c(i, j)
                    for m in window:
                        if m == 0:
                            continue
                        coeff = RatFunc(q_integer(m * c).scale(Fraction(-a, m)))
                        for n in window:
                            h = (H, i, m)
                            x = _x(x_sign, j, n)
                            rhs = () if coeff.is_zero() else ((coeff, (_x(x_sign, j, n + m),)),)
                            out.append(RelationInstance(
                                f'{prefix}.4b', (('h', f'h_{{{i},{m}}}'), ('x', f'{x_sign}_{{{j},{n}}}')),
                                lhs=((_one(), (h, x)), (RatFunc(-1), (x, h))), rhs=rhs))

    if want(f'{prefix}.5'):
        for x_sign in (X_PLUS, X_MINUS):
            s = spec.series_sign(x_sign)
            for i in vertices:
                for j in vertices:
                    num, den = spec.structure_parts(i, j)
                    left, right = (den, num) if x_sign == X_PLUS else (num, den)
                    for mode_i in window:
                        for mode_j in window:
                            e1, e2 = s * mode_i, s * mode_j
                            lhs = _cleared_side(left, e1, e2, s, x_sign, i, j, swap=False)
                            rhs = _cleared_side(right, e1, e2, s, x_sign, i, j, swap=True)
                            out.append(RelationInstance(
                                f'{prefix}.5',
                                (('sign', x_sign), ('first', f'{i}:{mode_i}'), ('second', f'{j}:{mode_j}')),
                                lhs=lhs, rhs=rhs))

    if spec.kind == TOROIDAL and want(f'{prefix}.6'):
        for x_sign in (X_PLUS, X_MINUS):
            for i in vertices:
                for m in window:
                    xm, xp, xl = _x(x_sign, i, m), _x(x_sign, i, m + 1), _x(x_sign, i, m - 1)
                    lhs = ((_one(), (xm, xp, xl)), (RatFunc(-1), (xm, xl, xp)),
                           (RatFunc(-1), (xp, xl, xm)), (_one(), (xl, xp, xm)))
                    out.append(RelationInstance(f'{prefix}.6', (('sign', x_sign), ('m', m)), lhs=lhs, rhs=()))

    commutator = f'{prefix}.7' if spec.kind == TOROIDAL else f'{prefix}.6'
    if want(commutator):
        prefactor = spec.commutator_prefactor()
        s_minus = spec.series_sign(X_MINUS)
        for i in vertices:
            for j in vertices:
                if spec.kind == TOROIDAL and i != j:
                    continue
                for m in window:
                    for n in window:
                        plus, minus = _x(X_PLUS, i, m), _x(X_MINUS, j, n)
                        lhs = ((prefactor, (plus, minus)), (-prefactor, (minus, plus)))
                        rhs = []
                        if i == j:
                            k = m - s_minus * n
                            if _in_support(spec, PSI_PLUS, i, k):
                                rhs.append((_one(), ((PSI_PLUS, i, k),)))
                            if _in_support(spec, PSI_MINUS, i, k):
                                rhs.append((RatFunc(-1), ((PSI_MINUS, i, k),)))
                        out.append(RelationInstance(
                            commutator, (('plus', f'{i}:{m}'), ('minus', f'{j}:{n}')), lhs=lhs, rhs=tuple(rhs)))

    if spec.kind == SIMPLY_LACED and want(f'{prefix}.7'):
        for x_sign in (X_PLUS, X_MINUS):
            for i in vertices:
                for j in vertices:
                    c = spec.quiver.c(i, j)
                    if i == j or c >= 0:
                        continue
                    size = 1 - c
                    for modes in combinations_with_replacement(window, size):
                        for m in window:
                            lhs = _serre_terms(x_sign, i, j, modes, m, size)
                            out.append(RelationInstance(
                                f'{prefix}.7',
                                (('sign', x_sign), ('i', i), ('j', j), ('modes', list(modes)), ('m', m)),
                                lhs=lhs, rhs=()))
    return out


def _cleared_side(poly, e1, e2, s, x_sign, i, j, swap):
    """Coefficient of u^e1 v^e2 in poly(u,v) x_i(u) x_j(v) (or x_j(v) x_i(u) when swap)."""
    terms = []
    for mono, coeff in poly.items():
        exps = dict(mono)
        alpha, beta = exps.get('u', 0), exps.get('v', 0)
        rest = LaurentPoly({tuple(item for item in mono if item[0] not in ('u', 'v')): coeff})
        first = _x(x_sign, i, s * (e1 - alpha))
        second = _x(x_sign, j, s * (e2 - beta))
        word = (second, first) if swap else (first, second)
        terms.append((RatFunc(rest), word))
    return tuple(terms)


def _serre_terms(x_sign, i, j, modes, m, size):
    terms = []
    for order in permutations(modes):
        for k in range(size + 1):
            coeff = q_binomial(size, k) * (-1) ** k
            word = tuple(_x(x_sign, i, n) for n in order[:k]) + (_x(x_sign, j, m),) \
                + tuple(_x(x_sign, i, n) for n in order[k:])
            terms.append((RatFunc(coeff), word))
    return tuple(terms)


def _key_text(key):
    kind, vertex, mode = key
    return f'{kind}_{{{vertex},{mode}}}'


class _Evaluator:
    """Applies generator words to basis vectors, with suffix caching."""

    def __init__(self, table):
        self.table = table
        self.cache = {}

    def fits(self, word, col):
        cap = self.table.weight_cap
        if cap is None:
            return True
        weight = list(self.table.weights[col])
        for key in reversed(word):
            shift = self.table.weight_shift(key)
            if shift is None:
                continue
            weight = [a + b for a, b in zip(weight, shift)]
            if sum(weight) > cap:
                return False
        return True

    def apply(self, word, col):
        cache_key = (word, col)
        if cache_key in self.cache:
            return self.cache[cache_key]
        if not word:
            vector = {col: RatFunc(1)}
        else:
            vector = self.table.generators[word[0]].apply(self.apply(word[1:], col))
        self.cache[cache_key] = vector
        return vector

    def side(self, terms, col):
        total = {}
        for coeff, word in terms:
            for row, value in self.apply(word, col).items():
                term = coeff * value
                total[row] = total[row] + term if row in total else term
        return total


def _check_instance(instance, table, evaluator):
    entry = {'relation': instance.relation, 'indices': dict(instance.indices)}
    if instance.invertible:
        for key in instance.invertible:
            if key not in table.generators:
                entry['status'] = UNDETERMINED
                return entry
        for key in instance.invertible:
            matrix = table.generators[key]
            if not matrix.is_diagonal():
                entry.update(status=FAIL, witness={'generator': _key_text(key), 'reason': 'not diagonal'})
                return entry
            for b in range(len(table)):
                if matrix.entry(b, b).is_zero():
                    entry.update(status=FAIL, witness={'generator': _key_text(key), 'basis': table.label(b),
                                                       'reason': 'zero diagonal entry'})
                    return entry
        entry['status'] = PASS
        return entry

    words = [word for _, word in instance.lhs + instance.rhs]
    missing = sorted({key for word in words for key in word if key not in table.generators})
    if missing:
        entry['status'] = UNDETERMINED
        return entry
    columns = [b for b in range(len(table)) if all(evaluator.fits(word, b) for word in words)]
    if not columns:
        entry['status'] = UNDETERMINED
        return entry
    for b in columns:
        lhs = evaluator.side(instance.lhs, b)
        rhs = evaluator.side(instance.rhs, b)
        for row in sorted(set(lhs) | set(rhs)):
            left = lhs.get(row, RatFunc(0))
            right = rhs.get(row, RatFunc(0))
            if not (left - right).is_zero():
                entry.update(status=FAIL, witness={
                    'basis': table.label(b), 'row': table.label(row), 'lhs': str(left), 'rhs': str(right)})
                return entry
    entry['status'] = PASS
    return entry


@dataclass
class RelationReport:
    entries: list

    def counts(self):
        totals = {PASS: 0, FAIL: 0, UNDETERMINED: 0}
        for entry in self.entries:
            totals[entry['status']] += 1
        return totals

    def failures(self):
        return [entry for entry in self.entries if entry['status'] == FAIL]

    def by_relation(self, name):
        return [entry for entry in self.entries if entry['relation'] == name]


def check_relations(spec, rep, n_window, relations=None, threads=1):
    """
    Verify the relations of spec on the operator table rep.

    Every instance with mode indices in [-n_window, n_window] (psi modes in the
    matching supports) is evaluated exactly on each basis vector where all of
    its words stay inside the table's weight cap. An instance needing a
    generator the table does not carry is undetermined.

    Args:
        spec: PresentationSpec
        rep: OperatorTable
        n_window: mode window
        relations: optional iterable of relation names to restrict to
        threads: worker cap

    Returns:
        RelationReport
    """
    wanted = set(relations) if relations else None
    instances = _instances(spec, n_window, wanted)
    if wanted is None or f'{spec.relation_prefix()}.4b' in wanted:
        rep = _with_h_generators(spec, rep, n_window)
    logger.info(f'Checking {len(instances)} relation instances on a {len(rep)}-dimensional table')
    evaluator = _Evaluator(rep)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(lambda inst: _check_instance(inst, rep, evaluator), instances))
    else:
        entries = [_check_instance(inst, rep, evaluator) for inst in instances]
    report = RelationReport(entries)
    counts = report.counts()
    logger.info(f'Relations: {counts[PASS]} pass, {counts[FAIL]} fail, {counts[UNDETERMINED]} undetermined')
    return report
