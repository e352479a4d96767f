"""
The A1 fixed-point representation on the K-theory of Quot schemes.

Basis vectors are tuples lambda in N^w (one part per framing torus factor).
A^+ adds a box to one part, A^- removes one; matrix coefficients, the
rational function phi_lambda and the psi-series are exact RatFuncs in
q and chi1..chiw.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb

from logger_config import setup_logger
from shifted.exact_algebra import (
    POWERS_OF_U, POWERS_OF_U_INV, Q, U, LaurentPoly, RatFunc, USeries, VirtualCharacter,
    chi, expand, lambda_series, q_integer, q_power, residue, series_exp,
)
from shifted.exceptions import PreconditionError
from shifted.qloop import PSI_MINUS, PSI_PLUS, X_MINUS, X_PLUS, OperatorTable, SparseMatrix

logger = setup_logger(__name__)

A1_VERTEX = '1'
PLUS = '+'
MINUS = '-'


def compositions(total, parts):
    """Weak compositions of total into parts non-negative integers, in lexicographically ascending order."""
    if parts <= 0:
        return [] if total else [()]
    out = []
    for bars in combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        out.append(tuple(edges[r + 1] - edges[r] - 1 for r in range(parts)))
    return out


@dataclass(frozen=True)
class Lambda:
    """Torus fixed point of the A1 Quot scheme of weight |parts|."""
    parts: tuple

    def __post_init__(self):
        if any(p < 0 for p in self.parts):
            raise PreconditionError(f'fixed point labels are non-negative, got {self.parts}')
        object.__setattr__(self, 'parts', tuple(int(p) for p in self.parts))

    @property
    def w(self):
        return len(self.parts)

    @property
    def weight(self):
        return sum(self.parts)

    def covers(self):
        """Fixed points mu with one part increased by 1."""
        return [self.add_box(s) for s in range(self.w)]

    def co_covers(self):
        return [self.remove_box(s) for s in range(self.w) if self.parts[s] > 0]

    def add_box(self, s):
        parts = list(self.parts)
        parts[s] += 1
        return Lambda(tuple(parts))

    def remove_box(self, s):
        parts = list(self.parts)
        parts[s] -= 1
        return Lambda(tuple(parts))

    def __str__(self):
        return '(' + ','.join(str(p) for p in self.parts) + ')'


def all_lambdas(w, v):
    return [Lambda(parts) for parts in compositions(v, w)]


def basis_up_to(w, weight_cap):
    """Fixed points with |lambda| <= weight_cap, ordered by weight then lexicographically."""
    basis = []
    for v in range(weight_cap + 1):
        basis.extend(all_lambdas(w, v))
    return basis


def framing_class(w):
    return VirtualCharacter.from_poly(sum((chi(s) for s in range(1, w + 1)), LaurentPoly()))


def taut_class(lam):
    """V_lambda = sum_s sum_{r=1}^{lambda_s} chi_s q^(3-2r)."""
    total = LaurentPoly()
    for s, part in enumerate(lam.parts, start=1):
        for r in range(1, part + 1):
            total = total + chi(s) * q_power(3 - 2 * r)
    return VirtualCharacter.from_poly(total)


def cover_position(lam, mu):
    """Index s0 with mu = lambda + delta_s0, or None when mu does not cover lambda."""
    if lam.w != mu.w:
        return None
    diffs = [b - a for a, b in zip(lam.parts, mu.parts)]
    if sorted(diffs) != [0] * (lam.w - 1) + [1]:
        return None
    return diffs.index(1)


def new_root(lam, mu):
    """z = V_mu - V_lambda = chi_s0 q^(3 - 2 mu_s0)."""
    s0 = cover_position(lam, mu)
    return chi(s0 + 1) * q_power(3 - 2 * mu.parts[s0])


def coeff_A_minus(lam, mu, n):
    """
    <lambda| A^-_n |mu> = ev_{u=z} u^n prod_r (u q^-2 - z_r)/(u - z_r).

    z_r runs over the monomials of V_lambda; zero when mu does not cover lambda.
    """
    if cover_position(lam, mu) is None:
        return RatFunc(0)
    z = RatFunc(new_root(lam, mu))
    value = z ** n
    for z_r in taut_class(lam).monomials():
        value = value * (z * RatFunc(q_power(-2)) - RatFunc(z_r)) / (z - RatFunc(z_r))
    return value


def _a_plus_integrand(lam, m):
    w = lam.w
    num = U ** (m + w - 1)
    den = [U - chi(s) * Q for s in range(1, w + 1)]
    for z_r in taut_class(lam).monomials():
        num = num * (U - z_r)
        den.append(U - z_r * q_power(-2))
    return RatFunc.from_factors(num, den)


def coeff_A_plus(lam, mu, m):
    """<mu| A^+_m |lambda> = (1 - q^-2)^-1 Res_{u=z} u^(m+w-1) / prod_s (u - chi_s q) prod_r (u - z_r)/(u - z_r q^-2)."""
    if cover_position(lam, mu) is None:
        return RatFunc(0)
    z = RatFunc(new_root(lam, mu))
    value = residue(_a_plus_integrand(lam, m), z)
    return value / RatFunc(1 - q_power(-2))


def phi_lambda(lam):
    """phi_lambda(u) = q^-2v u^w prod_s (u - chi_s q^3) / ((u - chi_s q^(1-2l_s)) (u - chi_s q^(3-2l_s)))."""
    num = q_power(-2 * lam.weight) * U ** lam.w
    den = []
    for s, part in enumerate(lam.parts, start=1):
        num = num * (U - chi(s) * q_power(3))
        den.append(U - chi(s) * q_power(1 - 2 * part))
        den.append(U - chi(s) * q_power(3 - 2 * part))
    return RatFunc.from_factors(num, den)


def phi_coefficients(lam, exponent):
    """(u^exponent coefficient of phi+ expanded in u^-1, same of phi- expanded in u)."""
    phi = phi_lambda(lam)
    plus = expand(phi, POWERS_OF_U_INV, exponent, exponent).coefficient(exponent)
    minus = expand(phi, POWERS_OF_U, exponent, exponent).coefficient(exponent)
    return plus, minus


@dataclass(frozen=True)
class CommutatorCertificate:
    passed: bool
    lhs: RatFunc
    rhs: RatFunc
    off_diagonal: tuple

    def to_dict(self):
        return {
            'passed': self.passed,
            'lhs': str(self.lhs),
            'rhs': str(self.rhs),
            'off_diagonal': [{'target': list(target.parts), 'value': str(value)} for target, value in self.off_diagonal],
        }


def commutator_check(w, lam, m, n):
    """
    Compare the [lambda]-entries of (q - q^-1)[A^+_m, A^-_n] with q(phi-_lambda - phi+_lambda).

    The diagonal entry is summed over co-covers (A^+ A^-) and covers (A^- A^+)
    of lambda and compared with the u^(-m-n) coefficients of the two
    expansions of phi_lambda. Off-diagonal entries lambda' = lambda - delta_s + delta_t
    must vanish.
    """
    if lam.w != w:
        raise PreconditionError(f'fixed point {lam} does not have {w} parts')
    scale = RatFunc(Q - Q ** -1)
    lhs = RatFunc(0)
    for nu in lam.co_covers():
        lhs = lhs + coeff_A_plus(nu, lam, m) * coeff_A_minus(nu, lam, n)
    for mu in lam.covers():
        lhs = lhs - coeff_A_minus(lam, mu, n) * coeff_A_plus(lam, mu, m)
    lhs = lhs * scale
    plus, minus = phi_coefficients(lam, -m - n)
    rhs = (minus - plus) * RatFunc(Q)
    passed = (lhs - rhs).is_zero()

    off_diagonal = []
    for s in range(w):
        if lam.parts[s] == 0:
            continue
        nu = lam.remove_box(s)
        for t in range(w):
            if t == s:
                continue
            target = nu.add_box(t)
            mu = lam.add_box(t)
            value = (coeff_A_plus(nu, target, m) * coeff_A_minus(nu, lam, n)
                     - coeff_A_minus(target, mu, n) * coeff_A_plus(lam, mu, m)) * scale
            off_diagonal.append((target, value))
            if not value.is_zero():
                passed = False
    if not passed:
        logger.warning(f'Commutator identity fails at lambda={lam}, m={m}, n={n}')
    return CommutatorCertificate(passed, lhs, rhs, tuple(off_diagonal))


def psi_series_a1(lam, sign, trunc):
    """
    psi^sign(u) on [lambda] from the tautological classes.

    psi+ = q^-2v Lambda_{-u^-1}(E) and psi- = q^-2v u^w prod_s(-c_s/(a_s b_s)) Lambda_{-u}(E dual),
    where E = sum_s chi_s (q^3 - q^(1-2l_s) - q^(3-2l_s)) and a_s, b_s, c_s are the
    poles and zero of phi_lambda.
    """
    if trunc < 0:
        raise PreconditionError(f'truncation order must be non-negative, got {trunc}')
    poly = LaurentPoly()
    lead = q_power(-2 * lam.weight)
    for s, part in enumerate(lam.parts, start=1):
        a = chi(s) * q_power(1 - 2 * part)
        b = chi(s) * q_power(3 - 2 * part)
        c = chi(s) * q_power(3)
        poly = poly + c - a - b
        if sign == MINUS:
            lead = lead * (-c) * (a * b).unit_inverse()
    character = VirtualCharacter.from_poly(poly)
    if sign == PLUS:
        return lambda_series(character, POWERS_OF_U_INV, trunc) * RatFunc(lead)
    if sign == MINUS:
        return (lambda_series(character.dual(), POWERS_OF_U, trunc) * RatFunc(lead)).shift(lam.w)
    raise PreconditionError(f'psi sign must be + or -, got {sign!r}')


def central_element(lam):
    """psi+_0 psi-_{-w} on [lambda]."""
    plus = psi_series_a1(lam, PLUS, 0).coefficient(0)
    minus = psi_series_a1(lam, MINUS, 0).coefficient(lam.w)
    return plus * minus


def expected_central_value(w):
    """(-q)^-w prod_s chi_s^-1."""
    value = LaurentPoly.constant((-1) ** w) * q_power(-w)
    for s in range(1, w + 1):
        value = value * chi(s).unit_inverse()
    return RatFunc(value)


def _series_from_list(coeffs, direction, trunc):
    if direction == POWERS_OF_U_INV:
        return USeries(direction, {-k: c for k, c in enumerate(coeffs)}, -trunc, 0)
    return USeries(direction, dict(enumerate(coeffs)), 0, trunc)


def lweight_series_general(quiver, i, vchars, wchar, w_i, trunc, sign):
    """
    psi^sign_i(u) on a fixed point with tautological characters vchars and framing wchar.

    With H = W_i - sum_j [c_ij]_q V_j and d = w_i - sum_j c_ij rank V_j:
        psi+ = q^(-w_i+d) Lambda_{-u^-1}(q^-1 W_i)^-1 exp(sum_m (q^m - q^-m) psi^m(H) u^-m / m)
        psi- = q^(-w_i-d) prod_e u/(u - q^-1 e) exp(-sum_m (q^m - q^-m) psi^m(H^dual) u^m / m)
    with the product over the monomials e of W_i expanded in powers of u.

    Args:
        quiver: QuiverData with Cartan matrix
        i: vertex
        vchars: vertex -> VirtualCharacter
        wchar: VirtualCharacter of the framing at i
        w_i: framing rank, must equal the rank of wchar
        trunc: number of terms past the leading one
        sign: '+' or '-'

    Returns:
        USeries; psi+ exact on [-trunc, 0], psi- exact on [w_i, w_i + trunc]
    """
    if wchar.rank() != w_i:
        raise PreconditionError(f'framing character has rank {wchar.rank()}, expected {w_i}')
    h_one = wchar
    d = w_i
    for j, character in vchars.items():
        c = quiver.c(i, j)
        h_one = h_one - character * q_integer(c)
        d -= c * character.rank()
    if sign == PLUS:
        base = lambda_series(-(VirtualCharacter.from_poly(wchar.to_poly() * q_power(-1))), POWERS_OF_U_INV, trunc)
        adams_source = h_one
        factor = 1
        lead = RatFunc(q_power(-w_i + d))
        direction = POWERS_OF_U_INV
    elif sign == MINUS:
        dual = VirtualCharacter.from_poly(wchar.dual().to_poly() * Q)
        base = lambda_series(-dual, POWERS_OF_U, trunc)
        lead = LaurentPoly.constant((-1) ** w_i) * q_power(w_i) * wchar.determinant().unit_inverse()
        lead = RatFunc(lead * q_power(-w_i - d))
        adams_source = h_one.dual()
        factor = -1
        direction = POWERS_OF_U
    else:
        raise PreconditionError(f'psi sign must be + or -, got {sign!r}')
    ell = [RatFunc(0)]
    for m in range(1, trunc + 1):
        power = adams_source.adams(m).to_poly() * (q_power(m) - q_power(-m))
        ell.append(RatFunc(power) * factor / m)
    exponential = _series_from_list(series_exp(ell, trunc), direction, trunc)
    series = base * exponential * lead
    if sign == MINUS:
        return series.shift(w_i)
    return series


def a1_lweight_data(lam):
    """(vchars, wchar) of the fixed point lambda for lweight_series_general on A1."""
    return {A1_VERTEX: taut_class(lam)}, framing_class(lam.w)


def quot_cells(w, v):
    """Cells of the Quot scheme indexed by compositions of v into w parts."""
    if w < 1 or v < 0:
        raise PreconditionError(f'Quot cells need w >= 1 and v >= 0, got w={w}, v={v}')
    cells = []
    for parts in compositions(v, w):
        punctual = sum(r * part for r, part in enumerate(parts))
        cells.append({'composition': list(parts), 'dim': v + punctual, 'punctual_dim': punctual})
    return cells


def quot_poincare(w, v, punctual):
    """sum over cells of t^(2 dim) and the Euler characteristic C(v+w-1, w-1)."""
    poly = LaurentPoly()
    cells = quot_cells(w, v)
    for cell in cells:
        dim = cell['punctual_dim'] if punctual else cell['dim']
        poly = poly + LaurentPoly.var('t', 2 * dim)
    euler = len(cells)
    if euler != comb(v + w - 1, w - 1):
        raise PreconditionError(f'cell count {euler} disagrees with the binomial count')
    return poly, euler


def format_ascending(poly, var='t'):
    """Univariate polynomial as text with ascending exponents, e.g. 1+t^2."""
    pieces = []
    for exp, coeff in sorted(poly.split(var).items()):
        value = coeff.constant_value()
        if exp == 0:
            body = str(value)
        else:
            power = var if exp == 1 else f'{var}^{exp}'
            body = power if value == 1 else f'{value}*{power}'
        pieces.append(body)
    return '+'.join(pieces).replace('+-', '-') or '0'


def _table_column(args):
    col, lam, index, n_window, psi_depth = args
    entries = {}
    for n in range(-n_window, n_window + 1):
        for mu in lam.covers():
            if mu in index:
                entries[((X_PLUS, n), index[mu], col)] = coeff_A_plus(lam, mu, n)
        for nu in lam.co_covers():
            entries[((X_MINUS, n), index[nu], col)] = coeff_A_minus(nu, lam, n) * RatFunc(-q_power(-1))
    w = lam.w
    phi = phi_lambda(lam)
    plus = expand(phi, POWERS_OF_U_INV, -psi_depth, 0)
    minus = expand(phi, POWERS_OF_U, w, w + psi_depth)
    for k in range(0, psi_depth + 1):
        entries[((PSI_PLUS, k), col, col)] = plus.coefficient(-k)
    for k in range(-w - psi_depth, -w + 1):
        entries[((PSI_MINUS, k), col, col)] = minus.coefficient(-k)
    return entries


def build_operator_table(w, weight_cap, n_window, threads=1):
    """
    Operator table of the A1 representation truncated to |lambda| <= weight_cap.

    x+_n = A+_n and x-_n = -q^-1 A-_n; psi+_k (0 <= k <= 2N+w) and
    psi-_k (-w-2N <= k <= -w) are the diagonal coefficients of phi_lambda.
    Columns are assembled in parallel and merged in basis order.
    """
    if weight_cap < 0:
        raise PreconditionError(f'weight cap must be non-negative, got {weight_cap}')
    basis = basis_up_to(w, weight_cap)
    index = {lam: col for col, lam in enumerate(basis)}
    psi_depth = 2 * n_window + w
    jobs = [(col, lam, index, n_window, psi_depth) for col, lam in enumerate(basis)]
    logger.info(f'Assembling A1 operator table: w={w}, cap={weight_cap}, {len(basis)} basis vectors')
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(_table_column, jobs))
    else:
        columns = [_table_column(job) for job in jobs]

    grouped = {}
    for column in columns:
        for (name, row, col), value in column.items():
            grouped.setdefault(name, {})[(row, col)] = value
    size = len(basis)
    generators = {}
    for n in range(-n_window, n_window + 1):
        for kind in (X_PLUS, X_MINUS):
            generators[(kind, A1_VERTEX, n)] = SparseMatrix(size, grouped.get((kind, n), {}))
    for k in range(0, psi_depth + 1):
        generators[(PSI_PLUS, A1_VERTEX, k)] = SparseMatrix(size, grouped.get((PSI_PLUS, k), {}))
    for k in range(-w - psi_depth, -w + 1):
        generators[(PSI_MINUS, A1_VERTEX, k)] = SparseMatrix(size, grouped.get((PSI_MINUS, k), {}))
    weights = tuple((lam.weight,) for lam in basis)
    return OperatorTable(tuple(basis), weights, (A1_VERTEX,), generators, weight_cap)


def matrix_coefficients(lam, mu, n, operator):
    """<mu| A^{+/-}_n |lambda> as a serializable record."""
    if operator == X_PLUS:
        value = coeff_A_plus(lam, mu, n)
    elif operator == X_MINUS:
        value = coeff_A_minus(mu, lam, n)
    else:
        raise PreconditionError(f"operator must be {X_PLUS} or {X_MINUS}, got {operator!r}")
    return {'source': list(lam.parts), 'target': list(mu.parts), 'n': n, 'value': str(value)}
