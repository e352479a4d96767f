"""
q-character combinatorics on the Y-lattice I x Z.

Monomials are exponent maps (i, k) -> n with
A_{i,k} = Y_{i,k+1} Y_{i,k-1} prod_{c_ij < 0} Y_{j,k}^-1.
The spectral parameter a = zeta^k is kept as the integer k; zeta itself only
appears symbolically in the l-weights.
"""

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

from logger_config import setup_logger
from shifted.exact_algebra import LaurentPoly, RatFunc, U
from shifted.exceptions import PreconditionError
from shifted.quiver_core import DimVec, decode_vertex, encode_vertex, quiver_from_type, vertex_key

logger = setup_logger(__name__)

VARIANT_A = 'a'
VARIANT_B = 'b'
ZETA = 'zeta'


def _sort_key(item):
    (i, k), _ = item
    return (vertex_key(i), k)


class Monomial:
    """Finitely supported Laurent monomial in the Y_{i,k}."""

    __slots__ = ('exponents', '_hash')

    def __init__(self, exponents=()):
        self.exponents = tuple(sorted(((k, e) for k, e in exponents if e), key=_sort_key))
        self._hash = None

    @classmethod
    def from_mapping(cls, mapping):
        acc = {}
        for (i, k), e in dict(mapping).items():
            key = (str(i), int(k))
            acc[key] = acc.get(key, 0) + int(e)
        return cls(acc.items())

    @classmethod
    def one(cls):
        return cls()

    @classmethod
    def Y(cls, i, k, e=1):
        return cls((((str(i), k), e),))

    @classmethod
    def A(cls, quiver, i, k):
        i = str(i)
        mapping = {(i, k + 1): 1, (i, k - 1): 1}
        for j in quiver.neighbors(i):
            mapping[(j, k)] = mapping.get((j, k), 0) - 1
        return cls.from_mapping(mapping)

    def as_dict(self):
        return dict(self.exponents)

    def get(self, i, k):
        return self.as_dict().get((str(i), k), 0)

    def is_one(self):
        return not self.exponents

    def __mul__(self, other):
        acc = self.as_dict()
        for key, e in other.exponents:
            acc[key] = acc.get(key, 0) + e
        return Monomial(acc.items())

    def __pow__(self, n):
        return Monomial((key, e * n) for key, e in self.exponents)

    def inverse(self):
        return self ** -1

    def __truediv__(self, other):
        return self * other.inverse()

    def __eq__(self, other):
        return isinstance(other, Monomial) and self.exponents == other.exponents

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.exponents)
        return self._hash

    def __lt__(self, other):
        return self.exponents < other.exponents

    def is_dominant(self):
        return all(e >= 0 for _, e in self.exponents)

    def is_dominant_at(self, i):
        return all(e >= 0 for (j, _), e in self.exponents if j == str(i))

    def top(self):
        """|m| = the largest k carrying a nonzero exponent."""
        if not self.exponents:
            return None
        return max(k for (_, k), _ in self.exponents)

    def is_right_negative(self):
        top = self.top()
        if top is None:
            return False
        return all(e <= 0 for (_, k), e in self.exponents if k == top)

    def restrict(self, i):
        """k -> exponent at vertex i."""
        return {k: e for (j, k), e in self.exponents if j == str(i)}

    def to_json(self):
        return {encode_vertex(key): e for key, e in self.exponents}

    @classmethod
    def from_json(cls, data):
        return cls.from_mapping({decode_vertex(key): e for key, e in data.items()})

    def __str__(self):
        if not self.exponents:
            return '1'
        return ''.join(f'Y_{{{i},{k}}}' + ('' if e == 1 else f'^{e}') for (i, k), e in self.exponents)

    def __repr__(self):
        return f'Monomial({self})'


@dataclass(frozen=True)
class KRSpec:
    i: str
    k: int
    l: int

    def __post_init__(self):
        if self.l < 1:
            raise PreconditionError(f'KR level must be positive, got l={self.l}')
        object.__setattr__(self, 'i', str(self.i))

    def support(self):
        return [self.k - self.l + 1 + 2 * j for j in range(self.l)]


def kr_dimvec(i, k, l):
    """w^l_{i,k} = sum_{j=0}^{l-1} delta_{i, k-l+1+2j}."""
    spec = KRSpec(i, k, l)
    return DimVec.from_mapping({(spec.i, r): 1 for r in spec.support()})


def kr_monomial(spec):
    """m^l_{i,k} = Y_{i,k-l+1} ... Y_{i,k+l-1}."""
    return Monomial.from_mapping({(spec.i, r): 1 for r in spec.support()})


def kr_drinfeld_roots(spec):
    """Exponents r of the roots zeta^r of the Drinfeld polynomial of KR^l_{i,k}."""
    return spec.support()


@dataclass
class QChar:
    terms: dict
    highest: Monomial = None
    incomplete: bool = False
    a_vectors: dict = field(default_factory=dict)

    def dim(self):
        return sum(self.terms.values())

    def dominant_terms(self):
        return {m: n for m, n in self.terms.items() if m.is_dominant()}

    def dominant_count(self):
        return sum(self.dominant_terms().values())

    def ordered_terms(self):
        """Terms ordered by A-degree, then by exponents."""
        def key(item):
            avec = self.a_vectors.get(item[0])
            return (sum(avec.values()) if avec else 0, item[0].exponents)
        return sorted(self.terms.items(), key=key)

    def normalized(self, quiver):
        """A-exponent vector of m / highest for every term: list of (a_vector, mult)."""
        if self.highest is None:
            raise PreconditionError('normalization needs the highest monomial')
        out = []
        for monomial, mult in self.ordered_terms():
            avec = self.a_vectors.get(monomial)
            if avec is None:
                avec = solve_a_exponents(quiver, monomial / self.highest)
                if avec is None:
                    raise PreconditionError(f'{monomial} is not below the highest monomial')
            out.append((avec, mult))
        return out

    def to_dict(self):
        return {
            'dim': self.dim(),
            'dominant_count': self.dominant_count(),
            'incomplete': self.incomplete,
            'highest': self.highest.to_json() if self.highest is not None else {},
            'terms': [{'monomial': m.to_json(), 'mult': n} for m, n in self.ordered_terms()],
        }


def unique_dominant(character):
    return character.dominant_count() == 1


def q_strings(positions):
    """
    Split a multiset of k's into q-strings k, k+2, ..., in general position.

    Greedy from the smallest point, always taking the longest available string.
    """
    pool = {}
    for k, n in positions.items():
        if n < 0:
            raise PreconditionError(f'negative exponent at k={k} in a dominant restriction')
        if n:
            pool[k] = n
    strings = []
    while pool:
        start = min(pool)
        length = 0
        k = start
        while pool.get(k, 0) > 0:
            pool[k] -= 1
            if not pool[k]:
                del pool[k]
            length += 1
            k += 2
        strings.append((start, length))
    return strings


def sl2_expansion(quiver, monomial, i):
    """
    The U_q(sl2)-character at vertex i generated by an i-dominant monomial.

    Each string (a, len) contributes sum_t prod_{t'<t} A^-1_{i, a+2len-1-2t'}.
    Returns a list of (A-vector increment, multiplicity); the empty increment is the monomial itself.
    """
    expansion = [({}, 1)]
    for start, length in q_strings(monomial.restrict(i)):
        top = start + 2 * (length - 1)
        factors = []
        avec = {}
        factors.append(dict(avec))
        for t in range(length):
            r = top + 1 - 2 * t
            avec = dict(avec)
            avec[(str(i), r)] = avec.get((str(i), r), 0) + 1
            factors.append(avec)
        combined = []
        for base, mult in expansion:
            for step in factors:
                merged = dict(base)
                for key, n in step.items():
                    merged[key] = merged.get(key, 0) + n
                combined.append((merged, mult))
        expansion = combined
    collected = {}
    for avec, mult in expansion:
        key = tuple(sorted(avec.items(), key=_sort_key))
        collected[key] = collected.get(key, 0) + mult
    return [(dict(key), mult) for key, mult in sorted(collected.items(), key=lambda kv: (sum(n for _, n in kv[0]), kv[0]))]


def apply_a_vector(quiver, monomial, avec):
    """monomial * prod A_{j,r}^{-a_{j,r}}."""
    result = monomial
    for (j, r), n in sorted(avec.items(), key=_sort_key):
        result = result * Monomial.A(quiver, j, r) ** (-n)
    return result


def _expand_monomial(args):
    quiver, monomial, avec, mult, colours = args
    updates = []
    for i in quiver.cartan_vertices:
        remaining = mult - colours.get(i, 0)
        if remaining <= 0:
            continue
        if not monomial.is_dominant_at(i):
            raise PreconditionError(
                f'Frenkel-Mukhin expansion fails: {monomial} is not {i}-dominant but has uncoloured multiplicity')
        for increment, count in sl2_expansion(quiver, monomial, i):
            if not increment:
                continue
            new_avec = dict(avec)
            for key, n in increment.items():
                new_avec[key] = new_avec.get(key, 0) + n
            target = apply_a_vector(quiver, monomial, increment)
            updates.append((i, target, new_avec, remaining * count))
    return updates


def fm_qcharacter(quiver, spec, step_cap=20000, threads=1):
    """
    q-character of KR^l_{i,k} by the Frenkel-Mukhin algorithm.

    Monomials are processed level by level in A-degree, so every monomial has
    received all contributions before it is expanded; within a level the
    sl2-expansions run in parallel and are merged in monomial order. When more
    than step_cap monomials are produced the partial character is returned with
    incomplete=True.
    """
    if spec.i not in quiver.cartan_vertices:
        raise PreconditionError(f'vertex {spec.i} is not in {quiver.type}')
    if not quiver.is_dynkin() or quiver.rank() > 4:
        raise PreconditionError('the Frenkel-Mukhin expansion is implemented for Dynkin quivers of rank <= 4')
    highest = kr_monomial(spec)
    mult = {highest: 1}
    colours = {highest: {}}
    a_vectors = {highest: {}}
    pending = {0: {highest}}
    incomplete = False
    while pending and not incomplete:
        depth = min(pending)
        level = sorted(pending.pop(depth))
        jobs = [(quiver, m, a_vectors[m], mult[m], colours[m]) for m in level]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_expand_monomial, jobs))
        else:
            results = [_expand_monomial(job) for job in jobs]
        for updates in results:
            for i, target, new_avec, count in updates:
                if target not in mult:
                    if len(mult) >= step_cap:
                        incomplete = True
                        break
                    mult[target] = 0
                    colours[target] = {}
                    a_vectors[target] = new_avec
                    pending.setdefault(a_degree(new_avec), set()).add(target)
                colour = colours[target].get(i, 0) + count
                colours[target][i] = colour
                mult[target] = max(mult[target], colour)
            if incomplete:
                break
        logger.debug(f'FM level {depth}: {len(level)} monomials')
    if incomplete:
        logger.warning(f'Frenkel-Mukhin expansion of KR({spec.i},{spec.k},{spec.l}) stopped at {step_cap} monomials')
    return QChar(mult, highest, incomplete, a_vectors)


def solve_a_exponents(quiver, ratio):
    """
    Non-negative a with ratio = prod A_{j,r}^{-a_{j,r}}, or None.

    Peels the top row: a negative exponent at (i, k) forces A_{i,k-1}^-1.
    """
    current = ratio
    avec = {}
    if current.is_one():
        return avec
    floor = min(k for (_, k), _ in current.exponents) + 1
    while not current.is_one():
        top = current.top()
        if top - 1 < floor:
            return None
        for (i, k), e in current.exponents:
            if k != top:
                continue
            if e > 0:
                return None
            avec[(i, top - 1)] = avec.get((i, top - 1), 0) - e
            current = current * Monomial.A(quiver, i, top - 1) ** (-e)
    return avec


def a_degree(avec):
    return sum(avec.values())


def right_negative_closure_check(quiver, monomial, steps, window=None):
    """
    Check that monomial * prod A^-1_{j,r} stays right-negative for every
    multiset of at most `steps` factors with r in the window.

    The default window is [min k - 1, |m| + 1] over the monomial's support.
    """
    if not monomial.is_right_negative():
        raise PreconditionError(f'{monomial} is not right-negative')
    if window is None:
        ks = [k for (_, k), _ in monomial.exponents]
        window = (min(ks) - 1, max(ks) + 1)
    generators = [(j, r) for j in quiver.cartan_vertices for r in range(window[0], window[1] + 1)]
    inverses = {g: Monomial.A(quiver, *g).inverse() for g in generators}
    for size in range(1, steps + 1):
        for choice in combinations_with_replacement(generators, size):
            product = monomial
            for g in choice:
                product = product * inverses[g]
            if not product.is_right_negative():
                logger.info(f'{product} breaks right-negativity')
                return False
    return True


def _top(k, l_r):
    return k + 2 * l_r - 2


def tpkr_criterion(tuples, l, variant):
    """
    Interval conditions for the tensor product of KR modules to be simple and equal to KR_W.

    (a): k_r >= l and {k_r+2-2l_r, ..., k_r} = (k_r - 2N) cap [l, k_r]
    (b): {k_r, ..., k_r+2l_r-2} = (k_r + 2N) cap [k_r, l]
    """
    for _, k, l_r in tuples:
        if variant == VARIANT_A:
            string = set(range(k + 2 - 2 * l_r, k + 1, 2))
            if k < l or string != {r for r in range(k, l - 1, -2)}:
                return False
        elif variant == VARIANT_B:
            string = set(range(k, _top(k, l_r) + 1, 2))
            if string != {r for r in range(k, l + 1, 2)}:
                return False
        else:
            raise PreconditionError(f'unknown variant {variant!r}')
    return True


@dataclass(frozen=True)
class SocleCertificate:
    """
    Combinatorial form of the socle argument for a tensor product of KR modules.

    socle is sum_r delta_{i_r, k_r-1+2l_r}; parity_socle is the same sum written
    through l (rows l+1 for k_r in l+2Z, rows l for k_r in l-1+2Z). The
    remaining flags are read off the product of the Frenkel-Mukhin characters.
    """
    variant: str
    socle: DimVec
    parity_socle: DimVec
    lowered: tuple
    cone_ok: bool
    right_negative_ok: bool
    closure_ok: bool
    witness: Monomial = None

    @property
    def socle_identity(self):
        return self.socle == self.parity_socle

    @property
    def holds(self):
        return self.socle_identity and self.cone_ok and self.right_negative_ok and self.closure_ok

    def to_dict(self):
        return {
            'variant': self.variant,
            'socle': self.socle.to_json(),
            'parity_socle': self.parity_socle.to_json(),
            'socle_identity': self.socle_identity,
            'cone_ok': self.cone_ok,
            'right_negative_ok': self.right_negative_ok,
            'closure_ok': self.closure_ok,
            'lowered_monomials': [m.to_json() for m in self.lowered],
            'witness': self.witness.to_json() if self.witness is not None else None,
            'holds': self.holds,
        }


def dual_tuples(quiver, tuples, l):
    """Involution Y_{i,r} -> Y_{i*, h-2-r} for A_n, turning variant (a) data into variant (b) data."""
    if not (quiver.type.startswith('A') and quiver.type[1:].isdigit()):
        raise PreconditionError(f'the duality involution is implemented for type A only, got {quiver.type}')
    n = quiver.rank()
    h = n + 1
    image = [(str(n + 1 - int(i)), h - 2 - k, l_r) for i, k, l_r in tuples]
    return image, h - 2 - l


def product_qcharacter(quiver, specs, step_cap=20000):
    """Monomial -> multiplicity of the product of the KR q-characters."""
    terms = {Monomial.one(): 1}
    for spec in specs:
        character = fm_qcharacter(quiver, spec, step_cap)
        if character.incomplete:
            raise PreconditionError(f'q-character of KR({spec.i},{spec.k},{spec.l}) exceeds the step cap')
        merged = {}
        for monomial, mult in terms.items():
            for other, n in character.terms.items():
                key = monomial * other
                merged[key] = merged.get(key, 0) + mult * n
        terms = merged
    return terms


def socle_bound_check(quiver, tuples, l, variant, closure_steps=2, step_cap=20000):
    """
    Socle certificate for the tensor product of KR modules.

    For variant (b) data the tuple (i, k, l_r) is the string Y_{i,k} ... Y_{i,k+2l_r-2},
    i.e. KR^{l_r}_{i,k+l_r-1}. The certificate holds when the two forms of the
    socle agree, every monomial of the product character other than m lies in
    m A^-1_{i,row} Z[A^-1] for a socle row and is right-negative, and the first
    lowerings m A^-1_{i,row} stay right-negative under closure_steps further
    lowerings. Variant (a) is reduced to (b) by the type A duality.
    """
    if variant == VARIANT_A:
        tuples, l = dual_tuples(quiver, tuples, l)
    elif variant != VARIANT_B:
        raise PreconditionError(f'unknown variant {variant!r}')
    direct, by_parity = {}, {}
    specs = []
    highest = Monomial.one()
    for i, k, l_r in tuples:
        spec = KRSpec(i, k + l_r - 1, l_r)
        specs.append(spec)
        highest = highest * kr_monomial(spec)
        row = k - 1 + 2 * l_r
        direct[(spec.i, row)] = direct.get((spec.i, row), 0) + 1
        parity_row = l + 1 if (k - l) % 2 == 0 else l
        by_parity[(spec.i, parity_row)] = by_parity.get((spec.i, parity_row), 0) + 1
    socle = DimVec.from_mapping(direct)
    parity_socle = DimVec.from_mapping(by_parity)
    rows = [key for key, _ in socle.items()]
    lowered = tuple(highest * Monomial.A(quiver, i, row).inverse() for i, row in rows)

    terms = product_qcharacter(quiver, specs, step_cap)
    cone_ok = True
    right_negative_ok = terms.get(highest, 0) == 1
    witness = None if right_negative_ok else highest
    for monomial in sorted(terms):
        if monomial == highest:
            continue
        avec = solve_a_exponents(quiver, monomial / highest)
        in_cone = avec is not None and any(avec.get(row, 0) > 0 for row in rows)
        if not in_cone:
            cone_ok = False
        if not monomial.is_right_negative():
            right_negative_ok = False
        if witness is None and not (in_cone and monomial.is_right_negative()):
            witness = monomial
    closure_ok = all(m.is_right_negative() and right_negative_closure_check(quiver, m, closure_steps)
                     for m in lowered)
    if witness is not None:
        logger.info(f'Socle certificate fails at {witness}')
    return SocleCertificate(variant, socle, parity_socle, lowered, cone_ok, right_negative_ok, closure_ok, witness)


def random_tpkr_sweep(configurations, seed, l_range=(1, 6)):
    """Compare tpkr_criterion with the socle certificate on seeded random A1/A2 data."""
    rng = random.Random(seed)
    agreements = 0
    for _ in range(configurations):
        quiver = quiver_from_type(rng.choice(['A1', 'A2']))
        variant = rng.choice([VARIANT_A, VARIANT_B])
        l = rng.randint(*l_range)
        tuples = []
        for _ in range(rng.randint(1, 3)):
            i = rng.choice(quiver.cartan_vertices)
            tuples.append((i, rng.randint(0, 6), rng.randint(1, 3)))
        criterion = tpkr_criterion(tuples, l, variant)
        certificate = socle_bound_check(quiver, tuples, l, variant)
        if criterion == certificate.holds:
            agreements += 1
        else:
            logger.warning(f'Criterion and certificate disagree on {tuples}, l={l}, variant {variant}')
    return {'seed': seed, 'configurations': configurations, 'agreements': agreements,
            'all_agree': agreements == configurations}


def _truncate(normalized, cap):
    out = {}
    for avec, mult in normalized:
        degree = a_degree(avec)
        if degree <= cap:
            key = tuple(sorted(avec.items(), key=_sort_key))
            out[key] = out.get(key, 0) + mult
    return out


def _agreement(first, second, cap):
    """Largest degree d <= cap through which two truncations coincide (-1 if none)."""
    best = -1
    for d in range(cap + 1):
        left = {key: n for key, n in first.items() if sum(e for _, e in key) <= d}
        right = {key: n for key, n in second.items() if sum(e for _, e in key) <= d}
        if left != right:
            break
        best = d
    return best


def _normalized_terms(truncation):
    rows = sorted(truncation.items(), key=lambda kv: (sum(e for _, e in kv[0]), kv[0]))
    return [{'a_vector': {encode_vertex(key): e for key, e in avec}, 'degree': sum(e for _, e in avec), 'mult': n}
            for avec, n in rows]


def hj_limit(quiver, i, k, l_max, a_degree_cap, step_cap=20000, threads=1):
    """
    Normalized KR characters approaching the negative prefundamental character.

    Level l uses KR^l_{i,k+1-l}, whose Drinfeld string ends at k, so the
    A-vectors of different levels are directly comparable. Each normalized
    character is truncated to A-degree <= a_degree_cap.
    """
    if quiver.rank() > 2:
        raise PreconditionError('the limit procedure is implemented for rank <= 2')
    if l_max < 2:
        raise PreconditionError(f'l_max must be at least 2, got {l_max}')
    truncations = []
    for l in range(1, l_max + 1):
        character = fm_qcharacter(quiver, KRSpec(i, k + 1 - l, l), step_cap, threads)
        if character.incomplete:
            raise PreconditionError(f'step cap exhausted at level l={l}')
        truncations.append(_truncate(character.normalized(quiver), a_degree_cap))
    levels = []
    for index, truncation in enumerate(truncations):
        entry = {'l': index + 1, 'terms': _normalized_terms(truncation)}
        if index + 1 < len(truncations):
            entry['agreement_with_next'] = _agreement(truncation, truncations[index + 1], a_degree_cap)
        levels.append(entry)
    stable = _agreement(truncations[-2], truncations[-1], a_degree_cap)
    stabilized = {key: n for key, n in truncations[-1].items() if sum(e for _, e in key) <= stable}
    logger.info(f'HJ limit at vertex {i}: stable through A-degree {stable}')
    return {'levels': levels, 'stable_degree': stable, 'stabilized': _normalized_terms(stabilized)}


def _zeta(r):
    return LaurentPoly.var(ZETA, r) if r else LaurentPoly.constant(1)


def drinfeld_lweight(polynomials):
    """
    Psi_i(u) = zeta^deg P_i * P_i(1/(zeta u)) / P_i(zeta/u) for P_i(u) = prod_r (1 - zeta^r u).

    Args:
        polynomials: vertex -> list of root exponents r

    Returns:
        vertex -> RatFunc in u
    """
    out = {}
    for i, roots in polynomials.items():
        num = LaurentPoly.constant(1)
        den = []
        for r in roots:
            num = num * _zeta(1) * (U - _zeta(r - 1))
            den.append(U - _zeta(r + 1))
        out[str(i)] = RatFunc.from_factors(num, den)
    return out


def kr_lweight(spec):
    return drinfeld_lweight({spec.i: kr_drinfeld_roots(spec)})


def prefundamental_lweight(i, k, sign):
    """(1 - zeta^k/u)^(+1) for the positive, ^(-1) for the negative prefundamental l-weight."""
    factor = U - _zeta(k)
    if sign == '+':
        return {str(i): RatFunc(factor, U)}
    if sign == '-':
        return {str(i): RatFunc(U, factor)}
    raise PreconditionError(f'prefundamental sign must be + or -, got {sign!r}')


def polynomial_lweight(i, roots):
    """
    prod_r (1 - zeta^r/u) at vertex i.

    A polynomial in u^-1 of degree len(roots): the l-weight of a one-dimensional
    module over the algebra shifted by w_i = -len(roots).
    """
    value = RatFunc(1)
    for r in roots:
        value = value * prefundamental_lweight(i, r, '+')[str(i)]
    return {str(i): value}
