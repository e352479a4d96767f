"""
Generalized preprojective algebras and graded quiver Grassmannians.

Pi-bar e_i is built for type A_n (n <= 3) as the quotient of the path space
of the double quiver by the two-sided ideal of the preprojective relations,
one path length at a time. I^l_{i,k} = D(Pi-tilde^l e_i)[-k-l] has basis
(p, a)^* for basis paths p and 0 <= a < l; its torus-fixed submodules are the
coordinate subspaces closed under the arrows and eps.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from logger_config import setup_logger
from shifted.exceptions import GrassmannianError
from shifted.qchar import KRSpec, fm_qcharacter
from shifted.quiver_core import SUPPORT_IXZ, DimVec, derive_quiver

logger = setup_logger(__name__)

EPS = 'eps'
ARROW_DEGREE = -1
EPS_DEGREE = 2
MAX_RANK = 3
MAX_PIECE_DIM = 4
MAX_BASIS = 24


def _check_type_a(quiver):
    name = quiver.type
    if not (name.startswith('A') and name[1:].isdigit()) or int(name[1:]) > MAX_RANK:
        raise GrassmannianError(f'preprojective path bases are tabulated for A_n with n <= {MAX_RANK}, got {name}')


@dataclass
class PathBasis:
    """
    Basis of Pi-bar e_i by paths (traversal order words of double-quiver arrow labels).

    paths[n] = (word, target vertex, length); action[(label, n)] = {m: coeff}.
    """
    i: str
    paths: list
    action: dict = field(default_factory=dict)

    def text(self, n):
        word, _, _ = self.paths[n]
        return '.'.join(word) if word else f'e{self.i}'


def _paths_from(arrows, start, length):
    """All arrow words of the given length starting at start: (word, end)."""
    layer = [((), start)]
    for _ in range(length):
        layer = [(word + (a.label,), a.target) for word, end in layer for a in arrows if a.source == end]
    return layer


def _relation_words(quiver, arrows, v):
    """rho_v as (word, sign) pairs: sum_{t(a)=v} (a*, a) - sum_{s(a)=v} (a, a*)."""
    terms = []
    for arrow in quiver.arrows:
        if arrow.target == v:
            terms.append(((f'{arrow.label}*', arrow.label), 1))
        if arrow.source == v:
            terms.append(((arrow.label, f'{arrow.label}*'), -1))
    return terms


def preprojective_basis(quiver, i, max_length=None):
    """
    Path basis of Pi-bar e_i with the left action of the double-quiver arrows.

    For each length the span of relation words r + rho_v + u is reduced with
    sympy's rref; the free columns are the basis paths of that length.
    """
    _check_type_a(quiver)
    i = str(i)
    double = derive_quiver(quiver, 'double')
    arrows = double.arrows
    if max_length is None:
        max_length = 2 * quiver.rank() + 2
    basis = []
    reductions = {}
    for length in range(max_length + 1):
        paths = _paths_from(arrows, i, length)
        if not paths:
            break
        column = {word: n for n, (word, _) in enumerate(paths)}
        rows = []
        for a in range(0, length - 1):
            for prefix, v in _paths_from(arrows, i, a):
                suffix_len = length - a - 2
                for suffix, _ in _paths_from(arrows, v, suffix_len):
                    row = [0] * len(paths)
                    for middle, sign in _relation_words(quiver, arrows, v):
                        row[column[prefix + middle + suffix]] += sign
                    if any(row):
                        rows.append(row)
        pivots = ()
        reduced = None
        if rows:
            reduced, pivots = sympy.Matrix(rows).rref()
        free = [n for n in range(len(paths)) if n not in pivots]
        if not free:
            break
        for n, (word, end) in enumerate(paths):
            if n in free:
                reductions[word] = {word: Fraction(1)}
            else:
                r = pivots.index(n)
                reductions[word] = {paths[f][0]: Fraction(int(-reduced[r, f].p), int(reduced[r, f].q))
                                    for f in free if reduced[r, f] != 0}
        for n in free:
            word, end = paths[n]
            basis.append((word, end, length))
    index = {word: n for n, (word, _, _) in enumerate(basis)}
    result = PathBasis(i, basis)
    for n, (word, end, length) in enumerate(basis):
        for arrow in arrows:
            if arrow.source != end:
                continue
            image = reductions.get(word + (arrow.label,), {})
            image = {index[w]: c for w, c in image.items() if c}
            if image:
                result.action[(arrow.label, n)] = image
    logger.debug(f'Pi-bar e_{i} of {quiver.type}: {len(basis)} basis paths')
    return result


@dataclass
class GradedModule:
    """
    Graded module with explicit action matrices on column vectors.

    vertices[b], degrees[b] and weights[b] describe basis vector b; weights are
    the fine torus weights used by the fixed-point enumeration. arrows maps a
    generator label (double-quiver arrows and eps) to a sympy Matrix.
    """
    labels: list
    vertices: list
    degrees: list
    arrows: dict
    weights: list = None
    generator_degrees: dict = field(default_factory=dict)
    l: int = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.labels)

    def fine_weights(self):
        if self.weights is not None:
            return self.weights
        return [(v, d) for v, d in zip(self.vertices, self.degrees)]

    def piece_dims(self):
        dims = {}
        for v, d in zip(self.vertices, self.degrees):
            dims[(v, d)] = dims.get((v, d), 0) + 1
        return dims

    def dimvec(self, members=None):
        chosen = range(len(self)) if members is None else members
        return DimVec.from_mapping(_count_pieces(self, chosen), SUPPORT_IXZ)

    def relation_flags(self, quiver=None):
        """Exact checks of the defining relations on the action matrices."""
        size = len(self)
        zero = sympy.zeros(size, size)
        flags = {}
        if quiver is not None:
            rho = sympy.zeros(size, size)
            for arrow in quiver.arrows:
                a = self.arrows.get(arrow.label, zero)
                b = self.arrows.get(f'{arrow.label}*', zero)
                rho += a * b - b * a
            flags['preprojective'] = rho == zero
        eps = self.arrows.get(EPS)
        if eps is not None:
            flags['eps_commutes'] = all(eps * m == m * eps for label, m in self.arrows.items() if label != EPS)
            if self.l is not None:
                flags['eps_nilpotent'] = eps ** self.l == zero
        total = zero
        for matrix in self.arrows.values():
            total += matrix
        flags['nilpotent'] = total ** max(size, 1) == zero
        flags['graded'] = all(
            self.degrees[r] == self.degrees[c] + self.generator_degrees.get(label, 0)
            for label, matrix in self.arrows.items() if label in self.generator_degrees
            for r in range(size) for c in range(size) if matrix[r, c] != 0)
        return flags

    def socle(self):
        """Common kernel of all generators as a DimVec (basis vectors spanning it are coordinate vectors)."""
        stacked = sympy.Matrix.vstack(*self.arrows.values()) if self.arrows else sympy.zeros(1, len(self))
        kernel = stacked.nullspace()
        counts = {}
        for vector in kernel:
            support = [b for b in range(len(self)) if vector[b] != 0]
            if len(support) != 1:
                raise GrassmannianError('socle is not spanned by basis vectors')
            key = (self.vertices[support[0]], self.degrees[support[0]])
            counts[key] = counts.get(key, 0) + 1
        return DimVec.from_mapping(counts, SUPPORT_IXZ)

    def to_dict(self):
        return {
            'basis': [{'label': lab, 'vertex': v, 'degree': d}
                      for lab, v, d in zip(self.labels, self.vertices, self.degrees)],
            'arrows': {label: [[str(x) for x in matrix.row(r)] for r in range(matrix.rows)]
                       for label, matrix in sorted(self.arrows.items())},
            'l': self.l,
        }

    @classmethod
    def from_dict(cls, data):
        """Module description file: basis with vertex and degree, arrow matrices with rational entries."""
        try:
            basis = data['basis']
            labels = [str(b['label']) for b in basis]
            vertices = [str(b['vertex']) for b in basis]
            degrees = [int(b['degree']) for b in basis]
            arrows = {}
            for label, rows in data['arrows'].items():
                matrix = sympy.Matrix([[sympy.Rational(str(x)) for x in row] for row in rows])
                if matrix.shape != (len(basis), len(basis)):
                    raise GrassmannianError(f'arrow {label} has shape {matrix.shape}, expected {len(basis)}')
                arrows[label] = matrix
        except (KeyError, TypeError, ValueError) as e:
            raise GrassmannianError(f'malformed module description: {e}') from e
        generator_degrees = {label: EPS_DEGREE if label == EPS else ARROW_DEGREE for label in arrows}
        return cls(labels, vertices, degrees, arrows, generator_degrees=generator_degrees, l=data.get('l'))


def _count_pieces(module, chosen):
    counts = {}
    for b in chosen:
        key = (module.vertices[b], module.degrees[b])
        counts[key] = counts.get(key, 0) + 1
    return counts


def build_injective(quiver, i, k, l):
    """
    I^l_{i,k} = D(Pi-tilde^l e_i)[-k-l] for type A_n, n <= 3.

    Basis (p, a)^* sits at vertex t(p) in degree k + l + len(p) - 2a; an arrow
    acts by the transpose of its opposite arrow on Pi-tilde^l e_i, eps by the
    transpose of eps.
    """
    if l < 1:
        raise GrassmannianError(f'l must be positive, got {l}')
    paths = preprojective_basis(quiver, i)
    double = derive_quiver(quiver, 'double')
    opposite = {}
    for arrow in quiver.arrows:
        opposite[arrow.label] = f'{arrow.label}*'
        opposite[f'{arrow.label}*'] = arrow.label
    basis = [(n, a) for a in range(l) for n in range(len(paths.paths))]
    index = {key: b for b, key in enumerate(basis)}
    size = len(basis)
    labels, vertices, degrees, weights = [], [], [], []
    for n, a in basis:
        _, end, length = paths.paths[n]
        labels.append(f'({paths.text(n)},{a})*')
        vertices.append(end)
        degrees.append(k + l + length - 2 * a)
        weights.append((end, length, a))
    arrows = {}
    for arrow in double.arrows:
        source_label = opposite[arrow.label]
        matrix = sympy.zeros(size, size)
        for (n, a), b in index.items():
            for m, coeff in paths.action.get((source_label, n), {}).items():
                # (p, a) -> coeff (p', a) on Pi-tilde transposes to (p', a)^* -> coeff (p, a)^*
                matrix[b, index[(m, a)]] = sympy.Rational(coeff.numerator, coeff.denominator)
        arrows[arrow.label] = matrix
    eps = sympy.zeros(size, size)
    for (n, a), b in index.items():
        if a + 1 < l:
            eps[b, index[(n, a + 1)]] = 1
    arrows[EPS] = eps
    generator_degrees = {label: ARROW_DEGREE for label in arrows}
    generator_degrees[EPS] = EPS_DEGREE
    logger.info(f'Built I^{l}_{{{i},{k}}} of {quiver.type}: dimension {size}')
    return GradedModule(labels, vertices, degrees, arrows, weights, generator_degrees, l,
                        {'type': quiver.type, 'i': str(i), 'k': k, 'shift': -k - l})


@dataclass(frozen=True)
class SubmoduleCert:
    dimvec: DimVec
    members: tuple
    basis: tuple
    flags: dict

    def to_dict(self):
        return {'dimvec': self.dimvec.to_json(), 'basis': list(self.basis), 'flags': dict(self.flags)}


def _targets(module):
    """b -> basis vectors reached from b by one generator; rejects non-monomial actions."""
    targets = {b: set() for b in range(len(module))}
    for label, matrix in module.arrows.items():
        for c in range(len(module)):
            column = [r for r in range(len(module)) if matrix[r, c] != 0]
            if len(column) > 1:
                raise GrassmannianError(
                    f'generator {label} is not monomial on basis vector {module.labels[c]}: positive-dimensional family')
            targets[c].update(column)
    return targets


def _check_feasible(module):
    for (v, d), n in module.piece_dims().items():
        if n > MAX_PIECE_DIM:
            raise GrassmannianError(f'graded piece ({v},{d}) has dimension {n} > {MAX_PIECE_DIM}')
    if len(module) > MAX_BASIS:
        raise GrassmannianError(f'module dimension {len(module)} exceeds the enumeration bound {MAX_BASIS}')
    weights = module.fine_weights()
    if len(set(weights)) != len(weights):
        raise GrassmannianError('fine weight spaces are not one-dimensional: fixed points are not isolated')


def _closures(module):
    targets = _targets(module)
    closures = []
    for b in range(len(module)):
        seen = {b}
        stack = [b]
        while stack:
            for c in targets[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        closures.append(frozenset(seen))
    return closures


def _closed_subsets(closures):
    """All unions of closures, each once, in a deterministic order."""
    size = len(closures)
    out = []

    def walk(b, chosen, excluded):
        if b == size:
            out.append(tuple(sorted(chosen)))
            return
        if b in chosen:
            walk(b + 1, chosen, excluded)
            return
        walk(b + 1, chosen, excluded | {b})
        if not closures[b] & excluded:
            walk(b + 1, chosen | closures[b], excluded)

    walk(0, frozenset(), frozenset())
    return sorted(out, key=lambda members: (len(members), members))


def _certify(module, members):
    columns = [sympy.eye(len(module))[:, b] for b in members]
    subspace = sympy.Matrix.hstack(*columns) if columns else sympy.zeros(len(module), 0)
    rank = subspace.rank() if columns else 0
    flags = {}
    for label, matrix in sorted(module.arrows.items()):
        if not columns:
            flags[label] = True
            continue
        flags[label] = sympy.Matrix.hstack(subspace, matrix * subspace).rank() == rank
    dimvec = module.dimvec(members)
    return SubmoduleCert(dimvec, tuple(members), tuple(module.labels[b] for b in members), flags)


def all_graded_submodules(module, threads=1):
    """Torus-fixed graded submodules of a module with monomial action and distinct fine weights."""
    _check_feasible(module)
    subsets = _closed_subsets(_closures(module))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            certificates = list(pool.map(lambda members: _certify(module, members), subsets))
    else:
        certificates = [_certify(module, members) for members in subsets]
    bad = [cert for cert in certificates if not all(cert.flags.values())]
    if bad:
        raise GrassmannianError(f'{len(bad)} enumerated subspaces are not submodules')
    return certificates


def enumerate_graded_submodules(module, v, threads=1):
    """Fixed points of Gr_v(module): certificates with dimension vector v."""
    return [cert for cert in all_graded_submodules(module, threads) if cert.dimvec == v]


def euler_vs_kr(quiver, i, k, l, threads=1, step_cap=20000):
    """
    Compare the Euler characteristic of the graded Grassmannian of I^l_{i,k}
    with dim KR^l_{i,k}, and each nonempty Gr_v with the monomial m * prod A^-v.
    """
    module = build_injective(quiver, i, k, l)
    certificates = all_graded_submodules(module, threads)
    character = fm_qcharacter(quiver, KRSpec(i, k, l), step_cap, threads)
    by_a_vector = {}
    for monomial, mult in character.terms.items():
        avec = character.a_vectors[monomial]
        by_a_vector[DimVec.from_mapping(avec, SUPPORT_IXZ)] = mult
    groups = {}
    for cert in certificates:
        groups.setdefault(cert.dimvec, []).append(cert)
    socle = (str(i), k + l)
    refinement_ok = True
    per_v = []
    for v, certs in sorted(groups.items(), key=lambda item: (item[0].total(), str(item[0]))):
        fm_mult = by_a_vector.get(v, 0)
        if fm_mult < 1 or (not v.is_zero() and v.get(socle) < 1):
            refinement_ok = False
        per_v.append({'v': v.to_json(), 'submodules': len(certs), 'fm_mult': fm_mult})
    passed = len(certificates) == character.dim() and refinement_ok and not character.incomplete
    logger.info(f'Grassmannian count {len(certificates)} vs dim KR {character.dim()} for '
                f'{quiver.type} ({i},{k},{l})')
    return {'passed': passed, 'grassmannian_count': len(certificates), 'kr_dim': character.dim(),
            'refinement_ok': refinement_ok, 'per_v': per_v}
