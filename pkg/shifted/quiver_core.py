"""
Quivers, Dynkin data, derived quivers and dimension vectors.

Vertices are strings ('1', '2', framing copies "1'"); graded vertices are
(vertex, k) pairs living on an explicit finite window of k.
"""

import json
from dataclasses import dataclass

import sympy

from logger_config import setup_logger
from shifted.exceptions import QuiverError
from shifted.schemas import QuiverFile

logger = setup_logger(__name__)

BASE = 'base'
DERIVED_KINDS = (
    'double', 'triple', 'framed', 'framed_double', 'framed_triple',
    'simply_framed_triple', 'graded',
)

# Default arrow degrees of the graded quiver
ARROW_DEGREE = -1
LOOP_DEGREE = 2

SUPPORT_I = 'I'
SUPPORT_IXZ = 'IxZ'


def vertex_key(label):
    """Sort key putting numeric vertex labels in numeric order."""
    text = str(label)
    digits = text.rstrip("'")
    if digits.isdigit():
        return (0, int(digits), len(text) - len(digits), '')
    return (1, 0, 0, text)


def _key_sort(key):
    if isinstance(key, tuple):
        return (vertex_key(key[0]), key[1])
    return (vertex_key(key), 0)


def framed_vertex(i):
    return f"{i}'"


def encode_vertex(vertex):
    if isinstance(vertex, tuple):
        return f'{vertex[0]},{vertex[1]}'
    return str(vertex)


def decode_vertex(text):
    text = str(text)
    if ',' in text:
        name, k = text.split(',', 1)
        try:
            return (name.strip(), int(k))
        except ValueError as e:
            raise QuiverError(f'malformed graded vertex {text!r}') from e
    return text.strip()


@dataclass(frozen=True)
class Arrow:
    source: object
    target: object
    label: str


@dataclass(frozen=True)
class QuiverData:
    """
    A quiver together with the Cartan data of its base quiver.

    cartan rows and columns follow cartan_vertices (the base vertex set I).
    kind is 'base' or the derived construction that produced the quiver;
    graded quivers also carry their k-window.
    """
    type: str
    vertices: tuple
    arrows: tuple
    cartan_vertices: tuple
    cartan: tuple
    kind: str = BASE
    window: tuple = None

    def c(self, i, j):
        try:
            a = self.cartan_vertices.index(str(i))
            b = self.cartan_vertices.index(str(j))
        except ValueError as e:
            raise QuiverError(f'vertex {i!r} or {j!r} is not in {self.type}') from e
        return self.cartan[a][b]

    def neighbors(self, i):
        return [j for j in self.cartan_vertices if j != str(i) and self.c(i, j) < 0]

    def orientation(self):
        """o_ij = +1 for an arrow i -> j between distinct base vertices, -1 for j -> i."""
        signs = {}
        for arrow in self.arrows:
            if arrow.source != arrow.target and arrow.source in self.cartan_vertices \
                    and arrow.target in self.cartan_vertices and not arrow.label.endswith('*'):
                signs[(arrow.source, arrow.target)] = 1
                signs[(arrow.target, arrow.source)] = -1
        return signs

    def is_dynkin(self):
        return self.type[:1] in ('A', 'D', 'E') and self.type[1:].isdigit()

    def rank(self):
        return len(self.cartan_vertices)


def _cartan_from_arrows(vertices, arrows):
    index = {v: n for n, v in enumerate(vertices)}
    size = len(vertices)
    matrix = [[2 if a == b else 0 for b in range(size)] for a in range(size)]
    for arrow in arrows:
        s, t = index[arrow.source], index[arrow.target]
        if s == t:
            matrix[s][s] -= 2
        else:
            matrix[s][t] -= 1
            matrix[t][s] -= 1
    return tuple(tuple(row) for row in matrix)


def dynkin_quiver(type_name):
    """
    Dynkin quiver of type A_n or D_4 with arrows alpha_i.

    A_n: alpha_i : i+1 -> i.  D_4: vertex 2 is the centre, alpha_j : j -> 2.
    """
    name = type_name.upper()
    if name.startswith('A') and name[1:].isdigit() and int(name[1:]) >= 1:
        n = int(name[1:])
        vertices = tuple(str(i) for i in range(1, n + 1))
        arrows = tuple(Arrow(str(i + 1), str(i), f'alpha{i}') for i in range(1, n))
    elif name == 'D4':
        vertices = ('1', '2', '3', '4')
        arrows = tuple(Arrow(j, '2', f'alpha{j}') for j in ('1', '3', '4'))
    else:
        raise QuiverError(f'unsupported Dynkin type {type_name!r}')
    return QuiverData(name, vertices, arrows, vertices, _cartan_from_arrows(vertices, arrows))


def jordan_quiver():
    """One vertex with one loop; Cartan matrix (0)."""
    arrows = (Arrow('1', '1', 'alpha1'),)
    return QuiverData('jordan', ('1',), arrows, ('1',), _cartan_from_arrows(('1',), arrows))


def quiver_from_type(type_name):
    if type_name.lower() == 'jordan':
        return jordan_quiver()
    return dynkin_quiver(type_name)


def validate_quiver(quiver):
    size = len(quiver.cartan_vertices)
    if len(quiver.cartan) != size or any(len(row) != size for row in quiver.cartan):
        raise QuiverError('Cartan matrix shape does not match the vertex set')
    for a in range(size):
        for b in range(size):
            if quiver.cartan[a][b] != quiver.cartan[b][a]:
                raise QuiverError('Cartan matrix is not symmetric')
    if quiver.is_dynkin() and any(quiver.cartan[a][a] != 2 for a in range(size)):
        raise QuiverError('Dynkin Cartan matrix must have 2 on the diagonal')
    if quiver.kind == BASE:
        linked = {(a.source, a.target) for a in quiver.arrows} | {(a.target, a.source) for a in quiver.arrows}
        for i in quiver.cartan_vertices:
            for j in quiver.cartan_vertices:
                if i != j and (quiver.c(i, j) < 0) != ((i, j) in linked):
                    raise QuiverError(f'Cartan entry ({i},{j}) disagrees with the arrows')
    return quiver


def default_degree(label):
    """Degree of an arrow label of a derived quiver: alpha, alpha*, a, a* -> -1; eps -> 2."""
    if label.startswith('eps'):
        return LOOP_DEGREE
    if label.startswith('alpha') or label.startswith('a'):
        return ARROW_DEGREE
    return None


def derive_quiver(quiver, kind, degree_map=None, window=None):
    """
    Build a derived quiver.

    Args:
        quiver: base QuiverData (any QuiverData for kind='graded')
        kind: one of DERIVED_KINDS
        degree_map: arrow label -> degree, graded kind only; labels missing from
            it fall back to default_degree
        window: (k_min, k_max) for the graded kind

    Returns:
        QuiverData with the same Cartan data and a deterministic arrow order
    """
    if kind not in DERIVED_KINDS:
        raise QuiverError(f'unknown quiver construction {kind!r}')
    if kind == 'graded':
        return _graded_quiver(quiver, degree_map or {}, window)
    if quiver.kind != BASE:
        raise QuiverError(f'{kind} quiver must be built from a base quiver, got {quiver.kind}')

    base = list(quiver.arrows)
    starred = [Arrow(a.target, a.source, f'{a.label}*') for a in base]
    loops = [Arrow(i, i, f'eps{i}') for i in quiver.vertices]
    framing = [Arrow(i, framed_vertex(i), f'a{i}') for i in quiver.vertices]
    coframing = [Arrow(framed_vertex(i), i, f'a{i}*') for i in quiver.vertices]
    framed_vertices = tuple(quiver.vertices) + tuple(framed_vertex(i) for i in quiver.vertices)

    if kind == 'double':
        vertices, arrows = quiver.vertices, base + starred
    elif kind == 'triple':
        vertices, arrows = quiver.vertices, base + starred + loops
    elif kind == 'framed':
        vertices, arrows = framed_vertices, base + framing
    elif kind == 'framed_double':
        vertices, arrows = framed_vertices, base + starred + framing + coframing
    elif kind == 'framed_triple':
        vertices, arrows = framed_vertices, base + starred + framing + coframing + loops
    else:
        vertices, arrows = framed_vertices, base + starred + loops + framing

    logger.debug(f'Derived {kind} quiver of {quiver.type}: {len(vertices)} vertices, {len(arrows)} arrows')
    return QuiverData(quiver.type, tuple(vertices), tuple(arrows), quiver.cartan_vertices,
                      quiver.cartan, kind=kind)


def _graded_quiver(quiver, degree_map, window):
    if window is None:
        raise QuiverError('graded quiver needs a finite window (k_min, k_max)')
    k_min, k_max = window
    if k_min > k_max:
        raise QuiverError(f'empty window [{k_min}, {k_max}]')
    degrees = {}
    for arrow in quiver.arrows:
        degree = degree_map.get(arrow.label, default_degree(arrow.label))
        if degree is None:
            raise QuiverError(f'degree map is missing arrow {arrow.label!r}')
        degrees[arrow.label] = degree
    ks = range(k_min, k_max + 1)
    vertices = tuple((v, k) for v in quiver.vertices for k in ks)
    arrows = []
    for arrow in quiver.arrows:
        for k in ks:
            target_k = degrees[arrow.label] + k
            if k_min <= target_k <= k_max:
                arrows.append(Arrow((arrow.source, k), (arrow.target, target_k), f'{arrow.label}@{k}'))
    kind = 'graded' if quiver.kind == BASE else f'graded_{quiver.kind}'
    return QuiverData(quiver.type, vertices, tuple(arrows), quiver.cartan_vertices, quiver.cartan,
                      kind=kind, window=(k_min, k_max))


@dataclass(frozen=True)
class DimVec:
    """Finitely supported integer vector on I or on I x Z; zero entries are not stored."""
    support: str
    values: tuple = ()

    @classmethod
    def from_mapping(cls, mapping, support=None):
        items = {}
        for key, n in dict(mapping).items():
            if isinstance(key, tuple):
                key = (str(key[0]), int(key[1]))
            else:
                key = str(key)
            items[key] = items.get(key, 0) + int(n)
        keys_graded = {isinstance(k, tuple) for k in items}
        if len(keys_graded) > 1:
            raise QuiverError('dimension vector mixes I and I x Z labels')
        inferred = SUPPORT_IXZ if keys_graded == {True} else SUPPORT_I
        if support is None:
            support = inferred
        elif items and support != inferred:
            raise QuiverError(f'dimension vector labels do not live on {support}')
        values = tuple(sorted(((k, n) for k, n in items.items() if n), key=lambda kn: _key_sort(kn[0])))
        return cls(support, values)

    @classmethod
    def zero(cls, support=SUPPORT_I):
        return cls(support, ())

    @classmethod
    def delta(cls, i, k=None):
        if k is None:
            return cls.from_mapping({str(i): 1}, SUPPORT_I)
        return cls.from_mapping({(str(i), k): 1}, SUPPORT_IXZ)

    def as_dict(self):
        return dict(self.values)

    def items(self):
        return self.values

    def get(self, key):
        if isinstance(key, tuple):
            key = (str(key[0]), int(key[1]))
        else:
            key = str(key)
        return self.as_dict().get(key, 0)

    def total(self):
        return sum(n for _, n in self.values)

    def is_zero(self):
        return not self.values

    def is_nonnegative(self):
        return all(n >= 0 for _, n in self.values)

    def _combine(self, other, sign):
        if self.support != other.support:
            raise QuiverError(f'mismatched supports {self.support} and {other.support}')
        merged = self.as_dict()
        for key, n in other.values:
            merged[key] = merged.get(key, 0) + sign * n
        return DimVec.from_mapping(merged, self.support)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return DimVec(self.support, tuple((k, -n) for k, n in self.values))

    def __rmul__(self, scalar):
        return DimVec.from_mapping({k: scalar * n for k, n in self.values}, self.support)

    def __le__(self, other):
        return (other - self).is_nonnegative()

    def to_json(self):
        return {encode_vertex(k): n for k, n in self.values}

    @classmethod
    def from_json(cls, data, support=None):
        return cls.from_mapping({decode_vertex(k): n for k, n in data.items()}, support)

    def __str__(self):
        return json.dumps(self.to_json(), separators=(',', ':'))


def cartan_apply(quiver, v, w):
    """
    w - c v.

    Ungraded: (w - c v)_i = w_i - sum_j c_ij v_j.
    Graded: (w - c v)_{i,k} = w_{i,k} - v_{i,k+1} - v_{i,k-1} - sum_{j != i} c_ij v_{j,k}.
    """
    if v.support != w.support:
        raise QuiverError(f'mismatched supports {v.support} and {w.support}')
    result = w.as_dict()
    if v.support == SUPPORT_I:
        for j, n in v.values:
            for i in quiver.cartan_vertices:
                result[i] = result.get(i, 0) - quiver.c(i, j) * n
    else:
        for (j, k), n in v.values:
            for neighbour_k in (k - 1, k + 1):
                result[(j, neighbour_k)] = result.get((j, neighbour_k), 0) - n
            for i in quiver.cartan_vertices:
                if i != j:
                    result[(i, k)] = result.get((i, k), 0) - quiver.c(i, j) * n
    return DimVec.from_mapping(result, v.support)


def is_l_dominant(d):
    return d.is_nonnegative()


def hall_pairing(quiver, v1, v2):
    """(v1 | v2) = sum over arrows alpha: i -> j of v1_i v2_j."""
    if v1.support != SUPPORT_I or v2.support != SUPPORT_I:
        raise QuiverError('the Hall pairing is defined on ungraded dimension vectors only')
    first, second = v1.as_dict(), v2.as_dict()
    return sum(first.get(a.source, 0) * second.get(a.target, 0) for a in quiver.arrows)


def hall_sign(quiver, v1, v2):
    """Sign twist (-1)^(v1|v2) of the twisted Hall multiplication."""
    return -1 if hall_pairing(quiver, v1, v2) % 2 else 1


def cartan_minors(quiver):
    """Leading principal minors of the Cartan matrix."""
    matrix = sympy.Matrix(quiver.cartan)
    return [int(matrix[:n, :n].det()) for n in range(1, matrix.rows + 1)]


def is_positive_definite(quiver):
    return all(minor > 0 for minor in cartan_minors(quiver))


def quiver_to_dict(quiver):
    data = {
        'type': quiver.type,
        'vertices': [encode_vertex(v) for v in quiver.vertices],
        'arrows': [[encode_vertex(a.source), encode_vertex(a.target), a.label] for a in quiver.arrows],
        'cartan': [list(row) for row in quiver.cartan],
    }
    if quiver.kind != BASE:
        data['kind'] = quiver.kind
        data['cartan_vertices'] = list(quiver.cartan_vertices)
    if quiver.window is not None:
        data['window'] = list(quiver.window)
    return data


def quiver_from_dict(data):
    """Parse a quiver description (the JSON quiver file format)."""
    spec = QuiverFile.model_validate(data)
    vertices = tuple(decode_vertex(v) for v in spec.vertices)
    arrows = tuple(Arrow(decode_vertex(s), decode_vertex(t), label) for s, t, label in spec.arrows)
    known = set(vertices)
    for arrow in arrows:
        if arrow.source not in known or arrow.target not in known:
            raise QuiverError(f'arrow {arrow.label!r} has an endpoint outside the vertex set')
    kind = spec.kind or BASE
    cartan_vertices = tuple(spec.cartan_vertices) if spec.cartan_vertices else vertices
    if spec.cartan is None:
        if kind != BASE:
            raise QuiverError('derived quiver descriptions must carry their Cartan matrix')
        cartan = _cartan_from_arrows(vertices, arrows)
    else:
        cartan = tuple(tuple(row) for row in spec.cartan)
    quiver = QuiverData(spec.type, vertices, arrows, cartan_vertices, cartan, kind=kind,
                        window=tuple(spec.window) if spec.window else None)
    return validate_quiver(quiver)


def load_quiver(path):
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise QuiverError(f'quiver file {path} is not valid JSON: {e}') from e
    return quiver_from_dict(data)


def dump_quiver(quiver):
    return json.dumps(quiver_to_dict(quiver), separators=(',', ':'))
