"""
Command-line front end of the shifted quantum loop group library.

Usage:
    python qlg.py quiver derive --type A2 --kind triple
    python qlg.py cartan --type A2 --w '{"1":1}' --v '{"1":1}'
    python qlg.py qchar kr --type A1 --i 1 --k 0 --l 3 --summary
    python qlg.py qchar hj-limit --type A1 --i 1 --k 0 --l-max 5 --cap 3
    python qlg.py qchar tpkr --type A2 --l 4 --variant b --tuple 1,2,2
    python qlg.py qchar tpkr --random 20
    python qlg.py relations catalogue --kind toroidal --w 1
    python qlg.py relations check --preset a1-lattice --w 1 --cap 3 --window 2
    python qlg.py relations check --preset trivial-line --kind toroidal --w -1 --window 2
    python qlg.py lattice coeff --lam 0,1 --mu 1,1 --n 0 --op x+
    python qlg.py lattice commutator --w 2 --lam 1,0 --m 1 --n -1
    python qlg.py lattice psi --lam 1 --sign + --trunc 4
    python qlg.py quot poincare --w 2 --v 1 --punctual
    python qlg.py quot cells --w 2 --v 3
    python qlg.py grass enum --type A3 --i 2 --k 0 --l 1
    python qlg.py grass euler-vs-kr --type A2 --i 1 --k 0 --l 1
    python qlg.py schema export --out-dir schemas

Every command prints one compact JSON object on stdout (or a table with
--format table). Exit codes: 0 success, 1 domain error (JSON diagnostic on
stdout), 2 usage error. --record stores a RunManifest row.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'qloopcalc.settings')
django.setup()

from django.conf import settings

from logger_config import setup_logger
from shifted import __version__
from shifted import schemas
from shifted.exceptions import QloopError, UsageError
from shifted.grassmannian import (
    GradedModule, all_graded_submodules, build_injective, enumerate_graded_submodules, euler_vs_kr,
)
from shifted.lattice_rep import (
    MINUS, PLUS, Lambda, build_operator_table, commutator_check, format_ascending,
    matrix_coefficients, psi_series_a1, quot_cells, quot_poincare,
)
from shifted.models import RunManifest
from shifted.qchar import (
    VARIANT_A, VARIANT_B, KRSpec, fm_qcharacter, hj_limit, polynomial_lweight,
    random_tpkr_sweep, socle_bound_check, tpkr_criterion,
)
from shifted.qloop import (
    SIMPLY_LACED, TOROIDAL, PresentationSpec, check_relations, highest_weight_line, relation_catalogue,
)
from shifted.quiver_core import (
    DERIVED_KINDS, SUPPORT_I, SUPPORT_IXZ, DimVec, cartan_apply, derive_quiver, is_l_dominant,
    load_quiver, quiver_from_type, quiver_to_dict,
)

logger = setup_logger('qlg')

KIND_NAMES = {
    'simply-laced': SIMPLY_LACED,
    SIMPLY_LACED: SIMPLY_LACED,
    'toroidal': TOROIDAL,
    TOROIDAL: TOROIDAL,
}
SIGN_NAMES = {'+': PLUS, 'plus': PLUS, '-': MINUS, 'minus': MINUS}
PRESETS = ('a1-lattice', 'trivial-line')


class QlgArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------

def _json_arg(text, name):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f'--{name} is not valid JSON: {e}') from e


def _int_list(text, name):
    try:
        return tuple(int(part) for part in text.split(',') if part.strip() != '')
    except ValueError as e:
        raise UsageError(f'--{name} must be comma-separated integers, got {text!r}') from e


def _lambda(text, name='lam'):
    return Lambda(_int_list(text, name))


def _quiver(args):
    if getattr(args, 'quiver', None):
        return load_quiver(args.quiver)
    if getattr(args, 'type', None):
        return quiver_from_type(args.type)
    raise UsageError('give --type or --quiver')


def _dimvecs(first, second):
    """Two DimVecs from JSON objects; an empty one takes the support of the other."""
    a = DimVec.from_json(first)
    b = DimVec.from_json(second)
    if a.is_zero() and not b.is_zero():
        a = DimVec.zero(b.support)
    if b.is_zero() and not a.is_zero():
        b = DimVec.zero(a.support)
    return a, b


def _shift(quiver, args):
    """Shift vector: --shift JSON, else --w on every vertex."""
    if getattr(args, 'shift', None):
        return DimVec.from_json(_json_arg(args.shift, 'shift'), SUPPORT_I)
    return DimVec.from_mapping({i: args.w for i in quiver.cartan_vertices}, SUPPORT_I)


def _presentation(args, default_type):
    kind = KIND_NAMES.get(args.kind)
    if kind is None:
        raise UsageError(f'unknown presentation kind {args.kind!r}')
    if kind == TOROIDAL:
        quiver = quiver_from_type('jordan')
    else:
        quiver = _quiver(args) if (args.type or args.quiver) else quiver_from_type(default_type)
    return PresentationSpec(kind, quiver, _shift(quiver, args))


# ---------------------------------------------------------------------------
# Command handlers: each returns (output model, data)
# ---------------------------------------------------------------------------

def cmd_quiver_derive(args):
    quiver = _quiver(args)
    window = tuple(args.window) if args.window else None
    derived = derive_quiver(quiver, args.kind, window=window) if args.kind != 'base' else quiver
    return schemas.QuiverFile, quiver_to_dict(derived)


def cmd_cartan(args):
    quiver = _quiver(args)
    w, v = _dimvecs(_json_arg(args.w, 'w'), _json_arg(args.v, 'v'))
    d = cartan_apply(quiver, v, w)
    return schemas.CartanResult, {'result': d.to_json(), 'l_dominant': is_l_dominant(d)}


def cmd_qchar_kr(args):
    quiver = _quiver(args)
    character = fm_qcharacter(quiver, KRSpec(args.i, args.k, args.l), args.step_cap, args.threads)
    if args.summary:
        return schemas.KRSummary, {'dim': character.dim(), 'dominant_count': character.dominant_count()}
    return schemas.KRCharacter, character.to_dict()


def cmd_qchar_hj_limit(args):
    quiver = _quiver(args)
    return schemas.HJLimitResult, hj_limit(quiver, args.i, args.k, args.l_max, args.cap,
                                           args.step_cap, args.threads)


def cmd_qchar_tpkr(args):
    if args.random is not None:
        return schemas.TPKRSweepResult, random_tpkr_sweep(args.random, args.seed)
    if not args.tuple:
        raise UsageError('give at least one --tuple i,k,l or --random N')
    if args.l is None:
        raise UsageError('--l is required without --random')
    quiver = _quiver(args)
    tuples = []
    for text in args.tuple:
        parts = text.split(',')
        if len(parts) != 3:
            raise UsageError(f'--tuple takes i,k,l, got {text!r}')
        try:
            tuples.append((parts[0].strip(), int(parts[1]), int(parts[2])))
        except ValueError as e:
            raise UsageError(f'--tuple takes integers k and l, got {text!r}') from e
    criterion = tpkr_criterion(tuples, args.l, args.variant)
    certificate = socle_bound_check(quiver, tuples, args.l, args.variant)
    return schemas.TPKRResult, {'criterion': criterion, 'certificate': certificate.to_dict()}


def cmd_relations_catalogue(args):
    spec = _presentation(args, 'A1')
    relations = [{'name': r.name, 'family': r.family, 'statement': r.statement,
                  'vertices': list(r.vertices), 'convention': r.convention}
                 for r in relation_catalogue(spec)]
    return schemas.CatalogueResult, {'kind': spec.kind, 'relations': relations}


def cmd_relations_check(args):
    if args.preset == 'a1-lattice':
        if args.w < 1:
            raise UsageError('the A1 lattice preset needs --w >= 1')
        spec = PresentationSpec(SIMPLY_LACED, quiver_from_type('A1'), DimVec.from_mapping({'1': args.w}, SUPPORT_I))
        table = build_operator_table(args.w, args.cap, args.window, args.threads)
    else:
        spec = _presentation(args, 'A1')
        lweights = {}
        for i in spec.vertices:
            w_i = spec.w(i)
            if w_i > 0:
                raise UsageError('a one-dimensional highest-weight line needs a polynomial l-weight, so w <= 0')
            lweights.update(polynomial_lweight(i, range(1, -w_i + 1)))
        table = highest_weight_line(spec, lweights, args.window)
    report = check_relations(spec, table, args.window, args.relation, args.threads)
    counts = report.counts()
    data = {'pass': counts['pass'], 'fail': counts['fail'], 'undetermined': counts['undetermined']}
    if args.entries:
        data['entries'] = report.entries
    elif report.failures():
        data['entries'] = report.failures()
    return schemas.RelationsReport, data


def cmd_lattice_coeff(args):
    lam, mu = _lambda(args.lam), _lambda(args.mu, 'mu')
    return schemas.LatticeCoeffResult, matrix_coefficients(lam, mu, args.n, args.op)


def cmd_lattice_commutator(args):
    certificate = commutator_check(args.w, _lambda(args.lam), args.m, args.n)
    return schemas.CommutatorResult, certificate.to_dict()


def cmd_lattice_psi(args):
    lam = _lambda(args.lam)
    sign = SIGN_NAMES[args.sign]
    trunc = settings.QLG_DEFAULT_TRUNC if args.trunc is None else args.trunc
    series = psi_series_a1(lam, sign, trunc)
    return schemas.PsiResult, {'lam': list(lam.parts), 'sign': sign, 'trunc': trunc,
                               'coefficients': series.to_dict()}


def cmd_quot_poincare(args):
    poly, euler = quot_poincare(args.w, args.v, args.punctual)
    return schemas.QuotResult, {'poly': format_ascending(poly, 't'), 'euler': euler}


def cmd_quot_cells(args):
    return schemas.QuotCellsResult, {'cells': quot_cells(args.w, args.v)}


def _module(args):
    if args.module:
        with open(args.module, encoding='utf-8') as handle:
            return GradedModule.from_dict(json.load(handle))
    if args.i is None or args.l is None:
        raise UsageError('give --module FILE or --type/--i/--k/--l')
    return build_injective(_quiver(args), args.i, args.k, args.l)


def cmd_grass_enum(args):
    module = _module(args)
    if args.v:
        v = DimVec.from_json(_json_arg(args.v, 'v'), SUPPORT_IXZ)
        certificates = enumerate_graded_submodules(module, v, args.threads)
    else:
        certificates = all_graded_submodules(module, args.threads)
    return schemas.GrassEnumResult, {'module_dim': len(module), 'count': len(certificates),
                                     'certificates': [cert.to_dict() for cert in certificates]}


def cmd_grass_euler_vs_kr(args):
    return schemas.EulerVsKrResult, euler_vs_kr(_quiver(args), args.i, args.k, args.l,
                                                args.threads, args.step_cap)


def schema_file_name(command):
    return command.replace(' --', '_').replace(' ', '_').replace('-', '_') + '.schema.json'


def cmd_schema_export(args):
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for command, model in schemas.COMMAND_MODELS.items():
        path = os.path.join(args.out_dir, schema_file_name(command))
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(model.model_json_schema(by_alias=True), handle, indent=2, sort_keys=True)
            handle.write('\n')
        written.append(path)
    logger.info(f'Wrote {len(written)} schemas to {args.out_dir}')
    return schemas.SchemaExportResult, {'written': written}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_parser():
    common = QlgArgumentParser(add_help=False)
    common.add_argument('--out', help='write the result to this file instead of stdout')
    common.add_argument('--format', choices=['json', 'table'], default='json')
    common.add_argument('--threads', type=int, default=settings.QLG_THREADS)
    common.add_argument('--seed', type=int, default=settings.QLG_SEED)
    common.add_argument('--record', action='store_true', help='store a RunManifest row')
    return common


def _quiver_args(parser):
    parser.add_argument('--type', required=False, help='A1..An, D4 or jordan')
    parser.add_argument('--quiver', help='quiver description file (JSON)')


def build_parser():
    common = _common_parser()
    parser = QlgArgumentParser(prog='qlg', description='Shifted quantum loop groups: exact computations.')
    groups = parser.add_subparsers(dest='group', required=True)

    def leaf(subparsers, name, handler, command, help_text):
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler, command=command)
        return sub

    # quiver
    quiver = groups.add_parser('quiver').add_subparsers(dest='action', required=True)
    sub = leaf(quiver, 'derive', cmd_quiver_derive, 'quiver derive', 'derived quiver construction')
    _quiver_args(sub)
    sub.add_argument('--kind', choices=('base',) + DERIVED_KINDS, default='double')
    sub.add_argument('--window', type=int, nargs=2, metavar=('K_MIN', 'K_MAX'))

    # cartan
    sub = groups.add_parser('cartan', parents=[common], help='w - c v and l-dominance')
    sub.set_defaults(handler=cmd_cartan, command='cartan')
    _quiver_args(sub)
    sub.add_argument('--w', required=True, help='JSON dimension vector')
    sub.add_argument('--v', required=True, help='JSON dimension vector')

    # qchar
    qchar = groups.add_parser('qchar').add_subparsers(dest='action', required=True)
    sub = leaf(qchar, 'kr', cmd_qchar_kr, 'qchar kr', 'Frenkel-Mukhin q-character of a KR module')
    _quiver_args(sub)
    sub.add_argument('--i', required=True)
    sub.add_argument('--k', type=int, required=True)
    sub.add_argument('--l', type=int, required=True)
    sub.add_argument('--summary', action='store_true')
    sub.add_argument('--step-cap', type=int, default=settings.QLG_FM_STEP_CAP)

    sub = leaf(qchar, 'hj-limit', cmd_qchar_hj_limit, 'qchar hj-limit', 'normalized KR characters as l grows')
    _quiver_args(sub)
    sub.add_argument('--i', required=True)
    sub.add_argument('--k', type=int, default=0)
    sub.add_argument('--l-max', type=int, default=5)
    sub.add_argument('--cap', type=int, default=3, help='A-degree cap')
    sub.add_argument('--step-cap', type=int, default=settings.QLG_FM_STEP_CAP)

    sub = leaf(qchar, 'tpkr', cmd_qchar_tpkr, 'qchar tpkr', 'tensor products of KR modules')
    _quiver_args(sub)
    sub.add_argument('--l', type=int)
    sub.add_argument('--variant', choices=[VARIANT_A, VARIANT_B], default=VARIANT_B)
    sub.add_argument('--tuple', action='append', help='i,k,l (repeatable)')
    sub.add_argument('--random', type=int, help='seeded random sweep of N configurations')

    # relations
    relations = groups.add_parser('relations').add_subparsers(dest='action', required=True)
    for name, handler in (('catalogue', cmd_relations_catalogue), ('check', cmd_relations_check)):
        sub = leaf(relations, name, handler, f'relations {name}', f'relations {name}')
        _quiver_args(sub)
        sub.add_argument('--kind', default='simply-laced', choices=sorted(KIND_NAMES))
        sub.add_argument('--w', type=int, default=0, help='shift on every vertex')
        sub.add_argument('--shift', help='JSON shift vector on I (overrides --w)')
    sub.add_argument('--preset', choices=PRESETS, required=True)
    sub.add_argument('--cap', type=int, default=3, help='weight cap of the truncated table')
    sub.add_argument('--window', type=int, default=2, help='mode window N')
    sub.add_argument('--relation', action='append', help='restrict to a relation name (repeatable)')
    sub.add_argument('--entries', action='store_true', help='list every instance')

    # lattice
    lattice = groups.add_parser('lattice').add_subparsers(dest='action', required=True)
    sub = leaf(lattice, 'coeff', cmd_lattice_coeff, 'lattice coeff', 'matrix coefficient of A+/A-')
    sub.add_argument('--lam', required=True)
    sub.add_argument('--mu', required=True)
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--op', choices=['x+', 'x-'], required=True)

    sub = leaf(lattice, 'commutator', cmd_lattice_commutator, 'lattice commutator', 'residue commutator identity')
    sub.add_argument('--w', type=int, required=True)
    sub.add_argument('--lam', required=True)
    sub.add_argument('--m', type=int, required=True)
    sub.add_argument('--n', type=int, required=True)

    sub = leaf(lattice, 'psi', cmd_lattice_psi, 'lattice psi', 'psi series on a fixed point')
    sub.add_argument('--lam', required=True)
    sub.add_argument('--sign', choices=sorted(SIGN_NAMES), required=True)
    sub.add_argument('--trunc', type=int)

    # quot
    quot = groups.add_parser('quot').add_subparsers(dest='action', required=True)
    sub = leaf(quot, 'poincare', cmd_quot_poincare, 'quot poincare', 'Poincare polynomial by cells')
    sub.add_argument('--w', type=int, required=True)
    sub.add_argument('--v', type=int, required=True)
    sub.add_argument('--punctual', action='store_true')
    sub = leaf(quot, 'cells', cmd_quot_cells, 'quot cells', 'cells indexed by compositions')
    sub.add_argument('--w', type=int, required=True)
    sub.add_argument('--v', type=int, required=True)

    # grass
    grass = groups.add_parser('grass').add_subparsers(dest='action', required=True)
    sub = leaf(grass, 'enum', cmd_grass_enum, 'grass enum', 'torus-fixed graded submodules')
    _quiver_args(sub)
    sub.add_argument('--i')
    sub.add_argument('--k', type=int, default=0)
    sub.add_argument('--l', type=int)
    sub.add_argument('--v', help='JSON graded dimension vector')
    sub.add_argument('--module', help='module description file (JSON)')
    sub = leaf(grass, 'euler-vs-kr', cmd_grass_euler_vs_kr, 'grass euler-vs-kr',
               'Grassmannian point count against dim KR')
    _quiver_args(sub)
    sub.add_argument('--i', required=True)
    sub.add_argument('--k', type=int, default=0)
    sub.add_argument('--l', type=int, required=True)
    sub.add_argument('--step-cap', type=int, default=settings.QLG_FM_STEP_CAP)

    # schema
    schema = groups.add_parser('schema').add_subparsers(dest='action', required=True)
    sub = leaf(schema, 'export', cmd_schema_export, 'schema export', 'write JSON schemas of all outputs')
    sub.add_argument('--out-dir', required=True)
    return parser


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def render(model_cls, data, output_format):
    """Validate data against its output model and serialize it."""
    model = model_cls.model_validate(data)
    text = model.model_dump_json(by_alias=True, exclude_none=True)
    if output_format == 'table':
        return render_table(json.loads(text))
    return text


def render_table(data):
    lines = []
    for key, value in data.items():
        if isinstance(value, list):
            lines.append(f'{key}:')
            for row in value:
                lines.append('  ' + (json.dumps(row, separators=(',', ':')) if isinstance(row, (dict, list)) else str(row)))
        elif isinstance(value, dict):
            lines.append(f'{key}:\t{json.dumps(value, separators=(",", ":"))}')
        else:
            lines.append(f'{key}:\t{json.dumps(value)}')
    return '\n'.join(lines)


def output_digest(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def record_run(command, parameters, seconds, digest):
    """Store one RunManifest row; failures are logged, never raised."""
    try:
        manifest, created = RunManifest.objects.update_or_create(
            command=command,
            output_digest=digest,
            defaults={
                'parameters': parameters,
                'library_version': __version__,
                'wall_clock_seconds': seconds,
            }
        )
        if created:
            logger.info(f"Recorded run of '{command}' ({digest[:12]})")
        else:
            logger.info(f"Updated run manifest of '{command}' ({digest[:12]})")
        return manifest
    except Exception as e:
        logger.error(f"Could not record run of '{command}': {e}")
        return None


def _parameters(args):
    skip = {'handler', 'command', 'group', 'action', 'out', 'format', 'record'}
    return {key: value for key, value in sorted(vars(args).items()) if key not in skip}


def _diagnostic(kind, message):
    return schemas.ErrorResult(error=kind, message=message).model_dump_json()


def main(argv=None):
    """
    Run one command.

    Args:
        argv: argument list without the program name (defaults to sys.argv[1:])

    Returns:
        process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logger.error(f'Usage error: {e}')
        print(_diagnostic(e.kind, str(e)))
        return 2

    started = time.perf_counter()
    try:
        model_cls, data = args.handler(args)
        text = render(model_cls, data, args.format)
    except UsageError as e:
        logger.error(f'Usage error in {args.command}: {e}')
        print(_diagnostic(e.kind, str(e)))
        return 2
    except QloopError as e:
        logger.error(f'{args.command} failed: {e}')
        print(_diagnostic(e.kind, str(e)))
        return 1
    except (ValueError, KeyError) as e:
        logger.error(f'{args.command} rejected its input: {e}')
        print(_diagnostic('invalid-input', str(e)))
        return 1
    except OSError as e:
        logger.error(f'{args.command} could not access a file: {e}')
        print(_diagnostic('io', str(e)))
        return 1
    seconds = time.perf_counter() - started

    if args.out:
        with open(args.out, 'w', encoding='utf-8') as handle:
            handle.write(text + '\n')
        logger.info(f'Wrote {args.command} result to {args.out}')
    else:
        print(text)

    if args.record:
        record_run(args.command, _parameters(args), seconds, output_digest(text))
    logger.debug(f'{args.command} finished in {seconds:.3f}s')
    return 0


if __name__ == "__main__":
    sys.exit(main())
