"""
Run every CLI command twice and compare the sha256 digests of the outputs.

Usage: python helper_scripts/determinism_check.py
"""
import io
import os
import sys
from contextlib import redirect_stdout

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import qlg
from logger_config import setup_logger

logger = setup_logger(__name__)

COMMANDS = [
    ['quiver', 'derive', '--type', 'A2', '--kind', 'framed_triple'],
    ['cartan', '--type', 'A2', '--w', '{"1":2}', '--v', '{"1":1,"2":1}'],
    ['qchar', 'kr', '--type', 'A1', '--i', '1', '--k', '0', '--l', '3', '--summary'],
    ['qchar', 'kr', '--type', 'A3', '--i', '2', '--k', '0', '--l', '1'],
    ['qchar', 'hj-limit', '--type', 'A1', '--i', '1', '--l-max', '4', '--cap', '3'],
    ['qchar', 'tpkr', '--type', 'A2', '--l', '4', '--variant', 'b', '--tuple', '1,2,2'],
    ['qchar', 'tpkr', '--random', '20'],
    ['relations', 'catalogue', '--kind', 'toroidal', '--w', '1'],
    ['relations', 'check', '--preset', 'a1-lattice', '--w', '1', '--cap', '3', '--window', '2'],
    ['relations', 'check', '--preset', 'trivial-line', '--kind', 'toroidal', '--w', '-1', '--window', '2'],
    ['lattice', 'coeff', '--lam', '0,1', '--mu', '1,1', '--n', '0', '--op', 'x+'],
    ['lattice', 'commutator', '--w', '2', '--lam', '1,0', '--m', '1', '--n', '-1'],
    ['lattice', 'psi', '--lam', '1', '--sign', '+', '--trunc', '3'],
    ['quot', 'poincare', '--w', '2', '--v', '1', '--punctual'],
    ['quot', 'cells', '--w', '3', '--v', '2'],
    ['grass', 'enum', '--type', 'A3', '--i', '2', '--l', '1'],
    ['grass', 'euler-vs-kr', '--type', 'A1', '--i', '1', '--l', '3'],
]


def run_once(argv):
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = qlg.main(argv)
    return code, qlg.output_digest(buffer.getvalue())


def main():
    mismatches = 0
    for argv in COMMANDS:
        first = run_once(argv)
        second = run_once(argv)
        command = ' '.join(argv[:2])
        if first != second:
            mismatches += 1
            logger.error(f"Non-deterministic output: {command}")
        else:
            logger.info(f"{command}: exit {first[0]}, digest {first[1][:12]}")
    if mismatches:
        logger.error(f"{mismatches} commands differ between runs")
        sys.exit(1)
    logger.info(f"All {len(COMMANDS)} commands are byte-identical across runs")


if __name__ == "__main__":
    main()
