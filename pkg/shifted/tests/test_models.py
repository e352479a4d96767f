import io
from contextlib import redirect_stdout

from django.db import IntegrityError, transaction
from django.test import TestCase

import qlg
from shifted import __version__
from shifted.models import RunManifest


class RunManifestTests(TestCase):

    def record(self, *argv):
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            code = qlg.main(list(argv) + ['--record'])
        self.assertEqual(code, 0)
        return buffer.getvalue().strip()

    def test_record_creates_manifest(self):
        text = self.record('quot', 'poincare', '--w', '2', '--v', '1', '--punctual')
        manifest = RunManifest.objects.get()
        self.assertEqual(manifest.command, 'quot poincare')
        self.assertEqual(manifest.output_digest, qlg.output_digest(text))
        self.assertEqual(manifest.library_version, __version__)
        self.assertEqual(manifest.parameters['w'], 2)
        self.assertTrue(manifest.parameters['punctual'])
        self.assertGreaterEqual(manifest.wall_clock_seconds, 0)

    def test_repeated_run_updates_manifest(self):
        argv = ('qchar', 'kr', '--type', 'A1', '--i', '1', '--k', '0', '--l', '2', '--summary')
        self.record(*argv)
        self.record(*argv)
        self.assertEqual(RunManifest.objects.count(), 1)

    def test_different_outputs_are_separate_rows(self):
        self.record('quot', 'cells', '--w', '2', '--v', '1')
        self.record('quot', 'cells', '--w', '2', '--v', '2')
        self.assertEqual(RunManifest.objects.filter(command='quot cells').count(), 2)

    def test_digest_is_unique_per_command(self):
        RunManifest.objects.create(command='cartan', parameters={}, library_version=__version__,
                                   wall_clock_seconds=0.1, output_digest='a' * 64)
        with self.assertRaises(IntegrityError), transaction.atomic():
            RunManifest.objects.create(command='cartan', parameters={}, library_version=__version__,
                                       wall_clock_seconds=0.2, output_digest='a' * 64)

    def test_str(self):
        manifest = RunManifest(command='cartan', output_digest='0123456789abcdef' * 4)
        self.assertEqual(str(manifest), 'cartan (0123456789ab)')
