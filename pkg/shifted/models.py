from django.db import models


class RunManifest(models.Model):
    """One recorded CLI run; identical inputs give identical output digests."""
    command = models.CharField(max_length=100)
    parameters = models.JSONField(default=dict)
    library_version = models.CharField(max_length=20)
    wall_clock_seconds = models.FloatField()
    output_digest = models.CharField(max_length=64)  # sha256 hex of the output bytes
    date_created = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'run_manifests'
        ordering = ['-date_created']
        constraints = [
            models.UniqueConstraint(fields=['command', 'output_digest'], name='unique_command_digest'),
        ]

    def __str__(self):
        return f"{self.command} ({self.output_digest[:12]})"
