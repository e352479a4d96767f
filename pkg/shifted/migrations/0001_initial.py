# Generated by Django 5.2.6 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunManifest',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=100)),
                ('parameters', models.JSONField(default=dict)),
                ('library_version', models.CharField(max_length=20)),
                ('wall_clock_seconds', models.FloatField()),
                ('output_digest', models.CharField(max_length=64)),
                ('date_created', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'run_manifests',
                'ordering': ['-date_created'],
                'constraints': [models.UniqueConstraint(fields=('command', 'output_digest'), name='unique_command_digest')],
            },
        ),
    ]
