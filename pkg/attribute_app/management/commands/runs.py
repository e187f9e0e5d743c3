from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError
from rest_framework.renderers import JSONRenderer

from attribute_app.models import RunRecord
from attribute_app.serializers import RunRecordSerializer


class Command(BaseCommand):
    help = 'List recent runs from the run registry as JSON.'

    def add_arguments(self, parser):
        parser.add_argument('--limit', type=int, default=20)
        parser.add_argument('--command', dest='run_command', default=None,
                            help='only runs of this command')
        parser.add_argument('--status', default=None)

    def handle(self, *args, **options):
        if options['limit'] < 1:
            raise CommandError('--limit must be at least 1', returncode=2)
        runs = RunRecord.objects.all()
        if options['run_command']:
            runs = runs.filter(command=options['run_command'])
        if options['status']:
            runs = runs.filter(status=options['status'].upper())
        try:
            data = RunRecordSerializer(runs[:options['limit']], many=True).data
        except DatabaseError as exc:
            raise CommandError(f"run registry unavailable: {exc}",
                               returncode=1) from exc
        body = JSONRenderer().render(data, renderer_context={'indent': 2})
        self.stdout.write(body.decode('utf-8'))
