import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError
from django.utils import timezone
from rest_framework.exceptions import ValidationError

from . import csvio
from .exceptions import InputError
from .models import RunRecord

logger = logging.getLogger(__name__)

EXIT_RUNTIME = 1
EXIT_USAGE = 2


def resolve_threads(threads=None):
    if threads is None:
        return settings.MMIDICT['THREADS']
    if threads < 1:
        raise InputError("--threads must be at least 1")
    return threads


def open_record(command, config):
    try:
        return RunRecord.objects.create(command=command, config=config,
                                        output=config.get('out', ''))
    except DatabaseError as exc:
        logger.warning("run registry unavailable (%s); run not recorded", exc)
        return None


def close_record(record, status, exit_code, message=''):
    if record is None:
        return
    record.status = status
    record.exit_code = exit_code
    record.message = message
    record.finished_at = timezone.now()
    try:
        record.save()
    except DatabaseError as exc:
        logger.warning("could not close run record %s: %s", record.pk, exc)


def validation_message(detail):
    if isinstance(detail, dict):
        return '; '.join(f"{key}: {validation_message(value)}"
                         for key, value in detail.items())
    if isinstance(detail, list):
        return ' '.join(validation_message(item) for item in detail)
    return str(detail)


class RunCommand(BaseCommand):
    """
    Base class of the computing commands: validates a RunConfig with
    ``config_serializer``, records the run, writes the config next to the
    primary output and maps failures to exit codes (2 for invalid input,
    1 for anything else).

    Subclasses declare their options in ``add_run_arguments`` with
    ``default=None`` so that values read from ``--config`` are only
    overridden by flags actually given.
    """
    config_serializer = None

    def add_arguments(self, parser):
        parser.add_argument('--config', default=None,
                            help='replay a written <out>.config.json')
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--threads', type=int, default=None,
                            help='worker cap (default MMIDICT_THREADS or '
                                 'all cores)')
        self.add_run_arguments(parser)

    def add_run_arguments(self, parser):
        pass

    def run(self, config, n_jobs):
        raise NotImplementedError

    def load_config(self, options):
        fields = self.config_serializer().fields
        data = {}
        if options.get('config'):
            data.update(csvio.read_config(options['config']))
        data.update({key: value for key, value in options.items()
                     if key in fields and value is not None})
        serializer = self.config_serializer(data=data)
        serializer.is_valid(raise_exception=True)
        return dict(serializer.data)

    def handle(self, *args, **options):
        command = self.__module__.rsplit('.', 1)[-1]
        try:
            n_jobs = resolve_threads(options.get('threads'))
            config = self.load_config(options)
        except ValidationError as exc:
            raise CommandError(f"invalid configuration: "
                               f"{validation_message(exc.detail)}",
                               returncode=EXIT_USAGE) from exc
        except InputError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE) from exc

        record = open_record(command, config)
        logger.info("%s started (run %s)", command,
                    record.pk if record else '-')
        try:
            self.run(config, n_jobs)
            written = csvio.write_config(
                config, csvio.sidecar(config['out'], 'config'))
        except InputError as exc:
            close_record(record, 'FAILED', EXIT_USAGE, str(exc))
            raise CommandError(str(exc), returncode=EXIT_USAGE) from exc
        except CommandError as exc:
            close_record(record, 'FAILED', exc.returncode, str(exc))
            raise
        except Exception as exc:
            logger.exception("%s failed", command)
            close_record(record, 'FAILED', EXIT_RUNTIME, str(exc))
            raise CommandError(f"{command} failed: {exc}",
                               returncode=EXIT_RUNTIME) from exc
        close_record(record, 'COMPLETED', 0)
        logger.info("%s finished; config written to %s", command, written)

