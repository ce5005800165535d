"""
Shared option handling for the pipeline commands.

Exit codes: 0 ok, 1 a verification check failed, 2 bad input or options,
3 an iteration did not converge, 4 the matrix is not normal.
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from cli.models import FORMATS
from cli.serializers import build_run_config
from cli.services import EXIT_VERIFY_FAILED, PIPELINES, emit, exit_code_for
from core.exceptions import QSpecError

logger = logging.getLogger("cli")


class PipelineCommand(BaseCommand):
    command_name = ""

    def add_arguments(self, parser):
        parser.add_argument('--input', default=None, help='Matrix JSON file (verify also takes a corpus directory)')
        parser.add_argument('--output', default=None, help='Write the report here instead of stdout')
        parser.add_argument('--j', default=None, help='Imaginary unit: e1, e2, e3 or "a,b,c" (default: QSPEC_DEFAULT_J)')
        parser.add_argument('--atol', type=float, default=None, help='Absolute tolerance (default: QSPEC_ATOL)')
        parser.add_argument('--rtol', type=float, default=None, help='Relative tolerance (default: QSPEC_RTOL)')
        parser.add_argument('--seed', type=int, default=None, help='Random seed (default: QSPEC_SEED)')
        parser.add_argument('--format', choices=FORMATS, default='json', help='Report format')

    def handle(self, *args, **options):
        try:
            cfg = build_run_config(self.command_name, options)
            result = PIPELINES[self.command_name](cfg)
            text = emit(result, cfg)
        except QSpecError as exc:
            code = exit_code_for(exc)
            logger.error("%s failed (exit %d): %s", self.command_name, code, exc)
            raise CommandError(str(exc), returncode=code) from exc
        except OSError as exc:
            logger.error("%s could not write its report: %s", self.command_name, exc)
            raise CommandError(str(exc), returncode=exit_code_for(exc)) from exc

        if cfg.output is None:
            self.stdout.write(text, ending="")
        else:
            self.stdout.write(self.style.SUCCESS(f'{self.command_name} report written to {cfg.output}'))

        if not result.passed:
            shown = ", ".join(result.failures[:10]) or "see report"
            raise CommandError(f'{self.command_name}: checks failed: {shown}', returncode=EXIT_VERIFY_FAILED)
