from ._base import PipelineCommand


class Command(PipelineCommand):
    help = 'Apply a named slice function to a normal matrix through its spectral measure.'
    command_name = 'apply'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--fn',
            default='id',
            help='Function: id, re, immag, sq, sqrt, exp, exp_re, inv, abs2, const:<c> or chi:<k>',
        )
