from ._base import PipelineCommand


class Command(PipelineCommand):
    help = (
        'Run every property check on one matrix, on a corpus directory (with .golden.json '
        'comparisons), or without --input on a seeded random suite.'
    )
    command_name = 'verify'
