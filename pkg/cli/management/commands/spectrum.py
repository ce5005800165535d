from ._base import PipelineCommand


class Command(PipelineCommand):
    help = 'S-spectrum of a quaternionic matrix as eigenspheres (representative, multiplicity, projection).'
    command_name = 'spectrum'
