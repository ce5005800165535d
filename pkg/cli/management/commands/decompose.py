from ._base import PipelineCommand


class Command(PipelineCommand):
    help = 'Split a normal matrix as T = A + J B and report the decomposition checks.'
    command_name = 'decompose'
