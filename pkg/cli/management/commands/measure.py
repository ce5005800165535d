from ._base import PipelineCommand


class Command(PipelineCommand):
    help = 'Spectral measure of a normal matrix on the slice C_j: atoms, projections and the N_j basis.'
    command_name = 'measure'
