from ._base import PipelineCommand


class Command(PipelineCommand):
    help = 'Bounded transform Z_T = T (I + T*T)^(-1/2) with its identities and the recovery of T.'
    command_name = 'transform'
