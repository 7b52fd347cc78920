from .errors import *
from .config import LabSettings, ConfigObject
from .autodiff import Rng, Tensor, ComputeTape, backward
from .data import *
from .text_encoder import FrozenTextEncoder, tokenize
from .encoders import EncoderConfig, GCNEncoder, GATEncoder, build_encoder, \
    load_encoder
from .training import *
from .victim_api import DefenseConfig, QueryRecord, VictimHandle
from .attacks import *
from .evaluation import *
from .lab import Lab
