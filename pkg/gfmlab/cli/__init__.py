from .experiment import ExperimentSpec
from .commands import main, build_parser, load_experiment
