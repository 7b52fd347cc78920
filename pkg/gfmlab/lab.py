import json
import logging
import sys
import tempfile
from os import makedirs, path

from .attacks import ScenarioConfig, run_scenario
from .config import LabSettings
from .data import Corpus, SamplerConfig, default_corpus_config, \
    generate_corpus
from .encoders import default_victim_config, load_encoder
from .errors import MissingDataError
from .evaluation import Evaluator
from .text_encoder import FrozenTextEncoder
from .training import TrainConfig, default_victim_train_config, \
    pretrain_victim
from .victim_api import VictimHandle
from .watchmen import Watchmen, watch

LOG_FORMAT = '%(asctime)s | %(name)s.%(levelname)s | %(message)s'


class Lab(object):
    """The Lab-object is the main interface of gfmlab.
    It holds the corpus, the text encoder, the victim and the handles
    attackers query it through.

    :ivar output_directory: Where logs, checkpoints and reports go
    :ivar sampler_config:   SamplerConfig shared by victim, attacks and
                            evaluation
    :ivar text_encoder:     The frozen FrozenTextEncoder
    """

    def __init__(self, output_directory=None, log_to_stdout=None,
                 settings=None):
        super(Lab, self).__init__()

        self.settings = settings if settings is not None else LabSettings()
        self.watchmen = Watchmen(self)
        self.loaded_plugins = []
        self.seed = self.settings.get_int('LAB', 'seed')

        # Setup output-dir and logging
        root = self.settings.lookup('LAB', 'output_root') or None
        self.output_directory = (tempfile.mkdtemp(suffix="_gfmlab", dir=root)
                                 if output_directory is None
                                 else output_directory)
        if not path.exists(self.output_directory):
            makedirs(self.output_directory)

        self.log = logging.getLogger('gfmlab')
        logfile = '%s/gfmlab.log' % self.output_directory
        logging.basicConfig(filename=logfile, level=logging.INFO,
                            format=LOG_FORMAT)

        if log_to_stdout is None:
            log_to_stdout = self.settings.get_bool('LAB', 'log_to_stdout')
        if log_to_stdout is True:
            root_logger = logging.getLogger()
            if not any(getattr(h, '_gfmlab_stdout', False)
                       for h in root_logger.handlers):
                handler = logging.StreamHandler(sys.stdout)
                handler.setFormatter(logging.Formatter(LOG_FORMAT))
                handler._gfmlab_stdout = True
                root_logger.addHandler(handler)
        self.log.info("Initialized Lab. Output directory is %s" %
                      self.output_directory)

        self.sampler_config = SamplerConfig.from_settings(self.settings)
        self.text_encoder = FrozenTextEncoder.from_settings(self.settings)
        self.corpus = None
        self.victim = None
        self.victim_log = None
        self.victim_train_config = None
        self.handles = {}
        self.scenarios = []
        self._evaluator = None

    def load_plugin(self, name, local=False):
        if local is True:
            plugin = __import__(name, fromlist=['.'])
        else:
            plugin = __import__("gfmlab.plugins.%s" % name,
                                fromlist=['gfmlab.plugins'])

        plugin.load_plugin(self)
        self.loaded_plugins += [name]

    @watch('CorpusGenerate')
    def generate_corpus(self, config=None):
        """
        Generates and featurizes a synthetic corpus

        :param config: CorpusConfig or dict, the default corpus when None
        """
        if config is None:
            config = default_corpus_config(self.seed)
        self.corpus = generate_corpus(config).featurize(self.text_encoder)
        self.log.info("Generated corpus:\n%s" % self.corpus.summary_table())
        return self.corpus

    def load_corpus(self, directory):
        """
        Loads a corpus from disk together with its text encoder, if saved
        """
        corpus = Corpus.load(directory)
        spec = path.join(directory, 'text_encoder.json')
        if path.exists(spec):
            self.set_text_encoder(FrozenTextEncoder.load(spec))
        self.corpus = corpus.featurize(self.text_encoder)
        self.log.info("Loaded %r from %s" % (self.corpus, directory))
        return self.corpus

    def save_corpus(self, directory=None):
        if self.corpus is None:
            raise MissingDataError("No corpus to save")
        if directory is None:
            directory = path.join(self.output_directory, 'corpus')
        self.corpus.save(directory)
        self.text_encoder.save(path.join(directory, 'text_encoder.json'))
        return directory

    def set_text_encoder(self, text_encoder):
        self.text_encoder = text_encoder
        self._evaluator = None
        if self.corpus is not None:
            self.corpus.featurize(text_encoder)

    @property
    def input_dim(self):
        return self.text_encoder.embed_dim + self.sampler_config.pe_dim

    @watch('VictimPretrain')
    def pretrain_victim(self, encoder_config=None, train_config=None):
        """
        Contrastive pretraining of the victim on the pretraining graphs

        :returns: (victim Encoder, TrainLog)
        """
        if self.corpus is None:
            raise MissingDataError("Generate or load a corpus before "
                                   "pretraining")
        if encoder_config is None:
            encoder_config = default_victim_config(
                self.input_dim, self.text_encoder.embed_dim, self.seed)
        if train_config is None:
            train_config = default_victim_train_config(self.seed)
        self.victim_train_config = TrainConfig.from_dict(train_config)
        self.victim, self.victim_log = pretrain_victim(
            self.corpus.pretrain_graphs, self.corpus.summaries,
            self.text_encoder, encoder_config, self.victim_train_config,
            self.sampler_config, lab=self)
        self._evaluator = None
        return self.victim, self.victim_log

    def load_victim(self, checkpoint):
        if not path.exists(checkpoint):
            raise MissingDataError("Victim checkpoint %s does not exist" %
                                   checkpoint)
        self.victim = load_encoder(checkpoint)
        self.victim_log = None
        self._evaluator = None
        self.log.info("Loaded victim %r from %s" % (self.victim, checkpoint))
        return self.victim

    def save_victim(self, checkpoint=None):
        if self.victim is None:
            raise MissingDataError("No victim to save")
        if checkpoint is None:
            checkpoint = path.join(self.output_directory, 'victim.ckpt')
        self.victim.save(checkpoint)
        return checkpoint

    @watch('HandleOpen')
    def open_handle(self, budget=None, defense=None, name=None):
        """
        Opens black-box query access to the victim

        :param budget:  Maximum number of queries, None for unlimited
        :param defense: DefenseConfig or dict of the deployed defense
        :param name:    Handle name, unique within the lab
        """
        if self.victim is None:
            raise MissingDataError("No victim to open a handle on")
        if name is None:
            name = 'handle%d' % len(self.handles)
        handle = VictimHandle(self.victim, budget, defense, name, lab=self)
        self.handles[name] = handle
        return handle

    def evaluator(self):
        if self.victim is None:
            raise MissingDataError("No victim to evaluate against")
        if self._evaluator is None:
            self._evaluator = Evaluator(self.victim, self.text_encoder,
                                        self.sampler_config, lab=self)
        return self._evaluator

    def run_scenario(self, scenario_config, defense=None):
        """
        Runs one extraction scenario on a fresh handle named after it

        :returns: (attacker Encoder, ScenarioReport)
        """
        if self.corpus is None:
            raise MissingDataError("No corpus to attack from")
        config = ScenarioConfig.from_dict(scenario_config)
        handle = self.open_handle(config.resolved_budget(), defense,
                                  name=config.name)
        attacker, report = run_scenario(config, self.corpus, handle,
                                        self.evaluator(), self.sampler_config,
                                        lab=self)
        if self.victim_log is not None:
            report.timing['victim_train_seconds'] = \
                self.victim_log.total_wall_seconds
        self.scenarios.append(config)
        return attacker, report

    def save_run(self, attacker, report, directory=None, verbose=False):
        """
        Writes report.csv, report.json, timing.json, attacker.ckpt and
        attacker_log.csv of one scenario run
        """
        if directory is None:
            directory = path.join(self.output_directory, report.name)
        if not path.exists(directory):
            makedirs(directory)
        report.to_csv(path.join(directory, 'report.csv'))
        report.to_json(path.join(directory, 'report.json'), verbose=verbose)
        report.write_timing(path.join(directory, 'timing.json'))
        attacker.save(path.join(directory, 'attacker.ckpt'))
        if report.train_log is not None:
            report.train_log.to_csv(path.join(directory, 'attacker_log.csv'))
        return directory

    def generate_config(self):
        """
        Generates an experiment dictionary from the current state of the lab
        """
        conf_dict = {}
        conf_dict['seed'] = self.seed
        conf_dict['sampler'] = self.sampler_config.dictify()
        te = self.text_encoder.dictify()
        conf_dict['text_encoder'] = dict((k, te[k]) for k in
                                         ('seed', 'vocab_buckets',
                                          'embed_dim'))
        if self.corpus is not None and self.corpus.config is not None:
            conf_dict['corpus'] = self.corpus.config.dictify()
        if self.victim is not None:
            conf_dict['victim_encoder'] = self.victim.config.dictify()
        if self.victim_train_config is not None:
            conf_dict['victim_train'] = self.victim_train_config.dictify()
        conf_dict['scenarios'] = [s.dictify() for s in self.scenarios]
        conf_dict['output_dir'] = self.output_directory
        return conf_dict

    def save_config(self, file_name=None, config=None):
        if file_name is None:
            file_name = "%s/conf.json" % self.output_directory
        conf_dict = self.generate_config() if config is None else config
        with open(file_name, "w") as conf_file:
            json.dump(conf_dict, conf_file, sort_keys=True, indent=2)

    def load_config(self, file_name=None):
        """
        Reads an experiment JSON and applies its seed, sampler and text
        encoder to the lab.

        :returns: the ExperimentSpec
        """
        # To avoid circular dependencies, we import here ...
        from .cli.experiment import ExperimentSpec

        if file_name is None:
            file_name = "%s/conf.json" % self.output_directory
        with open(file_name, 'r') as config_file:
            spec = ExperimentSpec.from_dict(json.load(config_file))
        self.apply_spec(spec)
        return spec

    def apply_spec(self, spec):
        self.seed = spec.seed
        self.sampler_config = spec.sampler
        self.set_text_encoder(FrozenTextEncoder.from_dict(spec.text_encoder))
