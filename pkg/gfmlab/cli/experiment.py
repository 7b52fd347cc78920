from copy import deepcopy

from ..attacks import ScenarioConfig
from ..config import ConfigObject
from ..data import CorpusConfig, SamplerConfig, default_corpus_config
from ..encoders import EncoderConfig, default_victim_config
from ..errors import ConfigError
from ..training import TrainConfig, default_victim_train_config
from ..victim_api import DefenseConfig

TEXT_ENCODER_DEFAULTS = {'seed': 0, 'vocab_buckets': 4096, 'embed_dim': 32}


class ExperimentSpec(ConfigObject):
    """
    Everything one experiment needs: corpus, text encoder, sampler, victim,
    scenarios and the deployed defense.

    victim_encoder and victim_train are partial dicts merged over the
    defaults; None fields are filled on validation.
    """

    FIELDS = (
        ('seed', 0),
        ('corpus', None),
        ('text_encoder', None),
        ('sampler', None),
        ('victim_encoder', None),
        ('victim_train', None),
        ('defense', None),
        ('scenarios', []),
        ('output_dir', None),
    )

    def validate(self):
        if int(self.seed) < 0:
            raise ConfigError("seed must be >= 0", field='seed')
        self.corpus = (default_corpus_config(self.seed) if self.corpus is None
                       else CorpusConfig.from_dict(self.corpus))
        text = dict(TEXT_ENCODER_DEFAULTS)
        text.update(self.text_encoder or {})
        unknown = set(text) - set(TEXT_ENCODER_DEFAULTS) - \
            set(['hash', 'tokenizer'])
        if unknown:
            raise ConfigError("Unknown text_encoder field(s) %s" %
                              ', '.join(sorted(unknown)),
                              field=sorted(unknown)[0])
        self.text_encoder = text
        self.sampler = SamplerConfig.from_dict(self.sampler)
        self.defense = DefenseConfig.from_dict(self.defense)
        self.scenarios = [ScenarioConfig.from_dict(s) for s in self.scenarios]
        names = [s.name for s in self.scenarios]
        if len(set(names)) != len(names):
            raise ConfigError("Scenario names must be unique: %s" % names,
                              field='scenarios')
        self.victim_encoder_config()
        self.victim_train_config()

    @property
    def input_dim(self):
        return self.text_encoder['embed_dim'] + self.sampler.pe_dim

    def victim_encoder_config(self):
        d = default_victim_config(self.input_dim,
                                  self.text_encoder['embed_dim'],
                                  init_seed=self.seed).dictify()
        d.update(self.victim_encoder or {})
        return EncoderConfig.from_dict(d)

    def victim_train_config(self):
        d = default_victim_train_config(self.seed).dictify()
        d.update(self.victim_train or {})
        return TrainConfig.from_dict(d)

    def with_seed(self, seed):
        """
        Copy with the global seed and every derived seed set to seed
        """
        d = deepcopy(self.dictify())
        d['seed'] = seed
        d['corpus']['seed'] = seed
        for s in d['scenarios']:
            if s['name'] == '%s-s%d' % (s['kind'], s['seed']):
                s['name'] = None
            s['seed'] = seed
        for key in ('victim_encoder', 'victim_train'):
            if d[key] is not None:
                d[key].pop('init_seed' if key == 'victim_encoder' else 'seed',
                           None)
        return self.__class__.from_dict(d)
