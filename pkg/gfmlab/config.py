from configparser import ConfigParser
from collections import OrderedDict
from copy import deepcopy
from os import environ, makedirs
from os.path import expanduser, realpath, dirname, exists

from .errors import ConfigError

CONFIG_FILE = expanduser('~/.gfmlab/settings.cfg')

# Built-in defaults, written out by write_config() on request
DEFAULTS = OrderedDict(
    [
    ('LAB', {'output_root': '',
             'log_to_stdout': 'True',
             'seed': '0'
            }),
    ('SAMPLER', {'method': 'khop',
                 'k': '2',
                 'max_nodes': '32',
                 'walk_len': '16',
                 'n_walks': '4',
                 'restart_p': '0.2',
                 'pe_dim': '4',
                 'split_seed': '0',
                 'readout': 'mean'
                }),
    ('TEXT', {'vocab_buckets': '4096',
              'embed_dim': '32',
              'seed': '0'
             }),
    ]
)


def settings_file():
    return realpath(expanduser(environ.get('GFMLAB_SETTINGS', CONFIG_FILE)))


class LabSettings(ConfigParser):
    """
    User settings of gfmlab, stored in ~/.gfmlab/settings.cfg (or the file
    named by the GFMLAB_SETTINGS environment variable).

    Every value may be overridden by an environment variable named
    GFMLAB_<SECTION>_<KEY>, e.g. GFMLAB_SAMPLER_MAX_NODES=16.
    """

    def __init__(self, config_file=None):
        super(LabSettings, self).__init__()
        self.config_file = (realpath(expanduser(config_file))
                            if config_file is not None else settings_file())
        self.config_path = dirname(self.config_file)

        for section, values in DEFAULTS.items():
            self.add_section(section)
            for key, value in values.items():
                self.set(section, key, value)
        self.read(self.config_file)

    def write_config(self):
        if not exists(self.config_path):
            makedirs(self.config_path)
        with open(self.config_file, 'w+') as cfgfile:
            self.write(cfgfile)

    def lookup(self, section, key):
        env_var_name = 'GFMLAB_%s_%s' % (section.upper(), key.upper())
        env_value = environ.get(env_var_name)
        if env_value is not None:
            return env_value
        return self.get(section, key)

    def get_int(self, section, key):
        return int(self.lookup(section, key))

    def get_float(self, section, key):
        return float(self.lookup(section, key))

    def get_bool(self, section, key):
        return self.lookup(section, key).strip().lower() in ('1', 'true',
                                                             'yes', 'on')

    def section_dict(self, section):
        """
        Returns all keys of a section, environment overrides applied
        """
        return dict((k, self.lookup(section, k)) for k in self.options(section))


class ConfigObject(object):
    """
    Base of the plain configuration objects (CorpusConfig, EncoderConfig, ...)

    Subclasses list their fields with defaults in FIELDS and may implement
    validate(), which is called on construction.
    """

    FIELDS = ()

    def __init__(self, **kwargs):
        for name, default in self.FIELDS:
            value = kwargs.pop(name, default)
            if isinstance(value, (list, dict)):
                value = deepcopy(value)
            setattr(self, name, value)
        if kwargs:
            raise ConfigError("Unknown field(s) %s for %s" %
                              (', '.join(sorted(kwargs)),
                               self.__class__.__name__),
                              field=sorted(kwargs)[0])
        self.validate()

    def validate(self):
        pass

    def dictify(self):
        """
        Returns the config as *printable* dictionary
        """
        ret = OrderedDict()
        for name, _ in self.FIELDS:
            value = getattr(self, name)
            if isinstance(value, ConfigObject):
                value = value.dictify()
            elif isinstance(value, (list, tuple)):
                value = [v.dictify() if isinstance(v, ConfigObject) else v
                         for v in value]
            ret[name] = value
        return ret

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        if isinstance(d, cls):
            return d
        if not isinstance(d, dict):
            raise ConfigError("%s expects a JSON object, got %s" %
                              (cls.__name__, type(d).__name__))
        return cls(**d)

    def replace(self, **changes):
        d = self.dictify()
        d.update(changes)
        return self.__class__.from_dict(d)

    def __eq__(self, other):
        return (isinstance(other, self.__class__) and
                self.dictify() == other.dictify())

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "%s(%s)" % (self.__class__.__name__,
                           ', '.join('%s=%r' % kv for kv in
                                     self.dictify().items()))
