from ..config import ConfigObject
from ..encoders import EncoderConfig, default_attacker_config
from ..errors import ConfigError
from ..training import TrainConfig


class ScenarioKinds(object):
    FULL_MODEL = 'full_model'
    DOMAIN_SPECIFIC = 'domain_specific'
    BUDGET_CONSTRAINED = 'budget_constrained'
    GRAPH_SPECIFIC = 'graph_specific'
    SYNTHETIC_GRAPHS = 'synthetic_graphs'
    DATA_FREE = 'data_free'

    ALL = (FULL_MODEL, DOMAIN_SPECIFIC, BUDGET_CONSTRAINED, GRAPH_SPECIFIC,
           SYNTHETIC_GRAPHS, DATA_FREE)


DEFAULT_EPOCHS = {
    ScenarioKinds.FULL_MODEL: 2,
    ScenarioKinds.DOMAIN_SPECIFIC: 8,
    ScenarioKinds.GRAPH_SPECIFIC: 60,
    ScenarioKinds.SYNTHETIC_GRAPHS: 2,
    ScenarioKinds.DATA_FREE: 4,
}

# Attack-3 epochs by query budget
BUDGET_EPOCHS = ((100, 200), (250, 120), (500, 60), (1000, 30))

GRAPH_SPECIFIC_BUDGET = 100

# Step size of attacker training unless the scenario sets one
ATTACK_LEARNING_RATE = 1e-2


def epochs_for_budget(budget):
    """
    Epochs of the smallest listed budget at or above budget, 30 beyond 1000
    """
    for listed, epochs in BUDGET_EPOCHS:
        if budget <= listed:
            return epochs
    return BUDGET_EPOCHS[-1][1]


class ScenarioConfig(ConfigObject):
    """
    One extraction scenario.

    query_sources holds graph ids, fnmatch patterns or domain names;
    train_config and attacker_config are partial dicts merged over the
    defaults of the kind.
    """

    FIELDS = (
        ('name', None),
        ('kind', ScenarioKinds.FULL_MODEL),
        ('query_sources', []),
        ('target_domain', None),
        ('target_graph', None),
        ('budget', None),
        ('mix_weights', None),
        ('visibility_fraction', None),
        ('visibility_overrides', {}),
        ('alpha', None),
        ('attacker_family', 'gcn'),
        ('attacker_config', None),
        ('train_config', None),
        ('normalize_targets', True),
        ('session', 'default'),
        ('seed', 0),
    )

    def validate(self):
        kinds = ScenarioKinds
        if self.kind not in kinds.ALL:
            raise ConfigError("Unknown scenario kind %s" % self.kind,
                              field='kind')
        if self.name is None:
            self.name = '%s-s%d' % (self.kind, self.seed)
        if self.budget is not None and int(self.budget) < 1:
            raise ConfigError("budget must be >= 1", field='budget')
        if self.kind == kinds.BUDGET_CONSTRAINED and self.budget is None:
            raise ConfigError("budget_constrained needs a budget",
                              field='budget')
        if self.kind == kinds.DOMAIN_SPECIFIC and not self.target_domain:
            raise ConfigError("domain_specific needs a target_domain",
                              field='target_domain')
        if self.kind == kinds.GRAPH_SPECIFIC and not self.target_graph:
            raise ConfigError("graph_specific needs a target_graph",
                              field='target_graph')
        if self.kind == kinds.SYNTHETIC_GRAPHS:
            fractions = [self.visibility_fraction] + \
                list(self.visibility_overrides.values())
            for f in fractions:
                if f is None or not 0.0 < float(f) <= 1.0:
                    raise ConfigError("visibility fractions must lie in "
                                      "(0, 1]", field='visibility_fraction')
            if self.alpha is None or not 0.0 <= float(self.alpha) <= 1.0:
                raise ConfigError("synthetic_graphs needs alpha in [0, 1]",
                                  field='alpha')
        if self.mix_weights is not None:
            if len(self.mix_weights) != len(self.query_sources):
                raise ConfigError("mix_weights needs one weight per query "
                                  "source", field='mix_weights')
            if min(self.mix_weights) < 0 or \
                    abs(sum(self.mix_weights) - 1.0) > 1e-9:
                raise ConfigError("mix_weights must be non-negative and sum "
                                  "to 1", field='mix_weights')
        if self.attacker_family not in ('gcn', 'gat'):
            raise ConfigError("Unknown attacker_family %s" %
                              self.attacker_family, field='attacker_family')
        # fail early on malformed partial configs
        self.resolved_train_config()
        self.resolved_attacker_config()

    def resolved_budget(self):
        if self.budget is not None:
            return int(self.budget)
        if self.kind == ScenarioKinds.GRAPH_SPECIFIC:
            return GRAPH_SPECIFIC_BUDGET
        return None

    def default_epochs(self):
        if self.kind == ScenarioKinds.BUDGET_CONSTRAINED:
            return epochs_for_budget(self.resolved_budget())
        return DEFAULT_EPOCHS[self.kind]

    def resolved_train_config(self):
        d = dict(self.train_config or {})
        d.setdefault('epochs', self.default_epochs())
        d.setdefault('learning_rate', ATTACK_LEARNING_RATE)
        d.setdefault('seed', self.seed)
        return TrainConfig.from_dict(d)

    def resolved_attacker_config(self, input_dim=36, output_dim=32):
        d = default_attacker_config(self.attacker_family, input_dim,
                                    output_dim, init_seed=self.seed).dictify()
        d.update(self.attacker_config or {})
        return EncoderConfig.from_dict(d)

    def visibility_for(self, graph_id):
        return float(self.visibility_overrides.get(graph_id,
                                                   self.visibility_fraction))
