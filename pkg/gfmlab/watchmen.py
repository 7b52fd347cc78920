"""
Hooks on the events of an experiment. Methods decorated with watch() call
the callbacks registered on the Lab that orchestrates them.
"""
from functools import wraps

from .errors import ConfigError

EVENTS = (
    'CorpusGenerate',
    'VictimPretrain',
    'TrainEpoch',
    'HandleOpen',
    'VictimQuery',
    'ScenarioRun',
    'Evaluate',
)

BEFORE = 'before'
AFTER = 'after'


def _find_lab(obj):
    # To avoid circular dependencies, we import here ...
    from .lab import Lab

    if isinstance(obj, Lab):
        return obj
    return getattr(obj, 'lab', None)


def watch(event):
    """
    Decorator for the watchmen system.

    The orchestrating Lab is either self or self.lab. Objects used without a
    Lab just run the decorated method.
    """

    def decorator(func):
        @wraps(func)
        def watchtrigger(self, *args, **kwargs):
            lab = _find_lab(self)
            if lab is None:
                return func(self, *args, **kwargs)

            cb_kwargs = dict(kwargs)
            if lab is not self:
                cb_kwargs['watched_object'] = self

            lab.watchmen.trigger(event, BEFORE, *args, **cb_kwargs)
            ret = func(self, *args, **kwargs)
            cb_kwargs['watched_return'] = ret
            replaced = lab.watchmen.trigger(event, AFTER, *args, **cb_kwargs)
            return ret if replaced is None else replaced

        return watchtrigger

    return decorator


class Watchman(object):
    """
    One registered callback

    :ivar overwrite_return: The callback's result replaces the event's return
                            value (AFTER only)
    """

    def __init__(self, event, when, callback, overwrite_return=False):
        self.event = event
        self.when = when
        self.callback = callback
        self.overwrite_return = overwrite_return

    def __repr__(self):
        return "Watchman(%s, %s)" % (self.event, self.when)


class Watchmen(object):
    """
    Keeps the callbacks registered for the events of one Lab
    """

    def __init__(self, lab):
        self._lab = lab
        self._watchmen = dict((e, []) for e in EVENTS)

    @property
    def events(self):
        return list(self._watchmen)

    def add_watch_types(self, events):
        for e in events:
            self._watchmen.setdefault(e, [])

    def add_watchman(self, event, when=BEFORE, callback=None,
                     overwrite_return=False):
        if event not in self._watchmen:
            raise ConfigError("Unknown watched event %s" % event,
                              field='event')
        if when not in (BEFORE, AFTER):
            raise ConfigError("Watchman has to be invoked 'before' or "
                              "'after'", field='when')
        if callback is None:
            raise ConfigError("Watchman for %s needs a callback" % event,
                              field='callback')
        if when == BEFORE and overwrite_return:
            self._lab.log.warning("Overwrite return enabled for watchman "
                                  "BEFORE event %s. Discarding." % event)
            overwrite_return = False
        if overwrite_return and any(w.overwrite_return
                                    for w in self._watchmen[event]):
            self._lab.log.warning("More than one watchman can modify the "
                                  "return value for event %s" % event)
        watchman = Watchman(event, when, callback, overwrite_return)
        self._watchmen[event].append(watchman)
        return watchman

    def trigger(self, event, when, *args, **kwargs):
        """
        Runs the callbacks of event registered for when

        :returns: The last replaced return value, None if none was replaced
        """
        ret = None
        for watchman in list(self._watchmen[event]):
            if watchman.when != when:
                continue
            result = watchman.callback(self._lab, *args, **kwargs)
            if watchman.overwrite_return:
                ret = kwargs['watched_return'] = result
        return ret
