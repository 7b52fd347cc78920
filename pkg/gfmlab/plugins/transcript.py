"""
Writes every answered victim query to <output_directory>/<handle>_transcript.jsonl
"""
import json
from os import path
from types import MethodType

from ..watchmen import AFTER


def transcript_path(self, handle_name):
    return path.join(self.output_directory,
                     '%s_transcript.jsonl' % handle_name)


def _open_callback(lab, *args, **kwargs):
    handle = kwargs['watched_return']
    open(lab.transcript_path(handle.name), 'w').close()


def _query_callback(lab, *args, **kwargs):
    handle = kwargs['watched_object']
    record = kwargs['watched_return']
    with open(lab.transcript_path(handle.name), 'a') as f:
        f.write(json.dumps(record.dictify(), sort_keys=True))
        f.write('\n')


def load_plugin(lab):
    lab.transcript_path = MethodType(transcript_path, lab)
    lab.watchmen.add_watchman('HandleOpen', when=AFTER,
                              callback=_open_callback)
    lab.watchmen.add_watchman('VictimQuery', when=AFTER,
                              callback=_query_callback)
