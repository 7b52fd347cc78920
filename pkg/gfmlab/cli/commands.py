import argparse
import csv
import json
import logging
import sys
from collections import OrderedDict
from os import getcwd, listdir, makedirs, path

import parse

from ..errors import BudgetExhaustedError, ConfigError, EmptyAggregateError, \
    LabError, MissingDataError
from ..evaluation import ScenarioReport
from ..lab import Lab
from .experiment import ExperimentSpec

DESCRIPTION = "Desk-scale lab for extracting graph foundation models"

EXIT_CODES = (
    (ConfigError, 2),
    (MissingDataError, 3),
    (BudgetExhaustedError, 4),
    (EmptyAggregateError, 5),
)

DEFENSE_FLAGS = ('noise_std', 'truncate_dim', 'quantize_bits', 'rate_limit')

AGGREGATE_COLUMNS = ('run_id', 'kind', 'seed', 'budget', 'query_count',
                     'graphs', 'mean_attacker_acc', 'mean_victim_acc',
                     'mean_fidelity', 'frac_bound_holds', 'attacker_params',
                     'victim_params')
SERIES_COLUMNS = ('budget', 'run_id', 'mean_attacker_acc', 'mean_fidelity')
COST_COLUMNS = ('run_id', 'attacker_params', 'victim_params', 'param_ratio',
                'attacker_train_seconds', 'victim_train_seconds',
                'query_seconds')

log = logging.getLogger('gfmlab.cli')


def _field_line(text, field):
    if field is None:
        return None
    needle = '"%s"' % field
    for lineno, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return lineno
    return None


def load_experiment(config_path):
    """
    Reads an experiment JSON. Errors are reported as path:line: message.

    :returns: ExperimentSpec, the default experiment when config_path is None
    """
    if config_path is None:
        return ExperimentSpec()
    if not path.exists(config_path):
        raise MissingDataError("Config file %s does not exist" % config_path)
    with open(config_path) as f:
        text = f.read()
    try:
        d = json.loads(text)
    except ValueError as e:
        raise ConfigError("%s:%d: %s" % (config_path, e.lineno, e.msg))
    try:
        return ExperimentSpec.from_dict(d)
    except ConfigError as e:
        line = _field_line(text, e.field)
        raise ConfigError("%s:%s: %s" % (config_path,
                                         line if line is not None else 1, e),
                          field=e.field)


def _override_value(value):
    try:
        return json.loads(value)
    except ValueError:
        return value


def defense_overrides(args):
    """
    Defense fields set on the command line, dedicated flags first, then the
    generic --defense key=value pairs
    """
    overrides = OrderedDict()
    for name in DEFENSE_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    for item in getattr(args, 'defense', None) or []:
        parsed = parse.parse('{key}={value}', item)
        if parsed is None:
            raise ConfigError("Defense override %s is not key=value" % item,
                              field='defense')
        overrides[parsed['key'].strip()] = _override_value(
            parsed['value'].strip())
    return overrides


def experiment_from_args(args):
    spec = load_experiment(args.config)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    overrides = defense_overrides(args)
    if overrides:
        spec = spec.replace(defense=spec.defense.replace(**overrides))
    return spec


def make_lab(args, spec):
    out = args.out if args.out is not None else spec.output_dir
    lab = Lab(output_directory=out, log_to_stdout=args.verbose)
    lab.apply_spec(spec)
    return lab


def cmd_generate(args):
    """
    Writes the corpus of the experiment to the output directory
    """
    spec = experiment_from_args(args)
    lab = make_lab(args, spec)
    lab.generate_corpus(spec.corpus)
    lab.save_corpus(lab.output_directory)
    print(lab.corpus.summary_table())
    print("Corpus written to %s" % lab.output_directory)
    return 0


def cmd_pretrain(args):
    spec = experiment_from_args(args)
    lab = make_lab(args, spec)
    lab.load_corpus(args.corpus_dir)
    victim, train_log = lab.pretrain_victim(spec.victim_encoder_config(),
                                            spec.victim_train_config())
    checkpoint = lab.save_victim(args.checkpoint)
    train_log.to_csv(path.join(lab.output_directory, 'victim_log.csv'))
    print("Victim %s: %d parameters, hash %s" %
          (checkpoint, victim.count_parameters(), victim.parameter_hash()))
    return 0


def cmd_attack(args):
    spec = experiment_from_args(args)
    if not spec.scenarios:
        raise ConfigError("The experiment lists no scenarios",
                          field='scenarios')
    scenarios = spec.scenarios
    if args.scenario:
        scenarios = [s for s in scenarios if s.name in args.scenario]
        missing = set(args.scenario) - set(s.name for s in scenarios)
        if missing:
            raise ConfigError("Unknown scenario(s) %s" %
                              ', '.join(sorted(missing)), field='scenarios')

    lab = make_lab(args, spec)
    lab.load_plugin('transcript')
    lab.load_corpus(args.corpus_dir)
    lab.load_victim(args.victim_checkpoint)
    for scenario in scenarios:
        attacker, report = lab.run_scenario(scenario, spec.defense)
        directory = lab.save_run(attacker, report, verbose=args.verbose)
        print(report.table())
        print("%s: %d queries, mean fidelity %.4f, written to %s" %
              (report.name, report.query_count, report.mean_fidelity,
               directory))
    return 0


def find_reports(run_dirs):
    """
    report.json files inside run_dirs or their immediate subdirectories
    """
    found = []
    for run_dir in run_dirs:
        candidate = path.join(run_dir, 'report.json')
        if path.isfile(candidate):
            found.append(candidate)
            continue
        if not path.isdir(run_dir):
            continue
        for sub in sorted(listdir(run_dir)):
            candidate = path.join(run_dir, sub, 'report.json')
            if path.isfile(candidate):
                found.append(candidate)
    return found


def _read_timing(report_path):
    timing = path.join(path.dirname(report_path), 'timing.json')
    if not path.exists(timing):
        return {}
    with open(timing) as f:
        return json.load(f)


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return value


def _write_csv(file_name, columns, rows):
    with open(file_name, 'w') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(r.get(c)) for c in columns])


def aggregate_reports(run_dirs):
    """
    Loads every report below run_dirs. Reports sharing a run id are dropped
    only when their contents are identical; otherwise the later one is told
    apart by its run directory.

    :returns: list of (ScenarioReport, timing dict) sorted by run id
    """
    reports = OrderedDict()
    contents = {}
    for report_path in find_reports(run_dirs):
        report = ScenarioReport.from_json(report_path)
        content = json.dumps(report.dictify(), sort_keys=True)
        if report.run_id in reports:
            if contents[report.run_id] == content:
                log.info("Skipping identical run %s at %s" %
                         (report.run_id, report_path))
                continue
            run_dir = path.dirname(path.abspath(report_path))
            report.run_id = '%s@%s' % (report.run_id, run_dir)
            log.warning("Run id clash, keeping %s" % report.run_id)
        reports[report.run_id] = (report, _read_timing(report_path))
        contents[report.run_id] = content
    if not reports:
        raise EmptyAggregateError("No reports found in %s" %
                                  ', '.join(run_dirs))
    return [reports[k] for k in sorted(reports)]


def aggregate_row(report):
    row = OrderedDict()
    row['run_id'] = report.run_id
    row['kind'] = report.kind
    row['seed'] = report.seed
    row['budget'] = report.budget
    row['query_count'] = report.query_count
    row['graphs'] = len(report.rows)
    row['mean_attacker_acc'] = report.mean_attacker_acc
    row['mean_victim_acc'] = report.mean_victim_acc
    row['mean_fidelity'] = report.mean_fidelity
    row['frac_bound_holds'] = report.frac_bound_holds
    row['attacker_params'] = report.attacker_params
    row['victim_params'] = report.victim_params
    return row


def cmd_report(args):
    """
    Merges run reports into aggregate.csv, the budget series series.csv and
    the cost comparison cost.csv
    """
    out = args.out if args.out is not None else getcwd()
    if not path.exists(out):
        makedirs(out)
    runs = aggregate_reports(args.run_dirs)
    rows = [aggregate_row(report) for report, _ in runs]
    _write_csv(path.join(out, 'aggregate.csv'), AGGREGATE_COLUMNS, rows)

    series = sorted((r for r in rows if r['budget'] is not None),
                    key=lambda r: (r['budget'], r['run_id']))
    _write_csv(path.join(out, 'series.csv'), SERIES_COLUMNS, series)

    costs = []
    for report, timing in runs:
        cost = OrderedDict(timing)
        cost['run_id'] = report.run_id
        cost['attacker_params'] = report.attacker_params
        cost['victim_params'] = report.victim_params
        if report.attacker_params and report.victim_params:
            cost['param_ratio'] = (float(report.attacker_params) /
                                   report.victim_params)
        costs.append(cost)
    _write_csv(path.join(out, 'cost.csv'), COST_COLUMNS, costs)

    print('%-32s %8s %8s %8s' % ('run_id', 'budget', 'atk_acc', 'fid'))
    for r in rows:
        print('%-32s %8s %8.4f %8.4f' % (r['run_id'], _cell(r['budget']),
                                         r['mean_attacker_acc'],
                                         r['mean_fidelity']))
    print("%d runs aggregated into %s" % (len(rows), out))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='gfmlab', description=DESCRIPTION)
    parser.add_argument('--seed', type=int, default=None,
                        help='global seed, overrides every seed of the config')
    parser.add_argument('--config', default=None,
                        help='experiment JSON file')
    parser.add_argument('--out', default=None, help='output directory')
    parser.add_argument('--verbose', action='store_true',
                        help='log to stdout as well')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    generate = commands.add_parser('generate',
                                   help='generate the synthetic corpus')
    generate.set_defaults(func=cmd_generate)

    pretrain = commands.add_parser('pretrain', help='pretrain the victim')
    pretrain.add_argument('corpus_dir')
    pretrain.add_argument('--checkpoint', default=None,
                          help='victim checkpoint, <out>/victim.ckpt by '
                               'default')
    pretrain.set_defaults(func=cmd_pretrain)

    attack = commands.add_parser('attack',
                                 help='run extraction scenarios')
    attack.add_argument('victim_checkpoint')
    attack.add_argument('corpus_dir')
    attack.add_argument('--scenario', action='append', default=[],
                        help='run only the named scenario (repeatable)')
    attack.add_argument('--noise-std', dest='noise_std', type=float,
                        default=None)
    attack.add_argument('--truncate-dim', dest='truncate_dim', type=int,
                        default=None)
    attack.add_argument('--quantize-bits', dest='quantize_bits', type=int,
                        default=None)
    attack.add_argument('--rate-limit', dest='rate_limit', type=int,
                        default=None)
    attack.add_argument('--defense', action='append', default=[],
                        metavar='KEY=VALUE',
                        help='set any defense field (repeatable)')
    attack.set_defaults(func=cmd_attack)

    report = commands.add_parser('report', help='aggregate run reports')
    report.add_argument('run_dirs', nargs='+')
    report.set_defaults(func=cmd_report)
    return parser


def exit_code(error):
    for cls, code in EXIT_CODES:
        if isinstance(error, cls):
            return code
    return 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExhaustedError as e:
        sys.stderr.write("error: %s (spent %d queries)\n" % (e, e.spent))
        return exit_code(e)
    except LabError as e:
        sys.stderr.write("error: %s\n" % e)
        return exit_code(e)
