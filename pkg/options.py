""" Options

One sub-parser per subcommand; shared groups of flags come from parent parsers.
A YAML file given with --config supplies defaults, explicit flags win.

Returns:
    [argparse]: Class containing argparse
"""

import argparse
import os

import numpy as np
import yaml

# pylint: disable=C0103,C0301,R0903,W0622

COMMANDS = ('solve', 'bench', 'sweep', 'chaos', 'cycles', 'gen')


def parse_grid(text):
    """ 'start:stop:step' (stop included) or 'v1,v2,...' -> list of floats. """
    text = str(text).strip()
    try:
        if ':' in text:
            start, stop, step = (float(v) for v in text.split(':'))
            if not step > 0 or stop < start:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 12) for k in range(count)]
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'start:stop:step' or a comma list, got {text!r}") from None


def parse_int_grid(text):
    values = parse_grid(text)
    if any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


class Options():
    """Options class

    Returns:
        [argparse]: argparse containing the options of every subcommand
    """

    def __init__(self):
        ##
        # Base
        base = argparse.ArgumentParser(add_help=False)
        base.add_argument('--config', default=None, help='YAML file with option defaults')
        base.add_argument('--name', type=str, default=None, help='name of the experiment, default: the subcommand')
        base.add_argument('--model', type=str, default='sb', help='solver model to load')
        base.add_argument('--outf', default='./output', help='folder for logs, CSVs and figures')
        base.add_argument('--display', action='store_true', help='Use tensorboard.')
        base.add_argument('--plot', action='store_true', help='Save figures next to the outputs.')
        base.add_argument('--verbose', action='store_true', help='Print the options.')
        base.add_argument('--quiet', action='store_true', help='Only write to the log file.')

        ##
        # Instance
        source = argparse.ArgumentParser(add_help=False)
        source.add_argument('instance', nargs='?', default=None, help='instance file (.json or G-set text)')
        source.add_argument('--gset', default=None, help='G-set MAX-CUT file')
        source.add_argument('--random', default=None, help="seeded dense +-1 instance 'N:SEED'")

        ##
        # Solver
        solver = argparse.ArgumentParser(add_help=False)
        solver.add_argument('--variant', default='gbsb', choices=['bsb', 'dsb', 'gbsb'], help='SB variant')
        solver.add_argument('--A', type=float, default=0.2, help='nonlinear control strength (GbSB)')
        solver.add_argument('--M', type=int, default=1000, help='time-evolution steps')
        solver.add_argument('--Dt', type=float, default=1.25, help='time-step factor D_t')
        solver.add_argument('--dt', type=float, default=None, help='explicit time step, overrides D_t tuning')
        solver.add_argument('--c', type=float, default=None, help='explicit coupling scale, overrides tuning')
        solver.add_argument('--seed', type=int, default=0, help='master seed')
        solver.add_argument('--tuning', default='auto', choices=['auto', 'wigner', 'numerical', 'exact'], help='how c and dt are tuned')
        solver.add_argument('--init_mode', default='uniform_random', choices=['uniform_random', 'chaos_probe'])
        solver.add_argument('--sample_stride', type=int, default=0, help='trajectory sampling stride, 0 = final state only')
        solver.add_argument('--track_best', action='store_true', help='keep the best configuration seen at sample points')
        solver.add_argument('--precision', default='fp64', choices=['fp64', 'fixed16'], help='interaction arithmetic')
        solver.add_argument('--workers', type=int, default=1, help='concurrent replicas (or kernel blocks for a single run)')

        ##
        # Targets
        target = argparse.ArgumentParser(add_help=False)
        target.add_argument('--reps', type=int, default=100, help='runs per point')
        target.add_argument('--target', type=float, default=None, help='success target, default: best value found')
        target.add_argument('--kind', default='energy_min', choices=['energy_min', 'cut_max'], help='target kind')

        self.parser = argparse.ArgumentParser(formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        sub = self.parser.add_subparsers(dest='command', metavar='{' + ','.join(COMMANDS) + '}')
        sub.required = True
        fmt = argparse.ArgumentDefaultsHelpFormatter
        self.subparsers = {}

        p = sub.add_parser('solve', parents=[base, source, solver], formatter_class=fmt, help='solve one instance')
        p.add_argument('--n_batch', type=int, default=1, help='replicas, the lowest energy wins')
        p.add_argument('--out', default=None, help='manifest JSON path, default: stdout')
        p.add_argument('--rle', action='store_true', help='run-length encode the spins')
        self.subparsers['solve'] = p

        p = sub.add_parser('bench', parents=[base, source, solver, target], formatter_class=fmt, help='P_S and TTS from repeated runs')
        p.add_argument('--out', default=None, help='summary JSON path')
        self.subparsers['bench'] = p

        p = sub.add_parser('sweep', parents=[base, source, solver, target], formatter_class=fmt, help='P_S over an (M, A) or (D_t, t_M) grid')
        p.add_argument('--M-grid', dest='M_grid', type=parse_int_grid, default=None, help="M values, e.g. '250,500,1000'")
        p.add_argument('--A-grid', dest='A_grid', type=parse_grid, default=None, help="A values, e.g. '0:0.6:0.05'")
        p.add_argument('--Dt-grid', dest='Dt_grid', type=parse_grid, default=None, help='D_t values (time-step sweep)')
        p.add_argument('--tM-grid', dest='tM_grid', type=parse_grid, default=None, help='final times t_M (time-step sweep)')
        p.add_argument('--csv', default=None, help='grid CSV, resumed when it exists')
        self.subparsers['sweep'] = p

        p = sub.add_parser('chaos', parents=[base, source, solver], formatter_class=fmt, help='delta(t_M) against A')
        p.add_argument('--A-grid', dest='A_grid', type=parse_grid, default=parse_grid('0:1:0.05'), help='A values')
        p.add_argument('--reps', type=int, default=100, help='trajectory pairs per A')
        p.add_argument('--csv', default=None, help='scan CSV path')
        self.subparsers['chaos'] = p

        p = sub.add_parser('cycles', parents=[base], formatter_class=fmt, help='clock cycles per step of the pipelined accelerator')
        p.add_argument('--n', type=int, required=True, help='spins')
        p.add_argument('--pr', type=int, required=True, help='row parallelism P_r')
        p.add_argument('--pc', type=int, required=True, help='column parallelism P_c')
        p.add_argument('--pb', type=int, required=True, help='batch parallelism P_b')
        p.add_argument('--latency', type=int, required=True, help='circulative path latency')
        p.add_argument('--fsys', type=float, default=None, help='clock frequency in Hz')
        self.subparsers['cycles'] = p

        p = sub.add_parser('gen', parents=[base], formatter_class=fmt, help='seeded dense +-1 instance')
        p.add_argument('--n', type=int, required=True, help='spins')
        p.add_argument('--seed', type=int, default=0, help='generator seed')
        p.add_argument('--out', required=True, help='output path (.json)')
        self.subparsers['gen'] = p
        self.opt = None

    def _apply_config(self, argv):
        """ Defaults from a YAML --config file, if one is named in argv. """
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument('--config', default=None)
        known, _ = pre.parse_known_args(argv)
        if not known.config:
            return
        if not os.path.isfile(known.config):
            self.parser.error(f"config file not found: {known.config}")
        with open(known.config, 'r') as file:
            defaults = yaml.safe_load(file) or {}
        if not isinstance(defaults, dict):
            self.parser.error(f"{known.config}: expected a mapping of option names to values")
        dests = {a.dest for p in self.subparsers.values() for a in p._actions}  # pylint: disable=W0212
        unknown = sorted(set(defaults) - dests)
        if unknown:
            self.parser.error(f"{known.config}: unknown options {unknown}")
        for p in self.subparsers.values():
            own = {a.dest for a in p._actions}  # pylint: disable=W0212
            p.set_defaults(**{k: v for k, v in defaults.items() if k in own})

    def parse(self, argv=None):
        """ Parse Arguments.
        """
        self._apply_config(argv)
        self.opt = self.parser.parse_args(argv)
        if self.opt.name is None:
            self.opt.name = self.opt.command

        args = vars(self.opt)

        if self.opt.verbose:
            print('------------ Options -------------')
            for k, v in sorted(args.items()):
                print('%s: %s' % (str(k), str(v)))
            print('-------------- End ----------------')

        # save to the disk
        expr_dir = os.path.join(self.opt.outf, self.opt.name)
        if not os.path.isdir(expr_dir):
            os.makedirs(expr_dir)

        file_name = os.path.join(expr_dir, 'opt.txt')
        with open(file_name, 'wt') as opt_file:
            opt_file.write('------------ Options -------------\n')
            for k, v in sorted(args.items()):
                opt_file.write('%s: %s\n' % (str(k), str(v)))
            opt_file.write('-------------- End ----------------\n')
        return self.opt
