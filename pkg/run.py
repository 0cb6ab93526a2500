"""
SOLVE / BENCHMARK ISING AND MAX-CUT INSTANCES

. Example: Run the following commands from the terminal.
    python run.py solve --gset G6.txt --variant gbsb --A 0.2 --M 1000 --seed 7
    python run.py sweep --random 700:1 --M-grid 250,500,1000 --A-grid 0:0.6:0.05 --reps 200
    python run.py chaos --gset G6.txt --A-grid 0:1:0.05 --reps 100
    python run.py cycles --n 2048 --pr 8 --pc 32 --pb 128 --latency 100

Exit codes: 0 success, 1 runtime failure, 2 usage, parse error or missing file.
"""

##
# LIBRARIES
import json
import sys

from options import Options
from lib.data.dataloader import load_instance, write_instance
from lib.evaluate import cycle_count
from lib.ising import gen_random_dense
from lib.models import load_model


##
def run_model(opt, action):
    """ Load the model, call one of its drivers and always close its visualizer. """
    model = load_model(opt, load_instance(opt))
    try:
        return getattr(model, action)()
    finally:
        model.visualizer.close()


def cmd_solve(opt):
    manifest = run_model(opt, 'solve')
    text = json.dumps(manifest, indent=2)
    if opt.out:
        with open(opt.out, 'w') as file:
            file.write(text + '\n')
    else:
        print(text)
    return 0


def cmd_bench(opt):
    run_model(opt, 'bench')
    return 0


def cmd_sweep(opt):
    run_model(opt, 'sweep')
    return 0


def cmd_chaos(opt):
    run_model(opt, 'chaos')
    return 0


def cmd_cycles(opt):
    model = cycle_count(opt.n, opt.pr, opt.pc, opt.pb, opt.latency, f_sys=opt.fsys)
    print(model.n_cyc)
    if model.step_time is not None:
        print('step time: %.6g us' % (model.step_time * 1e6))
    return 0


def cmd_gen(opt):
    instance = gen_random_dense(opt.n, opt.seed)
    write_instance(instance, opt.out)
    print(opt.out)
    return 0


COMMANDS = {'solve': cmd_solve, 'bench': cmd_bench, 'sweep': cmd_sweep, 'chaos': cmd_chaos,
            'cycles': cmd_cycles, 'gen': cmd_gen}


##
def main(argv=None):
    """ Dispatch a subcommand and map failures to exit codes.
    """
    try:
        opt = Options().parse(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else 2
    if opt.command == 'solve' and not opt.out:
        # stdout carries the manifest
        opt.quiet = True
    try:
        return COMMANDS[opt.command](opt)
    except (FileNotFoundError, ValueError) as err:
        # parse errors, invalid instances and invalid parameter combinations
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # pylint: disable=W0703
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
