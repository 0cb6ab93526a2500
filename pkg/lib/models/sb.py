"""Simulated bifurcation solver
"""
# pylint: disable=C0301,C0103,R0902

##
import json
import os
import warnings

import numpy as np

from lib import bench
from lib.chaos import chaos_scan, sample_records, scan_trend, transition_band, write_scan_csv
from lib.evaluate import ZeroSuccessError, derive_target, success_probability, time_to_solution
from lib.ising import IsingInstance
from lib.models.engine import RunResult, SolverConfig, run, run_manifest
from lib.spectral import StabilityWarning, tune
from lib.visualizer import Visualizer


def config_from_opt(opt, workers: int = 1) -> SolverConfig:
    """ SolverConfig from parsed options.

    Args:
        opt ([argparse.Namespace]): options with the solver flags.
        workers (int): kernel workers of each run.
    """
    return SolverConfig(variant=opt.variant, steps=opt.M, dt=opt.dt, c=opt.c, a=opt.A, seed=opt.seed,
                        init_mode=opt.init_mode, sample_stride=opt.sample_stride, track_best=opt.track_best,
                        precision=opt.precision, workers=workers)


class Sb:
    """SB solver Class
    """
    @property
    def name(self): return 'sb'

    def __init__(self, opt, instance: IsingInstance):
        self.opt = opt
        self.instance = instance
        self.visualizer = Visualizer(opt)
        self.out_dir = os.path.join(self.opt.outf, self.opt.name)

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', StabilityWarning)
            try:
                self.tuning = tune(instance, mode=opt.tuning, d_t_factor=opt.Dt)
            except Exception:
                self.visualizer.close()
                raise
        for warning in caught:
            self.visualizer.print_message('   Warning: %s' % warning.message)
        self.visualizer.print_message('   Instance: %s n: %d' % (instance.label, instance.n))
        self.visualizer.print_tuning(self.tuning)
        # a single run gets the worker budget for its kernel, replicas get one each
        self.cfg = config_from_opt(opt)

    ##
    def run(self, seed: int = None) -> RunResult:
        """ One run, or the best of --n_batch replicas. """
        seed = self.opt.seed if seed is None else seed
        n_batch = getattr(self.opt, 'n_batch', 1)
        if n_batch > 1:
            result = bench.batch_best_of(self.instance, self.cfg, self.tuning, n_batch, seed, workers=self.opt.workers)
        else:
            result = run(self.instance, self.cfg.replace(seed=seed, workers=self.opt.workers), self.tuning)
        self.visualizer.print_run(result)
        return result

    def replicas(self, seeds):
        return bench.run_replicas(self.instance, self.cfg, self.tuning, seeds, workers=self.opt.workers)

    ##
    def solve(self) -> dict:
        """ Run and build the manifest. """
        result = self.run()
        manifest = run_manifest(result, self.instance, rle=getattr(self.opt, 'rle', False))
        if getattr(self.opt, 'n_batch', 1) > 1:
            manifest['master_seed'] = self.opt.seed
        return manifest

    def target(self, results) -> float:
        if self.opt.target is not None:
            return self.opt.target
        value = derive_target(results, self.opt.kind)
        self.visualizer.print_message('   Target: best found %.6g (%s)' % (value, self.opt.kind))
        return value

    def bench(self) -> dict:
        """ P_S and TTS over --reps plain runs. """
        seeds = bench.repetition_seeds(self.opt.seed, self.opt.reps)
        results = self.replicas(seeds)
        target = self.target(results)
        stats = success_probability(results, target, self.opt.kind)
        t_com = float(np.mean([r.wall_time for r in results]))
        summary = {'stats': stats.to_dict(), 't_com': t_com, 'config': self.cfg.to_dict(),
                   'tuning': self.tuning.to_dict(), 'seed': self.opt.seed,
                   'environment': bench.environment(self.opt.workers, self.cfg.precision)}
        try:
            tts = time_to_solution(t_com, stats)
            summary['tts'], summary['delta_tts'] = tts.tts, tts.delta_tts
        except ZeroSuccessError:
            summary['tts'], summary['delta_tts'] = None, None
        self.visualizer.print_performance({'P_S': stats.p_s, 'dP_S': stats.delta_p_s, 'hits': stats.hit_count,
                                           'reps': stats.n_rep, 'T_com': t_com,
                                           'TTS': 'undefined' if summary['tts'] is None else summary['tts'],
                                           'dTTS': 'undefined' if summary['delta_tts'] is None else summary['delta_tts']})
        if self.opt.out:
            with open(self.opt.out, 'w') as file:
                json.dump(summary, file, indent=2)
        return summary

    ##
    def _sweep_target(self) -> float:
        if self.opt.target is not None:
            return self.opt.target
        # best found over a pilot series at the base settings
        results = self.replicas(bench.repetition_seeds(self.opt.seed, self.opt.reps))
        return self.target(results)

    def sweep(self):
        """ (M, A) grid, or (D_t, t_M) grid when --Dt-grid / --tM-grid are given. """
        opt = self.opt
        dt_mode = opt.Dt_grid is not None or opt.tM_grid is not None
        if dt_mode and (opt.Dt_grid is None or opt.tM_grid is None):
            raise ValueError("a time-step sweep needs both --Dt-grid and --tM-grid")
        if dt_mode and (opt.M_grid is not None or opt.A_grid is not None and len(opt.A_grid) > 1):
            raise ValueError("--M-grid / multi-valued --A-grid cannot be combined with a time-step sweep")
        target = self._sweep_target()
        csv_path = opt.csv or os.path.join(self.out_dir, 'grid.csv')
        if dt_mode:
            a = opt.A_grid[0] if opt.A_grid else opt.A
            grid = bench.dt_sweep(self.instance, opt.Dt_grid, opt.tM_grid, a, opt.reps, self.tuning, target,
                                  cfg_base=self.cfg, kind=opt.kind, workers=opt.workers, out_csv=csv_path,
                                  visualizer=self.visualizer)
        else:
            m_values = opt.M_grid or [opt.M]
            a_values = opt.A_grid or [opt.A]
            grid = bench.sweep(self.instance, m_values, a_values, opt.reps, self.cfg, self.tuning, target,
                               kind=opt.kind, workers=opt.workers, out_csv=csv_path, visualizer=self.visualizer)
            i, j = grid.best_cell()
            self.visualizer.print_message('   Best cell: M=%d A=%g P_S=%.3f' % (grid.axis_m[i], grid.axis_a[j], grid.cells[i][j].p_s))
        bench.grid_summary(grid, os.path.splitext(csv_path)[0] + '.json', self.tuning, target, opt.workers,
                           extra={'seed': opt.seed})
        if opt.plot or opt.display:
            self.visualizer.plot_grid(grid, save_path=os.path.splitext(csv_path)[0] + '.png' if opt.plot else None)
        return grid

    def chaos(self):
        """ delta(t_M) against A. """
        opt = self.opt
        cfg = self.cfg.replace(variant='gbsb')
        rows = chaos_scan(self.instance, opt.A_grid, opt.reps, cfg, self.tuning,
                          workers=opt.workers, visualizer=self.visualizer)
        csv_path = opt.csv or os.path.join(self.out_dir, 'chaos.csv')
        write_scan_csv(rows, csv_path, opt.reps, opt.seed)
        if len(rows) > 1:
            self.visualizer.print_message('   Trend (Spearman): %.3f band: %s' % (scan_trend(rows), transition_band(rows)))
        if opt.plot or opt.display:
            stem = os.path.splitext(csv_path)[0]
            self.visualizer.plot_scan(rows, save_path=stem + '.png' if opt.plot else None)
            records = sample_records(self.instance, opt.A_grid, cfg, self.tuning)
            self.visualizer.plot_series(records, save_path=stem + '_series.png' if opt.plot else None)
        return rows
