""" This file contains the Visualizer class: console, log file and tensorboard output.

Returns:
    Visualizer(): Visualizer class to report runs, sweep cells and chaos scans
"""

##
import os
import time

from .plot import plot_delta_curve, plot_delta_series, plot_success_heatmap


##
class Visualizer():
    """ Reporting sink shared by every subcommand.

    Messages go to stdout and to ``<outf>/<name>/run_log.txt``; with
    ``--display`` scalars and figures also go to a tensorboardX writer under
    ``<outf>/<name>/tensorboard``.
    """
    # pylint: disable=too-many-instance-attributes
    # Reasonable.

    ##
    def __init__(self, opt):
        self.name = opt.name
        self.opt = opt
        self.quiet = getattr(opt, 'quiet', False)
        self.writer = None
        self.out_dir = os.path.join(opt.outf, opt.name)
        if not os.path.exists(self.out_dir):
            os.makedirs(self.out_dir)
        if getattr(opt, 'display', False):
            from tensorboardX import SummaryWriter
            self.writer = SummaryWriter(log_dir=os.path.join(self.out_dir, 'tensorboard'))

        # --
        # Log file.
        self.log_name = os.path.join(self.out_dir, 'run_log.txt')
        now = time.strftime("%c")
        title = f'================ {now} ================\n'
        info = f'{opt.command}, variant={getattr(opt, "variant", "-")}, A={getattr(opt, "A", "-")}, M={getattr(opt, "M", "-")}, seed={getattr(opt, "seed", "-")}'
        self.write_to_log_file(text=title + info)
        self.step = 0

    ##
    def write_to_log_file(self, text):
        with open(self.log_name, "a") as log_file:
            log_file.write('%s\n' % text)

    def print_message(self, message):
        if not self.quiet:
            print(message)
        self.write_to_log_file(text=message)

    ##
    def print_tuning(self, tuning):
        src = tuning.source
        message = '   Tuning: [%s] lambda_max: %.6g lambda_min: %.6g c: %.6g dt: %.6g D_t: %.3f' % (
            src.method, src.lambda_max, src.lambda_min, tuning.c, tuning.dt, tuning.d_t_factor)
        if src.method == 'power_iteration':
            message += ' iterations: %d residual: %.3g' % (src.iterations, src.residual)
        self.print_message(message)

    def print_run(self, result):
        """ One line per finished run.

        Args:
            result (RunResult): finished run.
        """
        message = '   Run: [seed %d] energy: %.6g ' % (result.config_echo.seed, result.energy)
        if result.cut is not None:
            message += 'cut: %d ' % result.cut
        if result.best_energy is not None:
            message += 'best energy: %.6g ' % result.best_energy
        message += 'time: %.3fs' % result.wall_time
        self.print_message(message)
        self.plot_performance({'energy': result.energy}, tag='Run')

    def print_current_cell(self, key, stats):
        """ Print the statistics of a finished sweep cell.

        Args:
            key (dict): cell coordinates, e.g. {'m': 1000, 'a': 0.2}.
            stats (SuccessStats): cell statistics.
        """
        message = '   Cell: ' + ' '.join('%s: %g' % (k, v) for k, v in key.items())
        message += ' | P_S: %.3f +- %.3f (%d/%d) mean energy: %.6g' % (
            stats.p_s, stats.delta_p_s, stats.hit_count, stats.n_rep, stats.mean_energy)
        self.print_message(message)
        self.plot_performance({'p_s': stats.p_s, 'mean_energy': stats.mean_energy}, tag='Sweep')

    def print_current_delta(self, row):
        message = '   Chaos: A: %.4g mean delta(t_M): %.4f +- %.4f' % (row.a, row.mean_final_delta, row.stderr)
        self.print_message(message)
        self.plot_performance({'mean_final_delta': row.mean_final_delta}, tag='Chaos')

    def print_performance(self, performance):
        message = '   ' + ' '.join(
            '%s: %.6g' % (k, v) if isinstance(v, float) else '%s: %s' % (k, v) for k, v in performance.items())
        self.print_message(message)

    ##
    def plot_performance(self, performance, tag=None):
        """ Scalars to tensorboard, one global step per call. """
        if self.writer is None:
            return
        self.writer.add_scalars(tag if tag else "Performance Metrics",
                                {k: v for k, v in performance.items() if v is not None}, global_step=self.step)
        self.step += 1

    def plot_grid(self, grid, tag=None, save_path=None):
        fig = plot_success_heatmap(grid, save_path=save_path)
        if self.writer is not None:
            self.writer.add_figure(tag if tag else "Success probability", fig, global_step=self.step)

    def plot_scan(self, rows, tag=None, save_path=None):
        fig = plot_delta_curve(rows, save_path=save_path)
        if self.writer is not None:
            self.writer.add_figure(tag if tag else "Chaos indicator", fig, global_step=self.step)

    def plot_series(self, records, tag=None, save_path=None):
        fig = plot_delta_series(records, save_path=save_path)
        if self.writer is not None:
            self.writer.add_figure(tag if tag else "Trajectory divergence", fig, global_step=self.step)

    def close(self):
        """ Flush and close the tensorboard writer; safe to call twice. """
        if self.writer is not None:
            self.writer.close()
            self.writer = None
