""" Figures for sweeps and chaos scans. """

import math
import os

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns


def plot_success_heatmap(grid, title='Success probability', cmap='viridis', save_path=None):
    """
    P_S over a sweep grid as an annotated heat map.

    Arguments
    ---------
    grid:       SweepGrid ((M, A) axes) or DtSweepGrid ((D_t, t_M) axes)
    title:      figure title
    cmap:       matplotlib colormap name
    save_path:  PNG path, figure is only returned when None
    """
    if hasattr(grid, 'axis_m'):
        index, columns = [str(m) for m in grid.axis_m], ['%g' % a for a in grid.axis_a]
        ylabel, xlabel = 'M', 'A'
    else:
        index, columns = ['%g' % d for d in grid.axis_d_t], ['%g' % t for t in grid.axis_t_final]
        ylabel, xlabel = r'$D_t$', r'$t_M$'
    frame = pd.DataFrame(grid.p_s(), index=index, columns=columns)

    figure = plt.figure(figsize=(max(4, 0.6 * len(columns) + 2), max(3, 0.5 * len(index) + 1.5)))
    sns.heatmap(frame, annot=len(columns) * len(index) <= 150, fmt='.2f', vmin=0.0, vmax=1.0, cmap=cmap,
                cbar_kws={'label': r'$P_S$'})
    plt.title(title)
    plt.ylabel(ylabel)
    plt.xlabel(xlabel)
    plt.tight_layout()
    if save_path:
        plt.savefig(save_path)
    plt.close()
    return figure


def plot_delta_curve(rows, title=r'Chaos indicator $\delta(t_M)$', save_path=None):
    """ Mean delta(t_M) against A with standard-error bars; dotted line at 1/sqrt(2). """
    a = np.asarray([r.a for r in rows])
    mean = np.asarray([r.mean_final_delta for r in rows])
    err = np.asarray([r.stderr for r in rows])

    figure = plt.figure(figsize=(5, 4))
    plt.errorbar(a, mean, yerr=err, marker='o', markersize=3, capsize=2)
    plt.axhline(1.0 / math.sqrt(2.0), color='gray', linestyle=':', label=r'$1/\sqrt{2}$')
    plt.ylim(-0.02, 0.8)
    plt.xlabel('A')
    plt.ylabel(r'$\delta(t_M)$')
    plt.title(title)
    plt.legend()
    plt.tight_layout()
    if save_path:
        plt.savefig(save_path)
    plt.close()
    return figure


def plot_delta_series(records, save_path=None):
    """ delta(t_m) against m for a few divergence records, log scale. """
    figure = plt.figure(figsize=(5, 4))
    for record in records:
        m, delta = zip(*record.deltas)
        plt.plot(m, np.maximum(delta, 1e-12), label='A=%g' % record.a)
    plt.yscale('log')
    plt.xlabel('m')
    plt.ylabel(r'$\delta(t_m)$')
    plt.legend()
    plt.tight_layout()
    if save_path:
        plt.savefig(save_path)
    plt.close()
    return figure


def plot_scan_csv(file_name):
    """ Re-plot a chaos scan CSV next to itself. """
    frame = pd.read_csv(file_name)
    rows = [r for r in frame.itertuples(index=False)]
    return plot_delta_curve(rows, save_path=os.path.splitext(file_name)[0] + '.png')


if __name__ == "__main__":
    import sys
    plt.rcParams.update({'font.size': 14})
    for path in sys.argv[1:]:
        plot_scan_csv(path)
