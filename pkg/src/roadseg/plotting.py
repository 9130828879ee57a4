"""Report figures written next to the CSV / text tables."""
from __future__ import annotations

from contextlib import contextmanager

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import v_disparity  # noqa: E402
from .io import overlay  # noqa: E402

RC = {
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "image.interpolation": "nearest",
}


@contextmanager
def _figure(ncols=1, nrows=1, width=10.0, height=3.2):
    with plt.rc_context(RC):
        fig, axes = plt.subplots(nrows, ncols, figsize=(width, height), squeeze=False)
        try:
            yield fig, axes.ravel()
        finally:
            plt.close(fig)


def _masked(values, valid):
    return np.ma.array(values, mask=~np.asarray(valid, dtype=bool))


def plot_transform(dmap, tm, path, mask=None):
    """Original map, transformed map and the original map's v-disparity image."""
    vd = v_disparity(dmap, mask, bins=256)
    with _figure(3, width=13.0) as (fig, ax):
        im = ax[0].imshow(_masked(dmap.values, dmap.valid), cmap="jet")
        ax[0].set_title("disparity")
        fig.colorbar(im, ax=ax[0], shrink=0.8)
        im = ax[1].imshow(_masked(tm.values, tm.valid), cmap="jet")
        ax[1].set_title(f"transformed (theta = {tm.model.theta_deg:.3f} deg)")
        fig.colorbar(im, ax=ax[1], shrink=0.8)
        ax[2].imshow(np.log1p(vd.counts), aspect="auto", cmap="gray_r",
                     extent=(vd.lo, vd.hi, dmap.height - 0.5, -0.5))
        ax[2].set_xlabel("disparity")
        ax[2].set_ylabel("row v")
        ax[2].set_title("v-disparity")
        for a in ax[:2]:
            a.set_xticks([])
            a.set_yticks([])
        fig.tight_layout()
        fig.savefig(path)


def plot_segmentation(tm, seg, path, base=None):
    with _figure(2, width=11.0) as (fig, ax):
        im = ax[0].imshow(_masked(tm.values, tm.valid), cmap="jet")
        ax[0].set_title("transformed disparity")
        fig.colorbar(im, ax=ax[0], shrink=0.8)
        ax[1].imshow(overlay(seg, base))
        ax[1].set_title(f"damage (threshold {seg.threshold:.3f}, {seg.n_damaged} px)")
        for a in ax:
            a.set_xticks([])
            a.set_yticks([])
        fig.tight_layout()
        fig.savefig(path)


def plot_delta_theta(angles, kappas, errors, path):
    """Heat map of roll-angle error over true angle and noise level."""
    with _figure(width=6.0, height=4.0) as (fig, ax):
        im = ax[0].pcolormesh(angles, kappas, errors.T, shading="nearest", cmap="viridis")
        ax[0].set_xlabel("roll angle (deg)")
        ax[0].set_ylabel("noise scale kappa")
        fig.colorbar(im, ax=ax[0], label="|error| (deg)")
        fig.tight_layout()
        fig.savefig(path)


def plot_bench(rows, path):
    names = [r.method for r in rows]
    with _figure(2, width=8.0, height=3.0) as (fig, ax):
        ax[0].bar(names, [r.solve_elapsed * 1e6 for r in rows], color="tab:blue")
        ax[0].set_ylabel("solve time (us)")
        ax[1].bar(names, [r.evaluations for r in rows], color="tab:orange")
        ax[1].set_ylabel("objective evaluations")
        fig.tight_layout()
        fig.savefig(path)
