"""Matplotlib rendering of benchmark frames."""

import json
import logging

import matplotlib
matplotlib.use('Agg')  # Use non-interactive backend
import matplotlib.pyplot as plt
from matplotlib.figure import Figure
from matplotlib import ticker
import numpy as np
import pandas as pd
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .harness import DEPTH_COLUMNS, MODE_COLUMNS, PHASE_COLUMNS

logger = logging.getLogger(__name__)

CHART_FORMATS = ('png', 'svg', 'pdf')

DEFAULT_COLORS = {
    'exact': '#1f77b4',
    'hist': '#ff7f0e',
    'dynamic': '#2ca02c',
    'dynamic-scalar': '#9467bd',
    'dynamic-two-level': '#2ca02c',
}


@dataclass
class PlotConfig:
    """Figure settings shared by all benchmark charts."""
    title: str = ''
    figure_width: float = 8.0
    figure_height: float = 5.0
    dpi: int = 100
    background_color: str = '#FFFFFF'
    font_size: int = 11
    log_y: bool = False
    grid: bool = True
    colors: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))

    def to_dict(self) -> Dict:
        return asdict(self)


class ProfileChartEngine:
    """Draws depth, phase and mode-comparison charts from harness frames."""

    def __init__(self):
        self.figure: Optional[Figure] = None
        self.config: Optional[PlotConfig] = None
        self.kind: Optional[str] = None

    def _new_axes(self, config: PlotConfig, kind: str):
        self.config = config
        self.kind = kind
        plt.close('all')
        plt.rcParams['font.size'] = config.font_size
        self.figure = plt.figure(
            figsize=(config.figure_width, config.figure_height),
            dpi=config.dpi,
            facecolor=config.background_color,
        )
        ax = self.figure.add_subplot(111)
        ax.set_facecolor(config.background_color)
        if config.grid:
            ax.grid(True, axis='y', alpha=0.3, linestyle='--')
        if config.title:
            ax.set_title(config.title)
        return ax

    @staticmethod
    def _require(frame: pd.DataFrame, columns: List[str]):
        if frame.empty:
            raise ValueError("No data provided")
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise ValueError(f"Frame is missing columns: {missing}")

    def create_depth_chart(self, frame: pd.DataFrame, config: Optional[PlotConfig] = None) -> Figure:
        """
        Seconds spent per depth, one line per split mode.

        Raises:
            ValueError: If the frame lacks the depth-profile columns
        """
        self._require(frame, DEPTH_COLUMNS)
        config = config or PlotConfig(title='Training time by depth', log_y=True)
        ax = self._new_axes(config, 'depth')

        for mode, rows in frame.groupby('mode', sort=False):
            ax.plot(rows['depth'], rows['seconds'], label=mode, marker='o', markersize=3,
                    color=config.colors.get(mode), linewidth=1.5)
        ax.set_xlabel('Depth')
        ax.set_ylabel('Seconds')
        ax.xaxis.set_major_locator(ticker.MaxNLocator(integer=True))
        if config.log_y:
            ax.set_yscale('symlog', linthresh=1e-4)
        ax.legend(frameon=False)
        return self.figure

    def create_phase_chart(self, frame: pd.DataFrame, config: Optional[PlotConfig] = None) -> Figure:
        """Stacked bars of per-phase seconds for each depth bucket."""
        self._require(frame, PHASE_COLUMNS)
        config = config or PlotConfig(title='Split phases by depth')
        ax = self._new_axes(config, 'phase')

        table = frame.pivot(index='depth_bucket', columns='phase', values='seconds')
        table = table.reindex(index=frame['depth_bucket'].unique(), columns=frame['phase'].unique())
        positions = np.arange(len(table.index))
        bottom = np.zeros(len(table.index))
        for phase in table.columns:
            heights = table[phase].to_numpy(dtype=float)
            ax.bar(positions, heights, bottom=bottom, label=phase, width=0.6)
            bottom += heights
        ax.set_xticks(positions)
        ax.set_xticklabels(table.index)
        ax.set_xlabel('Depth bucket')
        ax.set_ylabel('Seconds')
        ax.legend(frameon=False)
        return self.figure

    def create_mode_chart(self, frame: pd.DataFrame, config: Optional[PlotConfig] = None) -> Figure:
        """Bars of training time normalized to exact splitting."""
        self._require(frame, MODE_COLUMNS)
        config = config or PlotConfig(title='Normalized training time')
        ax = self._new_axes(config, 'modes')

        labels = list(frame['mode'])
        positions = np.arange(len(labels))
        ax.bar(positions, frame['normalized'], width=0.6,
               color=[config.colors.get(m, '#7f7f7f') for m in labels])
        ax.axhline(1.0, color='#444444', linewidth=0.8, linestyle=':')
        ax.set_xticks(positions)
        ax.set_xticklabels(labels, rotation=15)
        ax.set_ylabel('Time relative to exact')
        return self.figure

    def save_chart(self, output_path: str, format: Optional[str] = None,
                   dpi: Optional[int] = None, record_settings: bool = False) -> Path:
        """
        Write the current chart, taking the format from the path's suffix.

        With ``record_settings`` the chart kind and its PlotConfig are written
        next to the image as ``<stem>.plot.json``.

        Args:
            output_path: Image path; parent directories are created
            format: png, svg or pdf; must agree with the suffix when both are given
            dpi: Raster resolution (png only); defaults to the chart's PlotConfig

        Returns:
            Path of the written image

        Raises:
            ValueError: If no chart has been created or the format is not supported
        """
        if self.figure is None:
            raise ValueError("No chart created. Call a create_*_chart method first.")

        output_path = Path(output_path)
        suffix = output_path.suffix.lstrip('.').lower()
        chart_format = (format or suffix or 'png').lower()
        if chart_format not in CHART_FORMATS:
            raise ValueError(f"Invalid format: {chart_format}. Must be one of {list(CHART_FORMATS)}")
        if suffix and suffix != chart_format:
            raise ValueError(f"Format {chart_format} does not match file suffix .{suffix}")

        output_path.parent.mkdir(parents=True, exist_ok=True)
        save_dpi = dpi if dpi is not None else self.config.dpi
        self.figure.savefig(
            output_path,
            format=chart_format,
            dpi=save_dpi if chart_format == 'png' else None,
            bbox_inches='tight',
            facecolor=self.figure.get_facecolor(),
        )

        if record_settings:
            settings = {'chart': self.kind, 'format': chart_format, 'dpi': save_dpi,
                        **self.config.to_dict()}
            settings_path = output_path.with_name(output_path.stem + '.plot.json')
            settings_path.write_text(json.dumps(settings, indent=2))
        logger.info("Saved %s chart to %s", self.kind, output_path)
        return output_path

    def clear(self):
        if self.figure is not None:
            plt.close(self.figure)
            self.figure = None
        self.config = None
        self.kind = None
