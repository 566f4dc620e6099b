"""
Sweep Output Writer

Serializes sweep results to CSV and JSON files in one output directory and
removes everything it wrote when the run fails.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.observables.currents import CurrentCurve
from src.response.susceptibility import SusceptibilityMap
from src.spectra.branches import BranchTracking, ExceptionalPoint
from src.utils.logger import get_pipeline_logger

FLOAT_FORMAT = '%.17g'
LINE_TERMINATOR = '\n'


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


class OutputWriter:
    """Writes result files and keeps track of them for cleanup."""

    def __init__(self, output_dir: str):
        """
        Initialize the writer.

        Args:
            output_dir: Directory receiving the files, created if missing
        """
        self.output_dir = Path(output_dir)
        self.logger = get_pipeline_logger("writers")
        self.written: List[Path] = []

    def _target(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / name
        self.written.append(path)
        return path

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        """CSV with a header row, 17 significant digits and LF line endings."""
        path = self._target(name)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator=LINE_TERMINATOR)
        self.logger.debug(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._target(name)
        with open(path, 'w', newline=LINE_TERMINATOR) as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
            f.write(LINE_TERMINATOR)
        return path

    def write_currents(self, curve: CurrentCurve) -> Path:
        return self.write_frame("currents.csv", curve.to_frame())

    def write_spectrum(self, phis: Sequence[float], tracking: BranchTracking,
                       rigidities: np.ndarray) -> Path:
        """
        Long-format spectrum: one row per (phi, branch).

        Args:
            phis: Grid phases
            tracking: Branch-ordered eigenvalues
            rigidities: Phase rigidity per (grid point, branch)
        """
        n_points, n_branches = tracking.values.shape
        frame = pd.DataFrame({
            'phi': np.repeat(np.asarray(phis, dtype=float), n_branches),
            'branch': np.tile(np.arange(n_branches), n_points),
            're': tracking.values.real.ravel(),
            'im': tracking.values.imag.ravel(),
            'phase_rigidity': np.asarray(rigidities, dtype=float).ravel(),
        })
        return self.write_frame("spectrum.csv", frame)

    def write_iso_spectrum(self, phis: Sequence[float], levels: np.ndarray) -> Path:
        """Ascending eigenvalues of the isolated device, one row per (phi, branch)."""
        levels = np.asarray(levels, dtype=float)
        n_points, n_branches = levels.shape
        frame = pd.DataFrame({
            'phi': np.repeat(np.asarray(phis, dtype=float), n_branches),
            'branch': np.tile(np.arange(n_branches), n_points),
            'energy': levels.ravel(),
        })
        return self.write_frame("iso_spectrum.csv", frame)

    def write_eps(self, eps: Sequence[ExceptionalPoint]) -> Path:
        columns = ['phi_low', 'phi_high', 'phi_estimate', 'mode_a', 'mode_b',
                   'min_distance', 'min_rigidity', 'refined']
        frame = pd.DataFrame([[getattr(ep, c) for c in columns] for ep in eps], columns=columns)
        return self.write_frame("eps.csv", frame)

    def write_susceptibility(self, suffix: str, susceptibility: SusceptibilityMap) -> List[Path]:
        """Raw map as CSV plus a JSON sidecar carrying the normalization."""
        csv_path = self.write_frame(f"susceptibility_{suffix}.csv", susceptibility.to_frame())
        json_path = self.write_json(f"susceptibility_{suffix}.json", susceptibility.header())
        return [csv_path, json_path]

    def write_site_currents(self, phis: Sequence[float], bonds: Sequence[int], values: np.ndarray) -> Path:
        frame = pd.DataFrame(np.asarray(values, dtype=float), columns=[f"bond_{b}" for b in bonds])
        frame.insert(0, 'phi', np.asarray(phis, dtype=float))
        return self.write_frame("rr_sites.csv", frame)

    def write_amplitudes(self, kappas: Sequence[float], amplitudes: Dict[str, np.ndarray]) -> Path:
        frame = pd.DataFrame({'kappa': np.asarray(kappas, dtype=float)})
        for method, column in amplitudes.items():
            frame[method] = np.asarray(column, dtype=float)
        return self.write_frame("amplitudes.csv", frame)

    def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        manifest = dict(manifest)
        manifest['files'] = sorted({p.name for p in self.written} | {"run_manifest.json"})
        return self.write_json("run_manifest.json", manifest)

    def discard(self) -> None:
        """Remove every file written so far."""
        for path in self.written:
            try:
                if path.exists():
                    path.unlink()
            except OSError as e:
                self.logger.warning(f"Failed to remove partial output {path}: {e}")
        if self.written:
            self.logger.info(f"Removed {len(self.written)} partial output file(s) from {self.output_dir}")
        self.written = []

    @property
    def file_names(self) -> List[str]:
        return [p.name for p in self.written]


def resolve_output_dir(run_output_dir: Optional[str], override: Optional[str], default: str, name: str) -> str:
    """CLI flag, then the run configuration, then ``<default>/<run name>``."""
    if override:
        return override
    if run_output_dir:
        return run_output_dir
    return str(Path(default) / name)
