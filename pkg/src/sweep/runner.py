"""
Sweep Runner

Evaluates every requested method on the phase grid of a RunConfig, locates
exceptional points, builds the susceptibility maps and the coupling-strength
scan, and writes the result files together with a run manifest.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src import __version__
from src.models.self_energy import EffectiveHamiltonian, effective_hamiltonian
from src.models.tight_binding import ModelSpec, ReservoirSpec, build_system, current_operator
from src.observables.correlators import expect_quadratic
from src.observables.currents import (
    CurrentCurve,
    current_lr,
    current_rr,
    current_rr_site_resolved,
    isolated_current,
    persistent_current_finiteT,
    persistent_current_trace,
)
from src.oracle.hermitian_oracle import exact_current, exact_free_energy_current
from src.response.susceptibility import (
    SusceptibilityMap,
    SusceptibilityMethod,
    im_susceptibility_nh,
    im_susceptibility_nh_broadened,
    map_deviation,
    susceptibility_exact,
)
from src.spectra.biorthogonal import BiorthogonalSpectrum, biorthogonal_eig
from src.spectra.branches import BranchTracking, ExceptionalPoint, ep_mask, ep_scan, track_branches
from src.sweep.run_config import Method, RunConfig
from src.sweep.writers import OutputWriter
from src.utils.config_manager import ConfigManager, NumericsConfig
from src.utils.errors import AmbiguityWarning, DefectiveError
from src.utils.logger import PipelineLogger, get_pipeline_logger, log_function_call


@dataclass
class PointResult:
    """Everything evaluated at one grid phase."""
    index: int
    phi: float
    spectrum: BiorthogonalSpectrum
    currents: Dict[str, complex] = field(default_factory=dict)
    rr_sites: Optional[np.ndarray] = None
    iso_levels: Optional[np.ndarray] = None
    susceptibility_nh: Optional[np.ndarray] = None
    susceptibility_nh_broadened: Optional[np.ndarray] = None
    susceptibility_exact: Optional[np.ndarray] = None
    nudge: Optional[float] = None


@dataclass
class SweepResult:
    """In-memory results of one sweep."""
    config: RunConfig
    curve: CurrentCurve
    points: List[PointResult]
    tracking: BranchTracking
    rigidities: np.ndarray
    exceptional_points: List[ExceptionalPoint]
    susceptibilities: Dict[str, SusceptibilityMap] = field(default_factory=dict)
    site_currents: Optional[np.ndarray] = None
    iso_spectrum: Optional[np.ndarray] = None
    amplitudes: Dict[str, np.ndarray] = field(default_factory=dict)
    map_deviation: Optional[float] = None
    timings: Dict[str, float] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)

    @property
    def phis(self) -> np.ndarray:
        return self.curve.phi_grid

    @property
    def nudges(self) -> List[Dict[str, float]]:
        return [
            {'index': p.index, 'phi': float(self.phis[p.index]), 'nudge': p.nudge}
            for p in self.points if p.nudge is not None
        ]


class SweepRunner:
    """Runs phase sweeps described by RunConfig objects."""

    def __init__(self, config: ConfigManager, max_workers: Optional[int] = None,
                 delta_phi: Optional[float] = None):
        """
        Initialize the sweep runner.

        Args:
            config: Configuration manager instance
            max_workers: Worker-pool size, overrides the configured value
            delta_phi: Finite-difference step, overrides config and run values
        """
        self.config = config
        self.logger = get_pipeline_logger("sweep")
        self.numerics: NumericsConfig = config.numerics
        self.max_workers = max(1, int(max_workers or config.sweep.max_workers))
        self.delta_phi_override = delta_phi
        self.dim_cap = config.oracle.dim_cap

    def delta_phi_for(self, run: RunConfig) -> float:
        if self.delta_phi_override is not None:
            return float(self.delta_phi_override)
        if run.delta_phi is not None:
            return float(run.delta_phi)
        return self.numerics.delta_phi

    def _eta(self, run: RunConfig) -> float:
        return float(run.eta) if run.eta is not None else self.config.oracle.eta

    def _map_points(self, task: Callable[[int, float], Any], phis: np.ndarray) -> List[Any]:
        """Evaluate ``task`` on every grid point; results ordered by grid index."""
        results: List[Any] = [None] * len(phis)
        if self.max_workers == 1:
            for index, phi in enumerate(phis):
                results[index] = task(index, float(phi))
            return results
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {
                executor.submit(task, index, float(phi)): index for index, phi in enumerate(phis)
            }
            for future in as_completed(future_to_index):
                results[future_to_index[future]] = future.result()
        return results

    def spectrum_at(self, model: ModelSpec, reservoirs: Sequence[ReservoirSpec],
                     phi: float) -> Tuple[BiorthogonalSpectrum, Optional[float]]:
        """Biorthogonal spectrum at phi, nudged once by ``ep_nudge`` if phi sits on an EP."""
        hamiltonian = effective_hamiltonian(model.with_phi(phi), reservoirs)
        try:
            return biorthogonal_eig(hamiltonian, rigidity_floor=self.numerics.rigidity_floor), None
        except DefectiveError as e:
            nudge = self.numerics.ep_nudge
            self.logger.warning(f"Defective H_eff at phi={phi:.12g} ({e}); retrying at phi + {nudge:g}")
            nudged = effective_hamiltonian(model.with_phi(phi + nudge), reservoirs)
            return biorthogonal_eig(nudged, rigidity_floor=self.numerics.rigidity_floor), nudge

    def _trace_current(self, run: RunConfig, reservoirs: Sequence[ReservoirSpec], phi: float) -> float:
        delta_phi = self.delta_phi_for(run)
        if run.beta is None:
            return persistent_current_trace(run.model, reservoirs, phi, delta_phi=delta_phi,
                                            zero_guard=self.numerics.zero_guard, tol_im=self.numerics.tol_im)
        return persistent_current_finiteT(run.model, reservoirs, run.beta, phi, delta_phi=delta_phi,
                                          tol_im=self.numerics.tol_im)

    def _evaluate_point(self, run: RunConfig, index: int, phi: float) -> PointResult:
        reservoirs = run.reservoirs
        bond = run.current_bond
        spectrum, nudge = self.spectrum_at(run.model, reservoirs, phi)
        system = run.model.with_phi(phi + (nudge or 0.0))
        point = PointResult(index=index, phi=phi, spectrum=spectrum, nudge=nudge)

        current = None
        if any(run.wants(m) for m in (Method.NH_OPERATOR, Method.LR, Method.RR)):
            current = current_operator(system, bond)
        for method in run.methods:
            if method == Method.NH_TRACE:
                point.currents[method.value] = self._trace_current(run, reservoirs, phi)
            elif method == Method.NH_OPERATOR:
                point.currents[method.value] = expect_quadratic(spectrum, current, beta=run.beta,
                                                                tol_im=self.numerics.tol_im)
            elif method == Method.LR:
                point.currents[method.value] = current_lr(spectrum, current)
            elif method == Method.RR:
                point.currents[method.value] = current_rr(spectrum, current)
            elif method == Method.ISO:
                point.currents[method.value] = isolated_current(run.model, phi, run.beta, bond)
            elif method == Method.ISO_SPECTRUM:
                point.iso_levels = linalg.eigvalsh(build_system(run.model.with_phi(phi)))
            elif method == Method.EXACT:
                point.currents[method.value] = exact_current(run.model, run.oracle_reservoirs, phi, run.beta, bond,
                                                             dim_cap=self.dim_cap)
            elif method == Method.EXACT_FREE_ENERGY:
                point.currents[method.value] = exact_free_energy_current(
                    run.model, run.oracle_reservoirs, run.beta, phi, delta_phi=self.delta_phi_for(run),
                    dim_cap=self.dim_cap)
            elif method == Method.RR_SITES:
                point.rr_sites = current_rr_site_resolved(spectrum, system)
            elif method == Method.SUSCEPTIBILITY_NH:
                point.susceptibility_nh = im_susceptibility_nh(
                    spectrum, system, run.omega_grid.values(), bond,
                    degenerate_tol=self.numerics.degenerate_denominator, tol_im=self.numerics.tol_im)
                if run.wants(Method.SUSCEPTIBILITY_EXACT):
                    point.susceptibility_nh_broadened = im_susceptibility_nh_broadened(
                        spectrum, system, run.omega_grid.values(), eta=self._eta(run), bond=bond,
                        degenerate_tol=self.numerics.degenerate_denominator, tol_im=self.numerics.tol_im)
            elif method == Method.SUSCEPTIBILITY_EXACT:
                point.susceptibility_exact = susceptibility_exact(
                    run.model, run.oracle_reservoirs, run.omega_grid.values(), phi, eta=self._eta(run), bond=bond,
                    dim_cap=self.dim_cap)
        return point

    def _builder(self, run: RunConfig) -> Callable[[float], EffectiveHamiltonian]:
        def build(phi: float) -> EffectiveHamiltonian:
            return effective_hamiltonian(run.model.with_phi(phi), run.reservoirs)
        return build

    def _scan_exceptional_points(self, run: RunConfig, points: List[PointResult]) -> List[ExceptionalPoint]:
        builder = self._builder(run)
        sweep = [builder(p.phi) for p in points]
        spectra = [None if p.nudge is not None else p.spectrum for p in points]
        return ep_scan(sweep, spectra, gap_tol=self.numerics.ep_gap_tol,
                       rigidity_tol=self.numerics.ep_rigidity_tol, builder=builder)

    def _track(self, phis: np.ndarray, points: List[PointResult],
               eps: List[ExceptionalPoint]) -> Tuple[BranchTracking, np.ndarray]:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AmbiguityWarning)
            tracking = track_branches([p.spectrum.eigenvalues for p in points], unresolved=ep_mask(phis, eps))
        for warning in caught:
            self.logger.warning(str(warning.message))
        rigidities = np.array([p.spectrum.phase_rigidity[tracking.order[k]] for k, p in enumerate(points)])
        return tracking, rigidities

    def _kappa_scan(self, run: RunConfig) -> Dict[str, np.ndarray]:
        """Maximum |I| over the phase grid for every tunnel amplitude of the scan."""
        phis = run.phi_grid.values()
        with_exact = run.wants(Method.EXACT)
        amplitudes: Dict[str, List[float]] = {Method.NH_TRACE.value: []}
        if with_exact:
            amplitudes[Method.EXACT.value] = []

        for kappa in run.kappa_scan:
            scanned = run.with_kappa(kappa)

            def task(index: int, phi: float) -> Tuple[float, Optional[float]]:
                nh = self._trace_current(scanned, scanned.reservoirs, phi)
                exact = (exact_current(scanned.model, scanned.oracle_reservoirs, phi, scanned.beta,
                                       scanned.current_bond, dim_cap=self.dim_cap) if with_exact else None)
                return nh, exact

            values = self._map_points(task, phis)
            amplitudes[Method.NH_TRACE.value].append(max(abs(v[0]) for v in values))
            if with_exact:
                amplitudes[Method.EXACT.value].append(max(abs(v[1]) for v in values))
            self.logger.info(f"kappa={kappa:g}: NH amplitude {amplitudes[Method.NH_TRACE.value][-1]:.6g}")
        return {name: np.array(column) for name, column in amplitudes.items()}

    @log_function_call
    def compute(self, run: RunConfig) -> SweepResult:
        """
        Evaluate a RunConfig without writing anything.

        Args:
            run: Validated run configuration

        Returns:
            SweepResult with currents, spectra, EPs, maps and amplitudes
        """
        phis = run.phi_grid.values()
        timings: Dict[str, float] = {}
        self.logger.info(
            f"Sweep '{run.name}': {run.model.kind.value} model, {len(phis)} phase points, "
            f"methods {', '.join(m.value for m in run.methods)}, {self.max_workers} worker(s)"
        )

        with PipelineLogger("sweep", "phase sweep") as stage:
            points = self._map_points(lambda index, phi: self._evaluate_point(run, index, phi), phis)
        timings['phase_sweep'] = stage.duration

        with PipelineLogger("sweep", "exceptional-point scan") as stage:
            eps = self._scan_exceptional_points(run, points)
            tracking, rigidities = self._track(phis, points, eps)
        timings['ep_scan'] = stage.duration

        curve = CurrentCurve(phi_grid=phis, beta=run.beta, model_hash=run.model.fingerprint())
        for method in run.current_methods:
            column = [p.currents[method.value] for p in points]
            curve.add(method.value, np.array(column, dtype=complex if method == Method.LR else float))

        result = SweepResult(config=run, curve=curve, points=points, tracking=tracking,
                             rigidities=rigidities, exceptional_points=eps, timings=timings)

        if run.wants(Method.RR_SITES):
            result.site_currents = np.array([p.rr_sites for p in points])
        if run.wants(Method.ISO_SPECTRUM):
            result.iso_spectrum = np.array([p.iso_levels for p in points])

        eta = self._eta(run)
        if run.wants(Method.SUSCEPTIBILITY_NH):
            result.susceptibilities['nh'] = SusceptibilityMap(
                phis, run.omega_grid.values(), np.array([p.susceptibility_nh for p in points]),
                SusceptibilityMethod.NH_ANALYTIC)
        if run.wants(Method.SUSCEPTIBILITY_EXACT):
            result.susceptibilities['exact'] = SusceptibilityMap(
                phis, run.omega_grid.values(), np.array([p.susceptibility_exact for p in points]),
                SusceptibilityMethod.HERMITIAN_EXACT, eta=eta)
        if run.wants(Method.SUSCEPTIBILITY_NH) and run.wants(Method.SUSCEPTIBILITY_EXACT):
            result.susceptibilities['nh_broadened'] = SusceptibilityMap(
                phis, run.omega_grid.values(), np.array([p.susceptibility_nh_broadened for p in points]),
                SusceptibilityMethod.NH_BROADENED, eta=eta)
            result.map_deviation = map_deviation(result.susceptibilities['nh_broadened'],
                                                 result.susceptibilities['exact'])
            self.logger.info(f"Normalized NH map (broadened by eta={eta:g}) deviates from the exact map "
                             f"by at most {result.map_deviation:.3g}")

        if run.kappa_scan:
            with PipelineLogger("sweep", "coupling-strength scan") as stage:
                result.amplitudes = self._kappa_scan(run)
            timings['kappa_scan'] = stage.duration

        for nudge in result.nudges:
            self.logger.warning(f"EP nudge at phi={nudge['phi']:.12g} by {nudge['nudge']:g}")
        return result

    def manifest(self, result: SweepResult) -> Dict[str, Any]:
        run = result.config
        return {
            'name': run.name,
            'version': __version__,
            'model_hash': run.model.fingerprint(),
            'config': run.to_dict(),
            'numerics': {
                'delta_phi': self.delta_phi_for(run),
                'eta': self._eta(run) if run.wants(Method.SUSCEPTIBILITY_EXACT) else None,
                'tol_im': self.numerics.tol_im,
                'zero_guard': self.numerics.zero_guard,
                'rigidity_floor': self.numerics.rigidity_floor,
                'ep_gap_tol': self.numerics.ep_gap_tol,
                'ep_rigidity_tol': self.numerics.ep_rigidity_tol,
                'ep_nudge': self.numerics.ep_nudge,
            },
            'workers': self.max_workers,
            'ep_nudges': result.nudges,
            'susceptibility_deviation': result.map_deviation,
            'exceptional_points': len(result.exceptional_points),
            'branch_ambiguities': [
                {'index': int(k), 'gap': float(gap)} for k, gap in result.tracking.ambiguities
            ],
            'timings': result.timings,
        }

    def write(self, result: SweepResult, writer: OutputWriter) -> List[str]:
        """Serialize a SweepResult; output writing is serialized on the calling thread."""
        run = result.config
        with PipelineLogger("sweep", "writing outputs") as stage:
            writer.write_currents(result.curve)
            writer.write_spectrum(result.phis, result.tracking, result.rigidities)
            writer.write_eps(result.exceptional_points)
            if result.iso_spectrum is not None:
                writer.write_iso_spectrum(result.phis, result.iso_spectrum)
            for suffix, susceptibility in result.susceptibilities.items():
                writer.write_susceptibility(suffix, susceptibility)
            if result.site_currents is not None:
                writer.write_site_currents(result.phis, list(run.model.normal_bonds), result.site_currents)
            if result.amplitudes:
                writer.write_amplitudes(run.kappa_scan, result.amplitudes)
        result.timings['write'] = stage.duration
        writer.write_manifest(self.manifest(result))
        result.files = writer.file_names
        return result.files

    def run(self, run: RunConfig, output_dir: str) -> SweepResult:
        """
        Compute and write a sweep; files of a failing run are removed.

        Args:
            run: Validated run configuration
            output_dir: Destination directory

        Returns:
            SweepResult with ``files`` filled in
        """
        writer = OutputWriter(output_dir)
        try:
            result = self.compute(run)
            self.write(result, writer)
        except Exception:
            writer.discard()
            raise
        self.logger.info(f"Sweep '{run.name}' wrote {len(result.files)} file(s) to {output_dir}")
        return result

