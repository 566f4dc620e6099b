"""
Invariant suite run by the ``verify`` command.

Each check measures a residual at a handful of phases taken from the run's
grid (interval midpoints, so phi = 0 and phi = pi are never sampled) and
compares it with a threshold that can be overridden from the command line.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from src.models.self_energy import effective_hamiltonian
from src.models.tight_binding import build_total, current_operator
from src.observables.correlators import expect_quadratic
from src.observables.currents import (
    current_lr,
    current_rr,
    isolated_current,
    operator_current_site_resolved,
    persistent_current_finiteT,
    persistent_current_trace,
)
from src.oracle.hermitian_oracle import exact_current, exact_site_currents, exact_tunnel_current
from src.spectra.biorthogonal import BiorthogonalSpectrum, biorthogonal_eig, eigenvalues_only
from src.sweep.run_config import RunConfig
from src.sweep.runner import SweepRunner
from src.utils.config_manager import ConfigManager
from src.utils.errors import ConfigValidationError
from src.utils.logger import PipelineLogger, get_pipeline_logger

DEFAULT_THRESHOLDS: Dict[str, float] = {
    'gauge_real_shift': 1e-10,
    'gauge_traceless_complex_shift': 1e-10,
    'particle_hole_pairing': 1e-9,
    'hermitian_limit': 1e-5,
    'local_conservation': 1e-10,
    'hellmann_feynman': 1e-5,
    'trace_operator_equivalence': 1e-6,
    'nh_vs_exact': 2e-2,
}

HERMITIAN_LIMIT_KAPPA = -1e-6
HF_DELTA_PHI = 1e-5
HF_MIN_RIGIDITY = 0.5


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""
    name: str
    residual: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    name: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'passed': self.passed,
            'checks': [asdict(check) for check in self.checks],
        }


def parse_tolerances(items: Sequence[str]) -> Dict[str, float]:
    """
    Parse ``name=value`` threshold overrides.

    Raises:
        ConfigValidationError: malformed item, unknown check or non-positive value
    """
    overrides: Dict[str, float] = {}
    for item in items:
        name, sep, raw = item.partition('=')
        name = name.strip()
        if not sep:
            raise ConfigValidationError(f"expected NAME=VALUE, got '{item}'", field="tol")
        if name not in DEFAULT_THRESHOLDS:
            raise ConfigValidationError(
                f"unknown check '{name}' (checks: {', '.join(DEFAULT_THRESHOLDS)})", field="tol")
        try:
            value = float(raw)
        except ValueError as e:
            raise ConfigValidationError(f"threshold for '{name}' is not a number: '{raw}'", field="tol") from e
        if not value > 0.0:
            raise ConfigValidationError(f"threshold for '{name}' must be positive, got {value}", field="tol")
        overrides[name] = value
    return overrides


def sample_phases(start: float, stop: float, count: int) -> np.ndarray:
    """Midpoints of ``count`` equal sub-intervals of [start, stop]."""
    return start + (np.arange(count) + 0.5) / count * (stop - start)


def _random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def _random_dissipative(rng: np.random.Generator, dim: int, channels: int = 2) -> np.ndarray:
    """Hermitian part minus i Gamma Gamma^dag: every eigenvalue has Im <= 0."""
    gamma = 0.3 * (rng.normal(size=(dim, channels)) + 1j * rng.normal(size=(dim, channels)))
    return _random_hermitian(rng, dim) - 1j * gamma @ gamma.conj().T


class Verifier:
    """Runs the invariant checks against one RunConfig."""

    def __init__(self, config: ConfigManager, tolerances: Optional[Dict[str, float]] = None,
                 sample_points: int = 8, trials: int = 100, delta_phi: Optional[float] = None):
        """
        Initialize the verifier.

        Args:
            config: Configuration manager instance
            tolerances: Threshold overrides by check name
            sample_points: Phases sampled from the run grid
            trials: Random operator/spectrum pairs of the gauge checks
            delta_phi: Finite-difference step override
        """
        self.config = config
        self.logger = get_pipeline_logger("verify")
        self.thresholds = {**DEFAULT_THRESHOLDS, **(tolerances or {})}
        self.sample_points = sample_points
        self.trials = trials
        self.runner = SweepRunner(config, max_workers=1, delta_phi=delta_phi)
        self.numerics = config.numerics
        self.dim_cap = config.oracle.dim_cap

    def _result(self, name: str, residual: float, detail: str = "") -> CheckResult:
        threshold = self.thresholds[name]
        residual = float(residual)
        passed = bool(np.isfinite(residual) and residual <= threshold)
        if passed:
            self.logger.info(f"{name}: residual {residual:.3e} <= {threshold:.1e}")
        else:
            self.logger.error(f"{name}: residual {residual:.3e} exceeds {threshold:.1e}")
        return CheckResult(name=name, residual=residual, threshold=threshold, passed=passed, detail=detail)

    def _phases(self, run: RunConfig) -> np.ndarray:
        grid = run.phi_grid
        return sample_phases(grid.start, grid.stop, min(self.sample_points, grid.count))

    def _spectrum(self, run: RunConfig, phi: float) -> BiorthogonalSpectrum:
        return self.runner.spectrum_at(run.model, run.reservoirs, phi)[0]

    def _exact_available(self, run: RunConfig) -> bool:
        return bool(run.reservoirs) and run.oracle_dimension <= self.dim_cap

    def check_gauge(self, run: RunConfig) -> List[CheckResult]:
        """Real shifts of f_eff leave any observable unchanged; complex shifts leave traceless ones unchanged."""
        rng = np.random.default_rng(0 if run.seed is None else run.seed)
        real_residual, complex_residual = 0.0, 0.0
        for _ in range(self.trials):
            dim = int(rng.integers(2, 9))
            spectrum = biorthogonal_eig(_random_dissipative(rng, dim))
            operator = _random_hermitian(rng, dim)
            traceless = operator - np.trace(operator) / dim * np.eye(dim)
            real_shift = float(3.0 * rng.normal())
            complex_shift = complex(rng.normal(), rng.normal())

            base = expect_quadratic(spectrum, operator)
            shifted = expect_quadratic(spectrum, operator, shift=real_shift)
            real_residual = max(real_residual, abs(shifted - base))

            base = expect_quadratic(spectrum, traceless)
            shifted = expect_quadratic(spectrum, traceless, shift=complex_shift)
            complex_residual = max(complex_residual, abs(shifted - base))

        detail = f"{self.trials} random operator/spectrum pairs"
        return [
            self._result('gauge_real_shift', real_residual, detail),
            self._result('gauge_traceless_complex_shift', complex_residual, detail),
        ]

    def check_particle_hole(self, run: RunConfig) -> CheckResult:
        """(eps, -eps^*) pairing of H_eff and (eps, -eps) pairing of the closed BdG system."""
        residual = 0.0
        for phi in self._phases(run):
            values = eigenvalues_only(effective_hamiltonian(run.model.with_phi(phi), run.reservoirs))
            cost = np.abs(values[:, None] + values.conj()[None, :])
            rows, cols = linear_sum_assignment(cost)
            residual = max(residual, float(np.max(cost[rows, cols])))
        detail = "open system"
        if self._exact_available(run):
            values = linalg.eigvalsh(build_total(run.model.with_phi(self._phases(run)[0]), run.oracle_reservoirs))
            residual = max(residual, float(np.max(np.abs(values + values[::-1]))))
            detail = "open and closed systems"
        return self._result('particle_hole_pairing', residual, detail)

    def check_hermitian_limit(self, run: RunConfig) -> CheckResult:
        """Every NH method approaches the isolated current as kappa -> 0."""
        weak = run.with_kappa(HERMITIAN_LIMIT_KAPPA)
        delta_phi = self.runner.delta_phi_for(run)
        residual = 0.0
        for phi in self._phases(run):
            reference = isolated_current(run.model, phi, run.beta, run.current_bond)
            spectrum = self._spectrum(weak, phi)
            current = current_operator(run.model.with_phi(phi), run.current_bond)
            values = [expect_quadratic(spectrum, current, beta=run.beta)]
            if run.beta is None:
                values.append(persistent_current_trace(run.model, weak.reservoirs, phi, delta_phi=delta_phi))
                values.append(current_lr(spectrum, current).real)
                values.append(current_rr(spectrum, current))
            else:
                values.append(persistent_current_finiteT(run.model, weak.reservoirs, run.beta, phi,
                                                         delta_phi=delta_phi))
            residual = max(residual, max(abs(v - reference) for v in values))
        return self._result('hermitian_limit', residual, f"kappa = {HERMITIAN_LIMIT_KAPPA:g}")

    def check_local_conservation(self, run: RunConfig) -> CheckResult:
        """Uniform NH operator current on every normal bond; exact currents conserved with no leakage."""
        residual = 0.0
        for phi in self._phases(run):
            spectrum = self._spectrum(run, phi)
            sites = operator_current_site_resolved(spectrum, run.model.with_phi(phi), beta=run.beta)
            residual = max(residual, float(np.ptp(sites)))
        detail = "NH operator current"
        if self._exact_available(run):
            phi = float(self._phases(run)[0])
            exact = exact_site_currents(run.model, run.oracle_reservoirs, phi, run.beta, dim_cap=self.dim_cap)
            residual = max(residual, float(np.ptp(exact)))
            for index in range(len(run.reservoirs)):
                leak = exact_tunnel_current(run.model, run.oracle_reservoirs, index, phi, run.beta,
                                            dim_cap=self.dim_cap)
                residual = max(residual, abs(leak))
            detail = "NH operator current, exact bond and tunnel currents"
        return self._result('local_conservation', residual, detail)

    def _matched_derivative(self, run: RunConfig, phi: float, center: np.ndarray) -> np.ndarray:
        def shifted(p: float) -> np.ndarray:
            values = eigenvalues_only(effective_hamiltonian(run.model.with_phi(p), run.reservoirs))
            _, cols = linear_sum_assignment(np.abs(center[:, None] - values[None, :]))
            return values[cols]
        return (shifted(phi + HF_DELTA_PHI) - shifted(phi - HF_DELTA_PHI)) / (2.0 * HF_DELTA_PHI)

    def check_hellmann_feynman(self, run: RunConfig) -> CheckResult:
        """Per-mode <L|J|R> equals doubling * d(eps)/dphi for well-conditioned modes."""
        residual, modes = 0.0, 0
        for phi in self._phases(run):
            spectrum = self._spectrum(run, phi)
            current = current_operator(run.model.with_phi(phi), run.current_bond)
            keep = spectrum.phase_rigidity > HF_MIN_RIGIDITY
            if not np.any(keep):
                continue
            derivative = self._matched_derivative(run, phi, spectrum.eigenvalues)
            mismatch = spectrum.expectation_lr(current) - spectrum.doubling * derivative
            residual = max(residual, float(np.max(np.abs(mismatch[keep]))))
            modes += int(np.sum(keep))
        return self._result('hellmann_feynman', residual, f"{modes} mode evaluations")

    def check_trace_operator(self, run: RunConfig) -> CheckResult:
        """Trace formula and operator formula give the same current away from EPs."""
        delta_phi = self.runner.delta_phi_for(run)
        residual, used = 0.0, 0
        for phi in self._phases(run):
            spectrum = self._spectrum(run, phi)
            if spectrum.min_rigidity < self.numerics.ep_rigidity_tol:
                continue
            current = current_operator(run.model.with_phi(phi), run.current_bond)
            operator_value = expect_quadratic(spectrum, current, beta=run.beta)
            if run.beta is None:
                trace_value = persistent_current_trace(run.model, run.reservoirs, phi, delta_phi=delta_phi)
            else:
                trace_value = persistent_current_finiteT(run.model, run.reservoirs, run.beta, phi,
                                                         delta_phi=delta_phi)
            residual = max(residual, abs(trace_value - operator_value))
            used += 1
        return self._result('trace_operator_equivalence', residual, f"{used} phase point(s)")

    def check_nh_vs_exact(self, run: RunConfig) -> CheckResult:
        """Deviation of the NH current from the closed-system current, relative to max |I_exact|."""
        delta_phi = self.runner.delta_phi_for(run)
        nh, exact = [], []
        for phi in self._phases(run):
            if run.beta is None:
                nh.append(persistent_current_trace(run.model, run.reservoirs, phi, delta_phi=delta_phi))
            else:
                nh.append(persistent_current_finiteT(run.model, run.reservoirs, run.beta, phi, delta_phi=delta_phi))
            exact.append(exact_current(run.model, run.oracle_reservoirs, phi, run.beta, run.current_bond,
                                       dim_cap=self.dim_cap))
        nh, exact = np.array(nh), np.array(exact)
        scale = float(np.max(np.abs(exact)))
        residual = float(np.max(np.abs(nh - exact))) / scale if scale > 0.0 else float(np.max(np.abs(nh)))
        return self._result('nh_vs_exact', residual, f"relative to max |I_exact| = {scale:.6g}")

    def run(self, run: RunConfig) -> VerificationReport:
        """
        Run every applicable check.

        Args:
            run: Validated run configuration

        Returns:
            VerificationReport; the particle-hole check is SNS-only and the
            exact comparison needs reservoirs and a dimension under the cap
        """
        report = VerificationReport(name=run.name)
        with PipelineLogger("verify", f"verification of '{run.name}'"):
            report.checks.extend(self.check_gauge(run))
            if run.model.is_bdg:
                report.checks.append(self.check_particle_hole(run))
            report.checks.append(self.check_hermitian_limit(run))
            report.checks.append(self.check_local_conservation(run))
            report.checks.append(self.check_hellmann_feynman(run))
            report.checks.append(self.check_trace_operator(run))
            if self._exact_available(run):
                report.checks.append(self.check_nh_vs_exact(run))
        self.logger.info(f"{len(report.checks) - len(report.failures)}/{len(report.checks)} checks passed")
        return report
