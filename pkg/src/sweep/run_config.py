"""
Run configuration: schema, parsing and validation.

A run configuration is JSON-compatible structured text (JSON or YAML). It is
validated against a Draft 7 JSON schema; the first violation is reported with
its field path and, when parsed from text, the source line.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from jsonschema import Draft7Validator

from src.models.self_energy import sns_reservoirs
from src.models.tight_binding import (
    ModelKind,
    ModelSpec,
    ReservoirSpec,
    disordered_ring_hoppings,
    total_dimension,
    validate_reservoirs,
)
from src.utils.errors import ConfigValidationError, ValidationError


class Method(str, Enum):
    """Quantities a sweep can evaluate."""
    NH_TRACE = "nh_trace"
    NH_OPERATOR = "nh_operator"
    LR = "lr"
    RR = "rr"
    ISO = "iso"
    ISO_SPECTRUM = "iso_spectrum"
    EXACT = "exact"
    EXACT_FREE_ENERGY = "exact_free_energy"
    RR_SITES = "rr_sites"
    SUSCEPTIBILITY_NH = "susceptibility_nh"
    SUSCEPTIBILITY_EXACT = "susceptibility_exact"


CURRENT_METHODS = (Method.NH_TRACE, Method.NH_OPERATOR, Method.LR, Method.RR, Method.ISO,
                   Method.EXACT, Method.EXACT_FREE_ENERGY)
EXACT_METHODS = (Method.EXACT, Method.EXACT_FREE_ENERGY, Method.SUSCEPTIBILITY_EXACT)

_GRID_SCHEMA = {
    'type': 'object',
    'required': ['start', 'stop', 'count'],
    'additionalProperties': False,
    'properties': {
        'start': {'type': 'number'},
        'stop': {'type': 'number'},
        'count': {'type': 'integer', 'minimum': 2},
    },
}

RUN_CONFIG_SCHEMA: Dict[str, Any] = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['model', 'phi_grid', 'methods'],
    'additionalProperties': False,
    'properties': {
        'name': {'type': 'string'},
        'description': {'type': 'string'},
        'model': {
            'type': 'object',
            'required': ['kind'],
            'additionalProperties': False,
            'properties': {
                'kind': {'enum': [kind.value for kind in ModelKind]},
                't': {'type': 'number', 'exclusiveMaximum': 0},
                'mu': {'type': 'number'},
                'delta': {'type': 'number', 'minimum': 0},
                'n_left': {'type': 'integer', 'minimum': 1},
                'n_middle': {'type': 'integer', 'minimum': 1},
                'n_right': {'type': 'integer', 'minimum': 1},
                'hoppings': {'type': 'array', 'items': {'type': 'number'}, 'minItems': 3},
                'n_sites': {'type': 'integer', 'minimum': 3},
            },
        },
        'reservoirs': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['n_sites', 'attach_site', 'kappa'],
                'additionalProperties': False,
                'properties': {
                    'n_sites': {'type': 'integer', 'minimum': 1},
                    't': {'type': 'number', 'exclusiveMaximum': 0},
                    'g': {'type': 'number'},
                    'attach_site': {'type': 'integer', 'minimum': 0},
                    'kappa': {'type': 'number', 'maximum': 0},
                },
            },
        },
        'sns_reservoirs': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'n_sites': {'type': 'integer', 'minimum': 1},
                't': {'type': 'number', 'exclusiveMaximum': 0},
                'g': {'type': 'number'},
                'kappa': {'type': 'number', 'maximum': 0},
            },
        },
        'phi_grid': _GRID_SCHEMA,
        'omega_grid': _GRID_SCHEMA,
        'beta': {'type': ['number', 'null'], 'exclusiveMinimum': 0},
        'methods': {
            'type': 'array',
            'minItems': 1,
            'uniqueItems': True,
            'items': {'enum': [method.value for method in Method]},
        },
        'delta_phi': {'type': 'number', 'exclusiveMinimum': 0},
        'eta': {'type': 'number', 'exclusiveMinimum': 0},
        'seed': {'type': ['integer', 'null']},
        'current_bond': {'type': ['integer', 'null'], 'minimum': 0},
        'kappa_scan': {'type': 'array', 'items': {'type': 'number', 'maximum': 0}, 'minItems': 1},
        'oracle_reservoir_sites': {'type': ['integer', 'null'], 'minimum': 1},
        'output_dir': {'type': 'string'},
    },
}

_VALIDATOR = Draft7Validator(RUN_CONFIG_SCHEMA)


@dataclass(frozen=True)
class Grid:
    """Uniform grid with both end points included."""
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.count - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {'start': self.start, 'stop': self.stop, 'count': self.count}


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one sweep."""
    model: ModelSpec
    reservoirs: Tuple[ReservoirSpec, ...]
    phi_grid: Grid
    methods: Tuple[Method, ...]
    name: str = "custom"
    beta: Optional[float] = None
    omega_grid: Optional[Grid] = None
    delta_phi: Optional[float] = None
    eta: Optional[float] = None
    seed: Optional[int] = None
    current_bond: Optional[int] = None
    kappa_scan: Tuple[float, ...] = ()
    oracle_reservoir_sites: Optional[int] = None
    output_dir: Optional[str] = None
    document: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def wants(self, method: Method) -> bool:
        return method in self.methods

    @property
    def current_methods(self) -> List[Method]:
        return [m for m in self.methods if m in CURRENT_METHODS]

    @property
    def total_dimension(self) -> int:
        return total_dimension(self.model, self.reservoirs)

    @property
    def oracle_reservoirs(self) -> Tuple[ReservoirSpec, ...]:
        """Reservoirs handed to exact diagonalization, resized when oracle_reservoir_sites is set.

        The non-Hermitian side only sees the semi-infinite limit, so the size
        here controls the convergence of the exact reference alone.
        """
        if self.oracle_reservoir_sites is None:
            return self.reservoirs
        return tuple(replace(r, n_sites=self.oracle_reservoir_sites) for r in self.reservoirs)

    @property
    def oracle_dimension(self) -> int:
        return total_dimension(self.model, self.oracle_reservoirs)

    def with_kappa(self, kappa: float) -> "RunConfig":
        """Same run with every reservoir's tunnel amplitude replaced."""
        return replace(self, reservoirs=tuple(r.with_kappa(kappa) for r in self.reservoirs))

    def to_dict(self) -> Dict[str, Any]:
        """Resolved configuration for the run manifest."""
        return {
            'name': self.name,
            'model': self.model.to_dict(),
            'reservoirs': [r.to_dict() for r in self.reservoirs],
            'phi_grid': self.phi_grid.to_dict(),
            'omega_grid': self.omega_grid.to_dict() if self.omega_grid else None,
            'beta': self.beta,
            'methods': [m.value for m in self.methods],
            'delta_phi': self.delta_phi,
            'eta': self.eta,
            'seed': self.seed,
            'current_bond': self.current_bond,
            'kappa_scan': list(self.kappa_scan),
            'oracle_reservoir_sites': self.oracle_reservoir_sites,
            'output_dir': self.output_dir,
        }


def _node_line(root: Optional[yaml.Node], path: Sequence[Any]) -> Optional[int]:
    """1-based source line of the YAML node at ``path``, or of its closest parent."""
    node = root
    line = None if node is None else node.start_mark.line + 1
    for key in path:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            match = node.value[key]
        else:
            match = None
        if match is None:
            break
        node = match
        line = node.start_mark.line + 1
    return line


def _where(source: Optional[str], line: Optional[int]) -> Optional[str]:
    if source and line:
        return f"{source}:{line}"
    if line:
        return f"line {line}"
    return source


def _build_model(model: Dict[str, Any], seed: Optional[int]) -> ModelSpec:
    kind = ModelKind(model['kind'])
    t = float(model.get('t', -1.0))
    mu = float(model.get('mu', 0.0))
    if kind == ModelKind.SNS:
        missing = [k for k in ('n_left', 'n_middle', 'n_right') if k not in model]
        if missing:
            raise ConfigValidationError(f"SNS model needs {', '.join(missing)}", field=f"model/{missing[0]}")
        return ModelSpec.sns(model['n_left'], model['n_middle'], model['n_right'], t=t,
                             delta=float(model.get('delta', 1.0)), mu=mu)

    if 'hoppings' in model:
        hoppings = model['hoppings']
    elif 'n_sites' in model and seed is not None:
        hoppings = disordered_ring_hoppings(model['n_sites'], t=t, seed=seed)
    elif 'n_sites' in model:
        hoppings = [t] * model['n_sites']
    else:
        raise ConfigValidationError("ring model needs hoppings or n_sites", field="model/hoppings")
    return ModelSpec.ring(hoppings, mu=mu, t=t)


def _build_reservoirs(document: Dict[str, Any], model: ModelSpec) -> Tuple[ReservoirSpec, ...]:
    reservoirs = [
        ReservoirSpec(n_sites=r['n_sites'], t=float(r.get('t', -1.0)), g=float(r.get('g', 0.0)),
                      attach_site=r['attach_site'], kappa=float(r['kappa']))
        for r in document.get('reservoirs', [])
    ]
    if 'sns_reservoirs' in document:
        if not model.is_bdg:
            raise ConfigValidationError("sns_reservoirs needs an SNS model", field="sns_reservoirs")
        options = document['sns_reservoirs']
        reservoirs.extend(sns_reservoirs(model, n_sites=options.get('n_sites', 101), t=options.get('t', -1.0),
                                         g=options.get('g', 0.0), kappa=options.get('kappa', -0.4)))
    return tuple(reservoirs)


def parse_run_config(document: Any, source: Optional[str] = None, text: Optional[str] = None,
                     dim_cap: Optional[int] = None) -> RunConfig:
    """
    Validate a parsed document and build the RunConfig.

    Args:
        document: Parsed JSON/YAML mapping
        source: File name used in error messages
        text: Raw text, used to resolve line numbers of offending fields
        dim_cap: Exact-diagonalization cap checked against exact methods

    Returns:
        RunConfig

    Raises:
        ConfigValidationError: naming the field path (and line when known)
    """
    root = None
    if text is not None:
        try:
            root = yaml.compose(text)
        except yaml.YAMLError:
            root = None

    if not isinstance(document, dict):
        raise ConfigValidationError("run configuration must be a mapping", source=_where(source, 1 if text else None))

    errors = sorted(_VALIDATOR.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        error = errors[0]
        path = list(error.absolute_path)
        field_name = "/".join(str(p) for p in path) or None
        raise ConfigValidationError(error.message, field=field_name, source=_where(source, _node_line(root, path)))

    def fail(message: str, path: Sequence[Any]) -> ConfigValidationError:
        return ConfigValidationError(message, field="/".join(str(p) for p in path),
                                     source=_where(source, _node_line(root, path)))

    phi = document['phi_grid']
    if not phi['stop'] > phi['start']:
        raise fail("phi_grid stop must exceed start", ['phi_grid', 'stop'])
    omega = document.get('omega_grid')
    if omega is not None and not omega['stop'] > omega['start']:
        raise fail("omega_grid stop must exceed start", ['omega_grid', 'stop'])

    try:
        model = _build_model(document['model'], document.get('seed'))
    except ConfigValidationError as exc:
        raise fail(exc.reason, (exc.field or 'model').split('/')) from exc
    except ValidationError as exc:
        raise fail(str(exc), ['model']) from exc

    try:
        reservoirs = _build_reservoirs(document, model)
    except ConfigValidationError as exc:
        raise fail(exc.reason, (exc.field or 'reservoirs').split('/')) from exc
    listed = len(document.get('reservoirs', []))
    for index, reservoir in enumerate(reservoirs):
        try:
            reservoir.validate(model.n_sites)
        except ValidationError as exc:
            raise fail(str(exc), ['reservoirs', index] if index < listed else ['sns_reservoirs']) from exc
    try:
        validate_reservoirs(model, reservoirs)
    except ValidationError as exc:
        raise fail(str(exc), ['reservoirs']) from exc

    methods = tuple(Method(m) for m in document['methods'])
    beta = document.get('beta')
    if Method.EXACT_FREE_ENERGY in methods and beta is None:
        raise fail("exact_free_energy needs a finite beta", ['methods'])
    if any(m in methods for m in (Method.SUSCEPTIBILITY_NH, Method.SUSCEPTIBILITY_EXACT)) and omega is None:
        raise fail("susceptibility methods need an omega_grid", ['methods'])
    if (Method.SUSCEPTIBILITY_NH in methods or Method.SUSCEPTIBILITY_EXACT in methods) and beta is not None:
        raise fail("the susceptibility is only available at zero temperature", ['beta'])
    if 'kappa_scan' in document and not reservoirs:
        raise fail("kappa_scan needs at least one reservoir", ['kappa_scan'])
    oracle_sites = document.get('oracle_reservoir_sites')
    if oracle_sites is not None and not reservoirs:
        raise fail("oracle_reservoir_sites needs at least one reservoir", ['oracle_reservoir_sites'])

    bond = document.get('current_bond')
    if bond is not None and bond not in model.normal_bonds:
        raise fail(f"bond {bond} is not one of the normal bonds {list(model.normal_bonds)}", ['current_bond'])

    if dim_cap is not None and any(m in methods for m in EXACT_METHODS):
        oracle_reservoirs = reservoirs if oracle_sites is None else tuple(
            replace(r, n_sites=oracle_sites) for r in reservoirs)
        dim = total_dimension(model, oracle_reservoirs)
        if dim > dim_cap:
            raise fail(f"exact methods need total dimension <= {dim_cap}, got {dim}", ['methods'])

    return RunConfig(
        model=model,
        reservoirs=reservoirs,
        phi_grid=Grid(float(phi['start']), float(phi['stop']), int(phi['count'])),
        methods=methods,
        name=document.get('name', 'custom'),
        beta=None if beta is None else float(beta),
        omega_grid=None if omega is None else Grid(float(omega['start']), float(omega['stop']), int(omega['count'])),
        delta_phi=document.get('delta_phi'),
        eta=document.get('eta'),
        seed=document.get('seed'),
        current_bond=bond,
        kappa_scan=tuple(float(k) for k in document.get('kappa_scan', ())),
        oracle_reservoir_sites=oracle_sites,
        output_dir=document.get('output_dir'),
        document=document,
    )


def load_run_config(path: str, dim_cap: Optional[int] = None) -> RunConfig:
    """Read a JSON or YAML run configuration from disk."""
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigValidationError("file not found", source=str(config_path))
    text = config_path.read_text()
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigValidationError(f"cannot parse: {getattr(exc, 'problem', exc)}",
                                    source=_where(str(config_path), line)) from exc
    return parse_run_config(document, source=str(config_path), text=text, dim_cap=dim_cap)
