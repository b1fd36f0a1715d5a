"""
Run configuration: plain `key = value` text, `#` comments, plus `--set`
overrides. Every key is declared once in a typed field table that owns its
parsing and range check.
"""
from dataclasses import dataclass, field, replace
from enum import Enum, unique
import math
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Type
from viskv.core import (
    Coefficients, MUSCLE_SAMPLE, MusclePhysical, ParseError, StabilityInput, derive_coefficients,
    poincare_constant_interval
)
from viskv.solvers import FluxNormalization, ForcingRow, ImpulseHandling


@unique
class Scenario(Enum):
    FLUX = 'flux'
    MODES = 'modes'
    SIMULATE = 'simulate'
    ORACLE = 'oracle'
    ENERGY = 'energy'
    STABILITY_CHECK = 'stability-check'
    STABILITY_REGION = 'stability-region'
    SINGULAR_LIMIT = 'singular-limit'


@unique
class Preset(Enum):
    MUSCLE = 'moravec2007'
    UNIT = 'unit'


# Physical constants of each preset; tau defaults to eta / E and c1 = E / rho etc. follow
PRESETS: Dict[Preset, Dict[str, float]] = {
    Preset.MUSCLE: {
        'L': MUSCLE_SAMPLE.L,
        'rho': MUSCLE_SAMPLE.rho,
        'E': MUSCLE_SAMPLE.E,
        'eta': MUSCLE_SAMPLE.eta,
        'epsilon': MUSCLE_SAMPLE.epsilon,
        'f': MUSCLE_SAMPLE.f,
    },
    Preset.UNIT: {
        'L': 1.0,
        'rho': 1.0,
        'E': 1.0,
        'eta': 1.0,
        'epsilon': 0.1,
        'f': 1.0,
        'cp': 1.0,
    },
}

DEFAULT_PRESETS = {
    Scenario.FLUX: Preset.MUSCLE,
    Scenario.MODES: Preset.MUSCLE,
    Scenario.SIMULATE: Preset.MUSCLE,
    Scenario.ORACLE: Preset.MUSCLE,
    Scenario.ENERGY: Preset.UNIT,
    Scenario.STABILITY_CHECK: Preset.UNIT,
    Scenario.STABILITY_REGION: Preset.UNIT,
    Scenario.SINGULAR_LIMIT: Preset.UNIT,
}


class ConfigField:
    def __init__(self, name: str):
        self.name = name

    def parse(self, text: str) -> Any:
        raise NotImplementedError

    def in_range(self, val: Any) -> bool:
        return True

    def format(self, val: Any) -> str:
        return str(val)


def _format_float(val: float) -> str:
    return repr(float(val))


class FloatField(ConfigField):
    def __init__(self, name: str, check: Optional[Callable[[float], bool]] = None):
        self.check = check
        super().__init__(name)

    def parse(self, text: str) -> float:
        val = float(text)
        if not math.isfinite(val):
            raise ValueError(f'{text} is not finite')
        return val

    def in_range(self, val: float) -> bool:
        return self.check is None or self.check(val)

    def format(self, val: float) -> str:
        return _format_float(val)


class IntField(ConfigField):
    def __init__(self, name: str, minimum: Optional[int] = None):
        self.minimum = minimum
        super().__init__(name)

    def parse(self, text: str) -> int:
        return int(text)

    def in_range(self, val: int) -> bool:
        return self.minimum is None or val >= self.minimum


class FloatListField(FloatField):
    def parse(self, text: str) -> Tuple[float, ...]:
        return tuple(super(FloatListField, self).parse(v) for v in _split(text))

    def in_range(self, val: Tuple[float, ...]) -> bool:
        return all(super(FloatListField, self).in_range(v) for v in val)

    def format(self, val: Tuple[float, ...]) -> str:
        return ', '.join(_format_float(v) for v in val)


class IntListField(IntField):
    def parse(self, text: str) -> Tuple[int, ...]:
        values = tuple(int(v) for v in _split(text))
        if len(values) == 0:
            raise ValueError('empty list')
        return values

    def in_range(self, val: Tuple[int, ...]) -> bool:
        return all(super(IntListField, self).in_range(v) for v in val)

    def format(self, val: Tuple[int, ...]) -> str:
        return ', '.join(str(v) for v in val)


class BoolField(ConfigField):
    TRUE = ('true', 'yes', 'on', '1')
    FALSE = ('false', 'no', 'off', '0')

    def parse(self, text: str) -> bool:
        lowered = text.lower()
        if lowered in self.TRUE:
            return True
        if lowered in self.FALSE:
            return False
        raise ValueError(f'{text} is not a boolean')

    def format(self, val: bool) -> str:
        return 'true' if val else 'false'


class EnumField(ConfigField):
    def __init__(self, name: str, enum: Type[Enum]):
        self.enum = enum
        super().__init__(name)

    def parse(self, text: str) -> Enum:
        return self.enum(text)

    def format(self, val: Enum) -> str:
        return val.value


def _split(text: str) -> List[str]:
    return [v.strip() for v in text.split(',') if v.strip()]


def _positive(v: float) -> bool:
    return v > 0


def _non_negative(v: float) -> bool:
    return v >= 0


class ConfigStruct:
    fields: Dict[str, ConfigField]

    def __init__(self):
        self.fields = {}

    def add_float_field(self, name: str, check: Optional[Callable[[float], bool]] = None):
        self.fields[name] = FloatField(name, check)

    def add_int_field(self, name: str, minimum: Optional[int] = None):
        self.fields[name] = IntField(name, minimum)

    def add_float_list_field(self, name: str, check: Optional[Callable[[float], bool]] = None):
        self.fields[name] = FloatListField(name, check)

    def add_int_list_field(self, name: str, minimum: Optional[int] = None):
        self.fields[name] = IntListField(name, minimum)

    def add_bool_field(self, name: str):
        self.fields[name] = BoolField(name)

    def add_enum_field(self, name: str, enum: Type[Enum]):
        self.fields[name] = EnumField(name, enum)

    def parse_value(self, key: str, text: str, where: str) -> Any:
        if key not in self.fields:
            raise ParseError(f'{where}: unknown key "{key}"')
        f = self.fields[key]
        try:
            val = f.parse(text)
        except ValueError:
            raise ParseError(f'{where}: cannot parse "{text}" as a value for {key}')
        if not f.in_range(val):
            raise ParseError(f'{where}: value {text} is out of range for {key}')
        return val

    def parse(self, lines: Iterable[Tuple[str, str]],
              assignments: Optional[List[Tuple[str, str]]] = None) -> Dict[str, Any]:
        """(where, line) pairs to parsed values; later assignments win. Raw (key, text) pairs go to assignments"""
        parsed = {}
        for where, line in lines:
            content = line.split('#', 1)[0].strip()
            if not content:
                continue
            if '=' not in content:
                raise ParseError(f'{where}: expected "key = value", got "{content}"')
            key, text = (s.strip() for s in content.split('=', 1))
            parsed[key] = self.parse_value(key, text, where)
            if assignments is not None:
                assignments.append((key, text))
        return parsed


CONFIG_STRUCT = ConfigStruct()
CONFIG_STRUCT.add_enum_field('scenario', Scenario)
CONFIG_STRUCT.add_enum_field('preset', Preset)
for _name in ('L', 'rho', 'E', 'eta', 'tau', 'cp'):
    CONFIG_STRUCT.add_float_field(_name, _positive)
CONFIG_STRUCT.add_float_field('epsilon', _non_negative)
CONFIG_STRUCT.add_float_field('f')
for _name in ('c1', 'c2', 'd1', 'd2'):
    CONFIG_STRUCT.add_float_field(_name)
CONFIG_STRUCT.add_int_field('n_per_delay', 10)
CONFIG_STRUCT.add_int_field('horizon_delays', 1)
CONFIG_STRUCT.add_int_field('modes', 1)
CONFIG_STRUCT.add_int_field('nx', 8)
CONFIG_STRUCT.add_int_field('workers', 1)
CONFIG_STRUCT.add_float_list_field('epsilons', _non_negative)
CONFIG_STRUCT.add_int_list_field('mode_indices', 0)
CONFIG_STRUCT.add_int_field('t_stride', 1)
CONFIG_STRUCT.add_int_field('x_points', 2)
CONFIG_STRUCT.add_enum_field('forcing_row', ForcingRow)
CONFIG_STRUCT.add_enum_field('impulse', ImpulseHandling)
CONFIG_STRUCT.add_enum_field('normalization', FluxNormalization)
CONFIG_STRUCT.add_int_field('seed', 0)
CONFIG_STRUCT.add_int_field('ic_modes', 1)
CONFIG_STRUCT.add_bool_field('fit')
CONFIG_STRUCT.add_float_field('fit_start_delays', _non_negative)
for _name in ('c2_min', 'c2_max', 'd1_min', 'd1_max', 'd2_min', 'd2_max'):
    CONFIG_STRUCT.add_float_field(_name, _positive)
CONFIG_STRUCT.add_int_field('resolution', 2)
CONFIG_STRUCT.add_float_field('tau0', _positive)
CONFIG_STRUCT.add_int_field('levels', 2)
CONFIG_STRUCT.add_float_field('horizon', _positive)
CONFIG_STRUCT.add_float_field('length', _positive)
CONFIG_STRUCT.add_bool_field('pin')


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    preset: Preset
    L: float
    rho: float
    E: float
    eta: float
    epsilon: float
    f: float
    tau: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    d1: Optional[float] = None
    d2: Optional[float] = None
    cp: Optional[float] = None
    n_per_delay: int = 1000
    horizon_delays: int = 10
    modes: int = 21
    nx: int = 200
    workers: int = 1
    epsilons: Tuple[float, ...] = ()
    mode_indices: Tuple[int, ...] = (0, 1, 2)
    t_stride: int = 100
    x_points: int = 50
    forcing_row: ForcingRow = ForcingRow.VELOCITY
    impulse: ImpulseHandling = ImpulseHandling.DISCRETE
    normalization: FluxNormalization = FluxNormalization.TRACTION
    seed: int = 0
    ic_modes: int = 4
    fit: bool = False
    fit_start_delays: float = 2.0
    c2_min: float = 0.005
    c2_max: float = 0.1
    d1_min: float = 0.05
    d1_max: float = 1.0
    d2_min: float = 0.005
    d2_max: float = 0.1
    resolution: int = 40
    tau0: float = 0.1
    levels: int = 4
    horizon: float = 1.0
    length: float = 1.0
    pin: bool = True
    file_assignments: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)
    overrides: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)

    def physical(self) -> MusclePhysical:
        return MusclePhysical(L=self.L, rho=self.rho, E=self.E, eta=self.eta, epsilon=self.epsilon, f=self.f,
                              tau=self.tau)

    def physical_at(self, epsilon: float) -> MusclePhysical:
        return replace(self.physical(), epsilon=epsilon)

    def coefficients(self) -> Coefficients:
        """Derived from the physical constants unless given explicitly"""
        derived = derive_coefficients(self.physical())
        return Coefficients(
            c1=derived.c1 if self.c1 is None else self.c1,
            c2=derived.c2 if self.c2 is None else self.c2,
            d1=derived.d1 if self.d1 is None else self.d1,
            d2=derived.d2 if self.d2 is None else self.d2,
            tau=derived.tau,
        )

    def coefficients_at(self, epsilon: float) -> Coefficients:
        """Coefficients of one run of an epsilon sweep"""
        if not self.epsilons:
            return self.coefficients()
        return derive_coefficients(self.physical_at(epsilon))

    def poincare_constant(self) -> float:
        return poincare_constant_interval(self.L) if self.cp is None else self.cp

    def stability_input(self) -> StabilityInput:
        return StabilityInput(self.coefficients(), self.poincare_constant())

    def epsilon_list(self) -> Tuple[float, ...]:
        return self.epsilons if self.epsilons else (self.epsilon,)

    def effective_items(self) -> List[Tuple[str, str]]:
        """Every parameter in table order, derived values filled in"""
        coeffs = self.coefficients()
        resolved = {
            'c1': coeffs.c1,
            'c2': coeffs.c2,
            'd1': coeffs.d1,
            'd2': coeffs.d2,
            'tau': coeffs.tau,
            'cp': self.poincare_constant(),
            'epsilons': self.epsilon_list(),
        }
        items = []
        for name, f in CONFIG_STRUCT.fields.items():
            val = resolved[name] if name in resolved else getattr(self, name)
            items.append((name, f.format(val)))
        return items


def parse_config(text: str, scenario: Optional[Scenario] = None,
                 overrides: Sequence[str] = ()) -> RunConfig:
    """
    Builds a RunConfig from file text and `key=value` overrides. The preset
    fills every physical constant that is not assigned explicitly.
    """
    file_lines = [(f'line {i}', line) for i, line in enumerate(text.splitlines(), start=1)]
    file_pairs = []
    values = CONFIG_STRUCT.parse(file_lines, file_pairs)

    override_pairs = []
    for item in overrides:
        if '=' not in item:
            raise ParseError(f'<set>: expected key=value, got "{item}"')
        key, raw = (s.strip() for s in item.split('=', 1))
        values[key] = CONFIG_STRUCT.parse_value(key, raw, '<set>')
        override_pairs.append((key, raw))

    if scenario is not None:
        values['scenario'] = scenario
    if 'scenario' not in values:
        raise ParseError('no scenario given')

    preset = values.get('preset', DEFAULT_PRESETS[values['scenario']])
    merged = dict(PRESETS[preset])
    merged.update(values)
    merged['preset'] = preset
    return RunConfig(file_assignments=tuple(file_pairs), overrides=tuple(override_pairs), **merged)
