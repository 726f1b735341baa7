"""
Configuration management for workflow optimisation runs.
"""

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from django.conf import settings

from .constants import (
    DEFAULT_ARCH_SIZE,
    DEFAULT_BUDGET,
    DEFAULT_CX_PROB,
    DEFAULT_DIV_WEIGHT,
    DEFAULT_GRAMMAR_PATH,
    DEFAULT_HOLDOUT_FRACTION,
    DEFAULT_K_FOLDS,
    DEFAULT_MAX_DER,
    DEFAULT_MAX_GEN,
    DEFAULT_POP_SIZE,
    DEFAULT_SEED,
    DEFAULT_ST_MUT_PROB,
    DEFAULT_THREADS,
    EVAL_BUDGET_FRACTION,
    Metric,
    RunMode,
)
from .exceptions import ConfigurationError
from .utils.validators import (
    validate_fraction,
    validate_mode,
    validate_non_negative_int,
    validate_positive_int,
    validate_probability,
    validate_seconds,
)


class AutoflowSettings:
    """
    Run defaults loaded from Django settings.
    Every value falls back to the built-in default when the setting is absent.
    """

    def __init__(self):
        self._validate_settings()

    @property
    def max_gen(self):
        return getattr(settings, 'AUTOFLOW_MAX_GEN', DEFAULT_MAX_GEN)

    @property
    def pop_size(self):
        return getattr(settings, 'AUTOFLOW_POP_SIZE', DEFAULT_POP_SIZE)

    @property
    def cx_prob(self):
        return getattr(settings, 'AUTOFLOW_CX_PROB', DEFAULT_CX_PROB)

    @property
    def st_mut_prob(self):
        return getattr(settings, 'AUTOFLOW_ST_MUT_PROB', DEFAULT_ST_MUT_PROB)

    @property
    def max_der(self):
        return getattr(settings, 'AUTOFLOW_MAX_DER', DEFAULT_MAX_DER)

    @property
    def arch_size(self):
        return getattr(settings, 'AUTOFLOW_ARCH_SIZE', DEFAULT_ARCH_SIZE)

    @property
    def div_weight(self):
        return getattr(settings, 'AUTOFLOW_DIV_WEIGHT', DEFAULT_DIV_WEIGHT)

    @property
    def budget(self):
        """Total wall-clock budget in seconds."""
        return getattr(settings, 'AUTOFLOW_BUDGET', DEFAULT_BUDGET)

    @property
    def eval_budget(self):
        """Per-individual budget in seconds; None means budget / 10."""
        return getattr(settings, 'AUTOFLOW_EVAL_BUDGET', None)

    @property
    def k_folds(self):
        return getattr(settings, 'AUTOFLOW_K_FOLDS', DEFAULT_K_FOLDS)

    @property
    def seed(self):
        return getattr(settings, 'AUTOFLOW_SEED', DEFAULT_SEED)

    @property
    def mode(self):
        return getattr(settings, 'AUTOFLOW_MODE', RunMode.FULL.value)

    @property
    def threads(self):
        return getattr(settings, 'AUTOFLOW_THREADS', DEFAULT_THREADS)

    @property
    def holdout_fraction(self):
        return getattr(settings, 'AUTOFLOW_HOLDOUT_FRACTION', DEFAULT_HOLDOUT_FRACTION)

    @property
    def grammar_path(self):
        return Path(getattr(settings, 'AUTOFLOW_GRAMMAR_PATH', DEFAULT_GRAMMAR_PATH))

    @property
    def record_timings(self):
        return bool(getattr(settings, 'AUTOFLOW_RECORD_TIMINGS', True))

    def _validate_settings(self):
        """
        Validate the configured defaults.
        Raises ConfigurationError listing every invalid setting.
        """
        problems = []
        validate_fraction('AUTOFLOW_HOLDOUT_FRACTION', self.holdout_fraction, problems)
        validate_mode(self.mode, problems)
        if problems:
            raise ConfigurationError("; ".join(problems), error_code='INVALID_SETTINGS', details={'problems': problems})


# Singleton instance
config = AutoflowSettings()


# Config-file keys (names as used in the run configuration) -> EngineConfig fields
CONFIG_KEYS = {
    'maxGen': 'max_gen',
    'popSize': 'pop_size',
    'cxProb': 'cx_prob',
    'stMutProb': 'st_mut_prob',
    'maxDer': 'max_der',
    'archSize': 'arch_size',
    'divWeight': 'div_weight',
    'budget': 'budget',
    'evalBudget': 'eval_budget',
    'kFolds': 'k_folds',
    'seed': 'seed',
    'mode': 'mode',
    'threads': 'threads',
    'recordTimings': 'record_timings',
    'metric': 'metric',
}


@dataclass(frozen=True)
class EngineConfig:
    """Search parameters of one optimisation run."""
    max_gen: int = DEFAULT_MAX_GEN
    pop_size: int = DEFAULT_POP_SIZE
    cx_prob: float = DEFAULT_CX_PROB
    st_mut_prob: float = DEFAULT_ST_MUT_PROB
    max_der: int = DEFAULT_MAX_DER
    arch_size: int = DEFAULT_ARCH_SIZE
    div_weight: float = DEFAULT_DIV_WEIGHT
    budget: float = DEFAULT_BUDGET
    eval_budget: Optional[float] = None
    k_folds: int = DEFAULT_K_FOLDS
    seed: int = DEFAULT_SEED
    mode: str = RunMode.FULL.value
    threads: int = DEFAULT_THREADS
    record_timings: bool = True
    metric: str = Metric.BALANCED_ACCURACY.value

    @property
    def effective_eval_budget(self) -> float:
        if self.eval_budget is None:
            return self.budget * EVAL_BUDGET_FRACTION
        return self.eval_budget

    @property
    def run_mode(self) -> RunMode:
        return RunMode(self.mode)

    @classmethod
    def from_settings(cls) -> 'EngineConfig':
        return cls(
            max_gen=config.max_gen,
            pop_size=config.pop_size,
            cx_prob=config.cx_prob,
            st_mut_prob=config.st_mut_prob,
            max_der=config.max_der,
            arch_size=config.arch_size,
            div_weight=config.div_weight,
            budget=config.budget,
            eval_budget=config.eval_budget,
            k_folds=config.k_folds,
            seed=config.seed,
            mode=config.mode,
            threads=config.threads,
            record_timings=config.record_timings,
        )

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any], base: Optional['EngineConfig'] = None) -> 'EngineConfig':
        """
        Build a config from run-config keys (``maxGen``, ``popSize``, ...).

        Field names (``max_gen``) are accepted too. Keys missing from the
        mapping keep their value in ``base``.

        Raises:
            ConfigurationError: On unknown keys
        """
        field_names = {f.name for f in fields(cls)}
        changes = {}
        unknown = []
        for key, value in mapping.items():
            name = CONFIG_KEYS.get(key, key)
            if name in field_names:
                changes[name] = value
            else:
                unknown.append(key)
        if unknown:
            raise ConfigurationError(
                f"Unknown configuration keys: {', '.join(sorted(unknown))}",
                error_code='UNKNOWN_KEYS',
                details={'keys': sorted(unknown)},
            )
        return replace(base or cls(), **changes)

    def with_overrides(self, **overrides) -> 'EngineConfig':
        """Copy with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def validate(self) -> 'EngineConfig':
        """
        Check every parameter.

        Raises:
            ConfigurationError: Listing all problems found
        """
        problems = []
        validate_non_negative_int('maxGen', self.max_gen, problems)
        validate_positive_int('popSize', self.pop_size, problems, minimum=2)
        if isinstance(self.pop_size, int) and self.pop_size % 2:
            problems.append(f"popSize must be even. Got: {self.pop_size}")
        validate_probability('cxProb', self.cx_prob, problems)
        validate_probability('stMutProb', self.st_mut_prob, problems)
        validate_positive_int('maxDer', self.max_der, problems)
        validate_positive_int('archSize', self.arch_size, problems)
        validate_probability('divWeight', self.div_weight, problems)
        validate_seconds('budget', self.budget, problems)
        validate_seconds('evalBudget', self.eval_budget, problems, allow_none=True)
        if (
            isinstance(self.eval_budget, (int, float)) and isinstance(self.budget, (int, float))
            and self.eval_budget > self.budget
        ):
            problems.append(f"evalBudget ({self.eval_budget}) must not exceed budget ({self.budget})")
        validate_positive_int('kFolds', self.k_folds, problems, minimum=2)
        validate_non_negative_int('seed', self.seed, problems)
        validate_mode(self.mode, problems)
        validate_positive_int('threads', self.threads, problems)
        if self.metric not in {m.value for m in Metric}:
            problems.append(f"Unknown metric: {self.metric}")
        if problems:
            raise ConfigurationError(
                "Invalid engine configuration: " + "; ".join(problems),
                error_code='INVALID_CONFIG',
                details={'problems': problems},
            )
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Effective configuration under the run-config key names."""
        values = asdict(self)
        data = {key: values[name] for key, name in CONFIG_KEYS.items()}
        data['evalBudget'] = self.effective_eval_budget
        return data


@dataclass(frozen=True)
class RunConfigFile:
    """
    A JSON run configuration: engine keys plus data and output locations.

    Path keys: ``grammar`` (optional, defaults to AUTOFLOW_GRAMMAR_PATH),
    ``train``, ``test`` (optional), ``output``; plus ``label`` and
    ``holdoutFraction`` (used when no test set is given).
    """
    train: Path
    output: Path
    grammar: Path
    label: str = 'label'
    test: Optional[Path] = None
    holdout_fraction: float = DEFAULT_HOLDOUT_FRACTION
    engine: Optional[Dict[str, Any]] = None
    source: Optional[Path] = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: Path = Path('.'), source: Optional[Path] = None):
        data = dict(data)

        def resolve(key):
            value = data.pop(key, None)
            if value is None:
                return None
            path = Path(value)
            return path if path.is_absolute() else (base_dir / path)

        grammar = resolve('grammar') or config.grammar_path
        train = resolve('train')
        test = resolve('test')
        output = resolve('output') or base_dir / 'autoflow-output'
        label = data.pop('label', 'label')
        holdout = data.pop('holdoutFraction', config.holdout_fraction)

        problems = []
        if train is None:
            problems.append("'train' is required")
        for name, path in (('grammar', grammar), ('train', train), ('test', test)):
            if path is not None and not Path(path).is_file():
                problems.append(f"{name} file not found: {path}")
        validate_fraction('holdoutFraction', holdout, problems)
        if problems:
            raise ConfigurationError(
                "Invalid run configuration: " + "; ".join(problems),
                error_code='INVALID_RUN_CONFIG',
                details={'problems': problems},
            )
        # Remaining keys must be engine parameters; checked here so typos fail early.
        EngineConfig.from_mapping(data)
        return cls(
            train=train, output=output, grammar=Path(grammar), label=label, test=test,
            holdout_fraction=holdout, engine=data, source=source,
        )

    @classmethod
    def load(cls, path) -> 'RunConfigFile':
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except FileNotFoundError:
            raise ConfigurationError(f"Config file {path} not found", error_code='CONFIG_NOT_FOUND')
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {e}", error_code='CONFIG_FORMAT')
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object", error_code='CONFIG_FORMAT')
        return cls.from_dict(data, base_dir=path.resolve().parent, source=path)


def resolve_engine_config(
    run_file: Optional[RunConfigFile] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> EngineConfig:
    """
    Effective engine configuration.

    Precedence: explicit overrides (CLI flags) > run config file > Django
    settings > built-in defaults.
    """
    engine = EngineConfig.from_settings()
    if run_file is not None and run_file.engine:
        engine = EngineConfig.from_mapping(run_file.engine, base=engine)
    if overrides:
        engine = engine.with_overrides(**overrides)
    return engine.validate()
