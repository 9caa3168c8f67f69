## TITLE: liftbench experiment configuration
## CC: okzyrox
## LICENSE: MIT

import json
import logging
from typing import Any, Dict, Optional, Sequence, Type

from .ensembles import NOISE_MODES
from .sdp import WITNESS_MODES

logger = logging.getLogger(__name__)


class ConfigField:
    def __init__(self, field_type: Type, **kwargs):
        self.field_type = field_type
        self.attributes = kwargs
        self.null = kwargs.get("null", True)
        self.default = kwargs.get("default", None)
        self.help = kwargs.get("help", "")
        self.name = None

    def to_dict(self):
        return {
            "field_type": self.field_type.__name__,
            "attributes": {k: v for k, v in self.attributes.items() if k != "help"},
        }

    def validate(self, value):
        if value is None and not self.null:
            raise ValueError(f"Field {self.name} cannot be null")
        if value is not None and not isinstance(value, self.field_type):
            try:
                value = self.field_type(value)
            except (TypeError, ValueError):
                raise TypeError(f"Field {self.name}: expected {self.field_type.__name__}, got {type(value).__name__}")
        return value


class StringField(ConfigField):
    def __init__(self, **kwargs):
        super().__init__(str, **kwargs)


class IntegerField(ConfigField):
    def __init__(self, **kwargs):
        super().__init__(int, **kwargs)
        self.min_value = kwargs.get("min_value", 0)
        self.max_value = kwargs.get("max_value", None)

    def validate(self, value):
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise TypeError(f"Field {self.name}: expected int, got {type(value).__name__}")
        value = super().validate(value)
        if value is not None:
            if self.min_value is not None and value < self.min_value:
                raise ValueError(f"Field {self.name}: value {value} is less than minimum {self.min_value}")
            if self.max_value is not None and value > self.max_value:
                raise ValueError(f"Field {self.name}: value {value} is greater than maximum {self.max_value}")
        return value


class FloatField(ConfigField):
    def __init__(self, **kwargs):
        super().__init__(float, **kwargs)
        self.min_value = kwargs.get("min_value", None)
        self.max_value = kwargs.get("max_value", None)
        ## open interval ends
        self.exclusive = kwargs.get("exclusive", False)

    def validate(self, value):
        value = super().validate(value)
        if value is not None:
            low_bad = self.min_value is not None and (value <= self.min_value if self.exclusive else value < self.min_value)
            high_bad = self.max_value is not None and (value >= self.max_value if self.exclusive else value > self.max_value)
            if low_bad:
                raise ValueError(f"Field {self.name}: value {value} is out of range, minimum {self.min_value}")
            if high_bad:
                raise ValueError(f"Field {self.name}: value {value} is out of range, maximum {self.max_value}")
        return value


class BooleanField(ConfigField):
    def __init__(self, **kwargs):
        super().__init__(bool, **kwargs)

    def validate(self, value):
        if isinstance(value, str):
            match value.lower():
                case "true" | "yes" | "1": return True
                case "false" | "no" | "0": return False
                case _: raise ValueError(f"Field {self.name}: cannot read {value!r} as a boolean")
        return super().validate(value)


class ChoiceField(ConfigField):
    def __init__(self, choices: Sequence[str], **kwargs):
        super().__init__(str, choices=list(choices), **kwargs)
        self.choices = tuple(choices)

    def validate(self, value):
        value = super().validate(value)
        if value is not None and value not in self.choices:
            raise ValueError(f"Field {self.name}: {value!r} is not one of {', '.join(self.choices)}")
        return value


class FloatListField(ConfigField):
    def __init__(self, **kwargs):
        super().__init__(list, **kwargs)

    def validate(self, value):
        if isinstance(value, str):
            value = [x for x in value.split(",") if x.strip()]
        value = super().validate(value)
        if value is not None:
            try:
                value = [float(x) for x in value]
            except (TypeError, ValueError):
                raise TypeError(f"Field {self.name}: expected a list of numbers")
        return value


class ConfigMeta(type):
    def __new__(cls, name, bases, attrs):
        fields = {}
        for base in bases:
            fields.update(getattr(base, "_fields", {}))
        for key, value in list(attrs.items()):
            if isinstance(value, ConfigField):
                value.name = key
                fields[key] = value
                attrs[key] = None
        attrs["_fields"] = fields
        return super().__new__(cls, name, bases, attrs)


class Config(metaclass=ConfigMeta):
    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(self._fields)
        if unknown:
            raise ValueError(f"Unknown config fields: {', '.join(sorted(unknown))}")
        for key, field in self._fields.items():
            value = kwargs.get(key, field.default)
            setattr(self, key, value)

    def __setattr__(self, key, value):
        if key in self._fields:
            value = self._fields[key].validate(value)
        super().__setattr__(key, value)

    def validate(self) -> "Config":
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in self._fields}

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        return cls(**data)

    @classmethod
    def from_json(cls, json_str: str) -> "Config":
        return cls.from_dict(json.loads(json_str))

    @classmethod
    def load(cls, filename: str) -> "Config":
        with open(filename, "r") as f:
            return cls.from_dict(json.load(f))

    @classmethod
    def schema(cls) -> Dict[str, Any]:
        return {key: field.to_dict() for key, field in cls._fields.items()}

    def __str__(self):
        return str(self.__class__.__name__) + "(" + ", ".join(f"{key} = {value}" for key, value in self.to_dict().items()) + ")"

    def __repr__(self):
        return str(self)


EXPERIMENTS = ("detect", "sdp_sweep", "noise_robustness", "figures", "table1")


class ExperimentConfig(Config):
    experiment = ChoiceField(EXPERIMENTS, null=False, default="figures")
    base = StringField(default="fig1_d3")
    null_base = StringField(default=None)
    row = StringField(default=None)
    n = IntegerField(min_value=2, default=None)
    m = IntegerField(min_value=1, default=None)
    d = IntegerField(min_value=1, default=3)
    t = IntegerField(min_value=2, default=2)
    epsilon = FloatField(min_value=0.0, max_value=1.0, default=0.0)
    epsilons = FloatListField(default=None)
    delta = FloatField(min_value=0.0, exclusive=True, default=0.1)
    deltas = FloatListField(default=None)
    level = IntegerField(min_value=0, default=3)
    margin = FloatField(default=0.05)
    trials = IntegerField(min_value=1, default=10)
    seed = IntegerField(min_value=0, default=0)
    threads = IntegerField(min_value=1, default=1)
    mode = ChoiceField(NOISE_MODES, default="rand")
    witness = ChoiceField(WITNESS_MODES, default="auto")
    bipartite = BooleanField(default=False)
    out = StringField(default="results")
    format = ChoiceField(("json", "csv"), default="json")

    def validate(self) -> "ExperimentConfig":
        ## cross-field checks, single fields were checked on assignment
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"Field epsilon: value {self.epsilon} must lie in [0, 1)")
        for eps in self.epsilons or []:
            if not 0.0 <= eps < 1.0:
                raise ValueError(f"Field epsilons: value {eps} must lie in [0, 1)")
        for delta in self.deltas or []:
            if delta <= 0:
                raise ValueError(f"Field deltas: value {delta} must be positive")
        if self.experiment == "table1" and not self.row:
            raise ValueError("Field row: table1 experiments need a row name")
        if self.experiment in ("detect", "noise_robustness") and self.n is None and self.m is None:
            raise ValueError(f"Fields n/m: {self.experiment} needs a graph size")
        if self.n is not None and (self.n * self.d) % 2:
            raise ValueError(f"Fields n/d: n * d = {self.n * self.d} must be even")
        if self.bipartite and self.n is not None and self.n % 2:
            raise ValueError(f"Field n: bipartite samples need even n, got {self.n}")
        logger.debug("validated %s", self)
        return self
