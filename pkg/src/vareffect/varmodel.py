"""Feature model: names, kinds, value ranges, legacy status and known constants."""

from __future__ import annotations

import csv
import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .logic import FALSE, TRUE, Formula, simplify, substitute_many
from .ppparse.expr import format_number, parse_number

Number = Union[int, float]


class Kind(enum.Enum):
    BOOL = "bool"
    ENUM = "enum"
    INT = "int"
    FLOAT = "float"
    CONSTANT = "constant"


class Legacy(enum.Enum):
    NONE = "none"
    FIXED = "fixed"
    RETIRED = "retired"


class FeatureModelError(ValueError):
    def __init__(self, message: str, path: str = "", line: int = 0):
        where = f"{path}:{line}: " if path else ""
        super().__init__(where + message)
        self.path = path
        self.line = line


class DuplicateFeature(FeatureModelError):
    pass


class MalformedRange(FeatureModelError):
    pass


@dataclass(frozen=True)
class FeatureDef:
    name: str
    kind: Kind
    values: tuple[Number, ...] = ()
    legacy: Legacy = Legacy.NONE
    legacy_value: Optional[Number] = None

    @property
    def bounded(self) -> bool:
        return bool(self.values) and self.kind is not Kind.CONSTANT

    def value_var(self, value: Number) -> str:
        return value_var(self.name, value)

    def defined_var(self) -> str:
        return defined_var(self.name)


@dataclass
class FeatureModel:
    features: dict[str, FeatureDef] = field(default_factory=dict)
    constants: dict[str, Number] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clash = sorted(set(self.features) & set(self.constants))
        if clash:
            raise FeatureModelError(f"names declared both as feature and constant: {', '.join(clash)}")

    def get(self, name: str) -> Optional[FeatureDef]:
        return self.features.get(name)

    def bounded(self) -> list[FeatureDef]:
        return [f for _, f in sorted(self.features.items()) if f.bounded]

    def legacy_features(self) -> list[FeatureDef]:
        return [f for _, f in sorted(self.features.items()) if f.legacy is not Legacy.NONE]

    def add_constants(self, constants: Mapping[str, Number]) -> None:
        clash = sorted(set(self.features) & set(constants))
        if clash:
            raise FeatureModelError(f"constants clash with features: {', '.join(clash)}")
        self.constants.update(constants)


def value_var(feature: str, value: Number) -> str:
    return f"{feature}={format_number(value)}"


def defined_var(feature: str) -> str:
    return f"defined({feature})"


_PSEUDO = re.compile(r"^(?:defined\((?P<d>[A-Za-z_]\w*)\)|(?P<f>[A-Za-z_]\w*)=(?P<v>.+))$")


def parse_pseudo(name: str) -> Optional[tuple[str, Optional[str]]]:
    """``F=v`` -> (F, "v"); ``defined(F)`` -> (F, None); anything else -> None."""
    m = _PSEUDO.match(name)
    if m is None:
        return None
    if m.group("d"):
        return m.group("d"), None
    return m.group("f"), m.group("v")


def feature_of(pseudo: str) -> Optional[str]:
    parsed = parse_pseudo(pseudo)
    return parsed[0] if parsed else None


def _parse_values(raw: str, path: str, line: int) -> tuple[Number, ...]:
    out: list[Number] = []
    for tok in raw.split("|"):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(parse_number(tok) if not tok.startswith("-") else -parse_number(tok[1:]))
        except ValueError:
            raise MalformedRange(f"bad value {tok!r}", path, line) from None
    if len(set(out)) != len(out):
        raise MalformedRange(f"duplicate values in range {raw!r}", path, line)
    return tuple(out)


def _parse_scalar(raw: str, path: str, line: int) -> Number:
    values = _parse_values(raw, path, line)
    if len(values) != 1:
        raise MalformedRange(f"expected a single value, got {raw!r}", path, line)
    return values[0]


def load_feature_model(path: Union[str, Path], constants: Optional[Union[str, Path]] = None) -> FeatureModel:
    """Read ``features.csv`` (``name,kind,values,legacy,legacy_value``)."""
    path = str(path)
    features: dict[str, FeatureDef] = {}
    model_constants: dict[str, Number] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"name", "kind", "values", "legacy", "legacy_value"} - set(reader.fieldnames or ())
        if missing:
            raise FeatureModelError(f"missing columns: {', '.join(sorted(missing))}", path, 1)
        for row in reader:
            line = reader.line_num
            name = (row["name"] or "").strip()
            if not name:
                continue
            if name in features or name in model_constants:
                raise DuplicateFeature(f"duplicate feature {name!r}", path, line)
            try:
                kind = Kind((row["kind"] or "").strip().lower())
            except ValueError:
                raise FeatureModelError(f"unknown kind {row['kind']!r}", path, line) from None
            raw_values = (row["values"] or "").strip()
            if kind is Kind.CONSTANT:
                model_constants[name] = _parse_scalar(raw_values, path, line)
                continue
            if kind is Kind.BOOL:
                values: tuple[Number, ...] = _parse_values(raw_values, path, line) if raw_values else (0, 1)
            else:
                values = _parse_values(raw_values, path, line)
                if kind is Kind.ENUM and not values:
                    raise MalformedRange("enum feature without values", path, line)
            try:
                legacy = Legacy((row["legacy"] or "none").strip().lower() or "none")
            except ValueError:
                raise FeatureModelError(f"unknown legacy status {row['legacy']!r}", path, line) from None
            legacy_value = None
            if legacy is Legacy.FIXED:
                legacy_value = _parse_scalar((row["legacy_value"] or "").strip(), path, line)
                if values and legacy_value not in values:
                    raise MalformedRange(f"legacy value {legacy_value!r} outside range", path, line)
            features[name] = FeatureDef(name, kind, values, legacy, legacy_value)
    model = FeatureModel(features, model_constants)
    if constants is not None:
        model.add_constants(load_constants(constants))
    return model


def load_constants(path: Union[str, Path]) -> dict[str, Number]:
    """Read ``constants.csv`` (``name,value``)."""
    path = str(path)
    out: dict[str, Number] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"name", "value"} <= set(reader.fieldnames or ()):
            raise FeatureModelError("constants file needs columns name,value", path, 1)
        for row in reader:
            name = (row["name"] or "").strip()
            if not name:
                continue
            if name in out:
                raise DuplicateFeature(f"duplicate constant {name!r}", path, reader.line_num)
            out[name] = _parse_scalar(row["value"] or "", path, reader.line_num)
    return out


def legacy_substitution(model: FeatureModel, variables: Iterable[str]) -> dict[str, Formula]:
    """Constant for every pseudo-variable of a legacy feature among *variables*."""
    out: dict[str, Formula] = {}
    for var in variables:
        parsed = parse_pseudo(var)
        if parsed is None:
            continue
        feature = model.features.get(parsed[0])
        if feature is None or feature.legacy is Legacy.NONE:
            continue
        _, value = parsed
        if feature.legacy is Legacy.RETIRED:
            out[var] = FALSE
        elif value is None:
            out[var] = TRUE
        else:
            out[var] = TRUE if var == feature.value_var(feature.legacy_value) else FALSE
    return out


def apply_legacy(f: Formula, model: FeatureModel, simplified: bool = True) -> Formula:
    """Replace pseudo-variables of legacy features by their constant, then simplify."""
    out = substitute_many(f, legacy_substitution(model, f.variables()))
    return simplify(out) if simplified else out
