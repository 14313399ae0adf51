import json
import logging
import math
from dataclasses import fields, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.config import settings
from app.core.exceptions import InputParseError
from app.models.models import EDGES, FACES, NATURAL_KEYS, FacialAreas

logger = logging.getLogger(__name__)

CONVENTIONS = {
    "edge_order": list(EDGES),
    "area_order": list(FACES),
    "f_scaling": {"exterior": "2*area", "interior": "4*area"},
    "F": "f squared componentwise",
    "t": "6*volume",
    "s": "f_ABC+f_ABD+f_ACD+f_BCD",
    "r": "t/s",
}

INPUT_FORMS = ("vertices", "squared_distances", "areas_f", "naturals", "squared_areas")

Keyed = Union[Dict[str, float], List[float]]


class InvolutionOp(str, Enum):
    twin = "twin"
    fiedler = "fiedler"
    reciprocal = "reciprocal"
    orbit = "orbit"


class ConjectureName(str, Enum):
    nsimplex = "nsimplex"
    two_to_two = "two-to-two"
    involution_order = "involution-order"
    canmap = "canmap"


def _ordered(value: Keyed, labels: tuple, what: str) -> tuple:
    """Canonical-order tuple from either a keyed object or a plain array."""
    if isinstance(value, dict):
        keys = set(value)
        if keys != set(labels):
            missing = sorted(set(labels) - keys)
            extra = sorted(keys - set(labels))
            raise ValueError(f"{what} needs keys {list(labels)} (missing {missing}, unexpected {extra})")
        return tuple(float(value[label]) for label in labels)
    if len(value) != len(labels):
        raise ValueError(f"{what} needs {len(labels)} values, got {len(value)}")
    return tuple(float(entry) for entry in value)


class ABGDInput(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    alpha: float
    beta: float
    gamma: float
    delta: float
    varsigma: Optional[float] = None


class InputDocument(BaseModel):
    """One geometric input in any of the accepted forms."""
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    vertices: Optional[List[List[float]]] = None
    squared_distances: Optional[Keyed] = None
    areas_f: Optional[Keyed] = None
    naturals: Optional[Keyed] = None
    squared_areas: Optional[Keyed] = None
    abgd: Optional[ABGDInput] = None

    @field_validator("vertices")
    @classmethod
    def four_points(cls, value):
        if value is None:
            return value
        if len(value) != 4 or any(len(point) not in (2, 3) for point in value):
            raise ValueError("vertices needs four points with two or three coordinates")
        if len({len(point) for point in value}) != 1:
            raise ValueError("vertices must all have the same dimension")
        return [[float(c) for c in point] + [0.0] * (3 - len(point)) for point in value]

    @field_validator("squared_distances")
    @classmethod
    def six_distances(cls, value):
        return None if value is None else _ordered(value, EDGES, "squared_distances")

    @field_validator("areas_f", "squared_areas")
    @classmethod
    def seven_areas(cls, value, info):
        return None if value is None else _ordered(value, FACES, info.field_name)

    @field_validator("naturals")
    @classmethod
    def six_naturals(cls, value):
        return None if value is None else _ordered(value, NATURAL_KEYS, "naturals")

    @model_validator(mode="after")
    def exactly_one_form(self):
        present = [name for name in INPUT_FORMS if getattr(self, name) is not None]
        if self.abgd is not None:
            present.append("abgd")
        if len(present) != 1:
            raise ValueError(f"Exactly one input form is required, got {present or 'none'}")
        return self

    @property
    def form(self) -> str:
        return next(name for name in INPUT_FORMS + ("abgd",) if getattr(self, name) is not None)


class HealthResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    status: str
    schema_version: str = Field(alias="schema")


def parse_input(raw) -> InputDocument:
    """Validates a JSON text or an already decoded object; every failure becomes InputParseError."""
    try:
        if isinstance(raw, (str, bytes)):
            raw = json.loads(raw)
        return InputDocument.model_validate(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        logging.error(f"parse_input: malformed JSON ({exc})")
        raise InputParseError(f"Malformed JSON: {exc}") from exc
    except ValidationError as exc:
        reasons = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'document'}: {err['msg']}" for err in exc.errors())
        logging.error(f"parse_input: invalid document ({reasons})")
        raise InputParseError(f"Invalid input document: {reasons}") from exc


def _number(value: float):
    if not math.isfinite(value):
        return None
    return float(f"{value:.{settings.SIGNIFICANT_DIGITS}g}")


def to_jsonable(value):
    """Plain JSON values from the library's NamedTuples, dataclasses, enums and numbers."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, Fraction, np.floating)):
        return _number(float(value))
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, FacialAreas):
        return {label: to_jsonable(entry) for label, entry in zip(FACES, value)}
    if hasattr(value, "_asdict"):
        return {key: to_jsonable(entry) for key, entry in value._asdict().items()}
    if is_dataclass(value):
        return {field.name: to_jsonable(getattr(value, field.name)) for field in fields(value)}
    if isinstance(value, dict):
        return {_key(key): to_jsonable(entry) for key, entry in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted(to_jsonable(entry) for entry in value)
    if isinstance(value, (list, tuple)):
        return [to_jsonable(entry) for entry in value]
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def _key(key) -> str:
    if isinstance(key, tuple):
        return ",".join(str(part) for part in key)
    return str(key)


def document(command: str, body: dict) -> dict:
    return {
        "schema": settings.SCHEMA_VERSION,
        "conventions": CONVENTIONS,
        "command": command,
        **to_jsonable(body),
    }


def error_document(code: str, detail: str) -> dict:
    return {"schema": settings.SCHEMA_VERSION, "error": code, "detail": detail}


def dump_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
