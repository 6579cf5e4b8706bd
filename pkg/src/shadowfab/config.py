"""JSON tool configuration. Key names carry their units; unknown keys are rejected."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from shadowfab.errors import ConfigurationError
from shadowfab.geomcore import BilayerResist
from shadowfab.junctionphys import MaterialParams
from shadowfab.screening import Thresholds

ENV_VAR = "SHADOWFAB_CONFIG"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MaterialConfig(_Strict):
    gap_delta_uev: float = Field(180.0, gt=0)
    temperature_k: float = Field(0.02, ge=0)
    resistance_area_product_ohm_um2: Optional[float] = Field(None, gt=0)

    def params(self) -> MaterialParams:
        return MaterialParams(self.gap_delta_uev, self.resistance_area_product_ohm_um2, self.temperature_k)


class ResistConfig(_Strict):
    top_thickness_um: float = Field(1.8, gt=0)
    undercut_um: float = Field(0.0, ge=0)

    def resist(self) -> BilayerResist:
        return BilayerResist(self.top_thickness_um, self.undercut_um)


class ThresholdConfig(_Strict):
    short_max_ohm: float = 300.0
    open_min_ohm: float = 50_000.0

    @field_validator("open_min_ohm")
    @classmethod
    def _ordered(cls, v, info):
        short = info.data.get("short_max_ohm")
        if short is not None and not short < v:
            raise ValueError("short_max_ohm must be below open_min_ohm")
        return v

    def thresholds(self) -> Thresholds:
        return Thresholds(self.short_max_ohm, self.open_min_ohm)


class EvaporationConfig(_Strict):
    theta_deg: float = Field(60.0, gt=0, lt=90)
    phi_deg: float = Field(15.0, ge=0, le=90)
    w_open_um: float = Field(0.5, gt=0)
    line_length_um: float = Field(20.0, gt=0)
    film_thickness_nm: tuple[float, float] = (40.0, 100.0)
    effective_top_thickness_um: tuple[Optional[float], Optional[float]] = (None, None)


class QubitConfig(_Strict):
    ec_ghz: Optional[float] = Field(None, gt=0)


class ToolConfig(_Strict):
    material: MaterialConfig = MaterialConfig()
    resist: ResistConfig = ResistConfig()
    thresholds: ThresholdConfig = ThresholdConfig()
    offset_ohm: Optional[float] = Field(None, ge=0)
    shadow_convention: Literal["paper", "complement"] = "paper"
    evaporation: EvaporationConfig = EvaporationConfig()
    qubit: QubitConfig = QubitConfig()


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> ToolConfig:
    try:
        return ToolConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid config: {_describe(exc)}") from None


def load_config(path: str | os.PathLike | None = None) -> ToolConfig:
    """Load ``path``, else the file named by ``$SHADOWFAB_CONFIG``, else defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return ToolConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    return parse_config(data)
