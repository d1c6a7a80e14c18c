"""Validated settings of a command-line run"""
from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from maxconv.distributions import FAMILY_NAMES, ConvolutionKind


class Command(str, Enum):
    """Sub-commands of the ``maxconv`` tool"""

    dist = "dist"
    power = "power"
    scaling = "scaling"
    rho = "rho"
    verify = "verify"
    rate = "rate"


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"
    svg = "svg"


class Suite(str, Enum):
    """Verification suites run by ``maxconv verify``"""

    vonmises = "vonmises"
    sandwich = "sandwich"
    dagum_lipschitz = "dagum-lipschitz"
    tail_chain = "tail-chain"
    homomorphism = "homomorphism"
    interior = "interior"
    rescaling = "rescaling"


def parse_n_spec(text: str) -> List[int]:
    """Parse a list of powers

    Either ``start:stop:points`` (geometrically spaced integers, duplicates removed;
    ``1e2`` style numbers are accepted) or a comma-separated list of integers.

    Raises:
        ValueError: If the text cannot be parsed
    """
    from maxconv.ratelab.experiments import n_grid

    text = text.strip()
    if ':' in text:
        parts = text.split(':')
        if len(parts) != 3:
            raise ValueError(f'expected start:stop:points, received {text!r}')
        start, stop, points = (float(p) for p in parts)
        if points != int(points):
            raise ValueError(f'the number of points must be an integer, received {parts[2]!r}')
        return n_grid(start, stop, int(points))
    values = [float(v) for v in text.split(',') if v.strip()]
    if any(v != int(v) for v in values):
        raise ValueError(f'powers must be integers, received {text!r}')
    return sorted({int(v) for v in values})


class RunConfig(BaseModel):
    """Settings of one invocation, echoed into JSON reports"""

    command: Command
    family: str = Field('frechet', description="Name of the distribution family")
    alpha: float = Field(1.0, description="Tail index")
    kind: ConvolutionKind = Field(ConvolutionKind.boolean, description="Max-convolution calculus")
    n: List[int] = Field(default_factory=lambda: [1], description="Powers to evaluate")
    tol: float = Field(1e-8, gt=0, le=1e-2, description="Width of certified brackets")
    output: Optional[Path] = Field(None, description="Output file (default: standard output)")
    format: OutputFormat = Field(OutputFormat.csv, description="Output format")
    suite: Optional[Suite] = Field(None, description="Verification suite")
    aux: Optional[Path] = Field(None, description="JSON file with a tabulated auxiliary function")

    @field_validator('n')
    @classmethod
    def _check_n(cls, values: List[int]) -> List[int]:
        if not values:
            raise ValueError('at least one power is required')
        if min(values) < 1:
            raise ValueError('the n range must start at 1 or above')
        return sorted(values)

    @field_validator('family')
    @classmethod
    def _check_family(cls, name: str) -> str:
        if name.lower() not in FAMILY_NAMES:
            raise ValueError(f'unknown family {name!r}, choose from {", ".join(FAMILY_NAMES)}')
        return name.lower()

    @model_validator(mode='after')
    def _check_alpha(self) -> 'RunConfig':
        if self.kind == ConvolutionKind.boolean and not self.alpha > 0:
            raise ValueError('alpha must be positive for the boolean kind')
        return self
