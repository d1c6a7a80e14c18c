"""Reports emitted by the verification suites and the rate experiments"""
from datetime import datetime, timezone
from io import StringIO
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, Field, computed_field, model_validator

from maxconv import config
from maxconv.distributions import ConvolutionKind
from maxconv.models import ReportModel

#: Columns of the CSV rendering of a rate report, in order
RATE_CSV_COLUMNS = ('n', 'a_n', 'a_n_prime', 'A_n', 'sup_lo', 'sup_hi', 'witness_x',
                    'bound_tail', 'bound_interior', 'bound_A', 'n_times_sup')


class SupBracket(BaseModel):
    """Certified enclosure of a Kolmogorov distance"""

    lo: float = Field(..., ge=0, description="Lower bound, attained at the witness point")
    hi: float = Field(..., description="Certified upper bound, including the tail closure")
    witness_x: Optional[float] = Field(None, description="Point at which |F - G| equals lo")
    x_lo: float = Field(..., description="Left end of the subdivided window")
    x_hi: float = Field(..., description="Right end of the subdivided window")
    tail_bound: float = Field(0., ge=0, description="Bound on |F - G| outside the window")
    cells_used: int = Field(0, ge=0, description="Number of cells evaluated")
    converged: bool = Field(True, description="Whether hi - lo reached the requested tolerance")

    @model_validator(mode='after')
    def _check_order(self) -> 'SupBracket':
        if self.lo > self.hi:
            raise ValueError(f'lower bound {self.lo} exceeds upper bound {self.hi}')
        return self

    @property
    def width(self) -> float:
        return self.hi - self.lo


class Violation(BaseModel):
    """A grid point where |k| exceeds the auxiliary function"""

    x: float
    k: float
    g: float
    ratio: Optional[float] = Field(..., description="|k| / g, null if g vanishes")


class VonMisesReport(ReportModel):
    """Outcome of checking |k_{alpha,F}| <= g on a grid"""

    label: str = Field(..., description="Name of the distribution that was checked")
    alpha: float = Field(..., description="Tail index")
    valid_from: float = Field(..., description="Threshold from which g is asserted to dominate")
    grid: List[float] = Field(..., description="Evaluation points")
    k: List[Optional[float]] = Field(..., description="k_{alpha,F} at each point, null at poles")
    g: List[float] = Field(..., description="Auxiliary function at each point")
    ratio_max: Optional[float] = Field(..., description="Largest |k| / g over the grid, null if unbounded")
    violations: List[Violation] = Field(default_factory=list, description="Points where |k| > g")
    diagnostics: List[str] = Field(default_factory=list, description="Points that could not be evaluated")
    aux_issues: List[str] = Field(default_factory=list, description="Shape problems found in the auxiliary function")

    @computed_field
    @property
    def passed(self) -> bool:
        return len(self.violations) == 0


class ScalingTriple(BaseModel):
    """Normalization constants a_n, a_n' and their ratio A_n"""

    n: int = Field(..., ge=1)
    a_n: float = Field(..., gt=0, description="F<-(exp(-1/n))")
    a_n_prime: float = Field(..., gt=0, description="F<-(n / (n + 1))")
    A_n: float = Field(..., gt=0, description="a_n / a_n_prime")


class RateFit(BaseModel):
    """Least-squares fit of log(sup) against log(n)"""

    slope: float
    intercept: float
    residual: float = Field(..., description="Largest absolute error of the fit in log space")
    used: int = Field(..., description="Number of rows in the fit")
    excluded: List[int] = Field(default_factory=list, description="Values of n dropped because sup <= 0 or the bracket did not converge")


class RateRow(BaseModel):
    """Certified distance to the limit law for one value of n"""

    n: int = Field(..., ge=1)
    a_n: float
    a_n_prime: float
    A_n: float
    sup_lo: float
    sup_hi: float
    witness_x: Optional[float] = None
    bound_tail: Optional[float] = Field(None, description="Boundary-region bound, null where undefined for this n")
    bound_interior: Optional[float] = Field(None, description="g(rho(a_n)) / (e (alpha - g(rho(a_n))))")
    bound_A: float = Field(..., description="alpha (1 / A_n - 1)")
    n_times_sup: float
    holds: bool = Field(..., description="Whether sup_hi lies below the combined bound")
    converged: bool = Field(True, description="Whether the certified bracket closed to within tol")


class RateReport(ReportModel):
    """Convergence measurements for one calculus over a list of n"""

    kind: ConvolutionKind
    label: str = Field(..., description="Distribution whose powers were measured")
    alpha: float
    tol: float
    rows: List[RateRow]
    slope: Optional[float] = Field(None, description="Fitted log-log slope (needs at least 4 rows)")
    intercept: Optional[float] = None
    residual: Optional[float] = None
    fit_excluded: List[int] = Field(default_factory=list, description="Values of n left out of the fit")
    onset_n0: Optional[int] = Field(None, description="Smallest n from which every later row holds")
    von_mises_passed: Optional[bool] = Field(None, description="Result of the von Mises check run before the experiment")
    assertions: List[str] = Field(default_factory=list, description="Failed unconditional assertions")
    config: Dict[str, Any] = Field(default_factory=dict, description="Settings that produced the report")
    created: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @model_validator(mode='after')
    def _check_rows(self) -> 'RateReport':
        ns = [r.n for r in self.rows]
        if ns != sorted(ns):
            raise ValueError('rows must be sorted by n')
        if self.slope is not None and len(self.rows) < 4:
            raise ValueError('a slope requires at least 4 rows')
        return self

    @computed_field
    @property
    def unconverged(self) -> List[int]:
        """Values of n whose bracket did not close; their rows never count as holding"""
        return [r.n for r in self.rows if not r.converged]

    @computed_field
    @property
    def asserted_from(self) -> Optional[int]:
        """First n of the window in which acceptance suites assert the bounds: max(onset, ONSET_FLOOR)"""
        if self.onset_n0 is None:
            return None
        return max(self.onset_n0, config.ONSET_FLOOR)

    @computed_field
    @property
    def passed(self) -> bool:
        return self.onset_n0 is not None and not self.assertions and not self.unconverged

    def to_frame(self) -> pd.DataFrame:
        """Rows as a data frame with the CSV columns"""
        return pd.DataFrame([r.model_dump() for r in self.rows], columns=list(RATE_CSV_COLUMNS))

    def to_csv(self, path: Optional[Union[str, Path]] = None) -> str:
        """Render the rows as CSV

        Args:
            path: If provided, also write the table to this file
        Returns:
            (str) The CSV text
        """
        buffer = StringIO()
        self.to_frame().to_csv(buffer, index=False)
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


class InteriorRow(BaseModel):
    """Distance over (0, 1) at scale a_n' against the interior bound"""

    n: int = Field(..., ge=1)
    a_n: float
    a_n_prime: float
    rho_a_n: Optional[float] = Field(None, description="rho(a_n), null if a_n is below the range of rho<-")
    g_rho: Optional[float] = None
    sup_lo: float
    sup_hi: float
    witness_x: Optional[float] = None
    bound: Optional[float] = None
    holds: bool


class InteriorReport(ReportModel):
    """Interior-bound measurements over a list of n"""

    label: str
    alpha: float
    tol: float
    rows: List[InteriorRow]
    onset_n0: Optional[int] = None

    @computed_field
    @property
    def passed(self) -> bool:
        return self.onset_n0 is not None


class CheckPoint(BaseModel):
    """One evaluated instance of an inequality lhs <= rhs"""

    x: float
    lhs: float
    rhs: float
    slack: float = Field(..., description="rhs - lhs")
    n: Optional[int] = None


class CheckReport(ReportModel):
    """Verdict of a pointwise or sup-norm inequality check"""

    suite: str
    passed: bool
    checked: int = Field(0, description="Number of points evaluated")
    skipped: int = Field(0, description="Number of inadmissible points")
    worst_slack: Optional[float] = Field(None, description="Smallest rhs - lhs over the checked points")
    measured: Optional[float] = Field(None, description="Measured quantity for sup-norm checks")
    bound: Optional[float] = Field(None, description="Bound the measured quantity is compared with")
    failures: List[CheckPoint] = Field(default_factory=list)
    parameters: Dict[str, Any] = Field(default_factory=dict)
