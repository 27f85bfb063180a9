from pydantic import BaseModel, Field, model_validator
from typing import Optional, List, Dict, Literal


class BoundCheck(BaseModel):
    name: str  # "vector-lower" | "norm-upper" | "compare-lower" | "gram" | "drift-upper" | "cone" | ...
    instance: str
    lhs: float
    rhs: float
    margin: float  # log(rhs / lhs) style slack; negative means violated
    passed: bool


class BoundsReport(BaseModel):
    """Outcome of one verification suite over a periodic orbit."""

    suite: str
    word: str
    epsilon: float
    checks: List[BoundCheck] = []
    vacuous: bool = False
    note: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def worst(self) -> Optional[BoundCheck]:
        if not self.checks:
            return None
        return min(self.checks, key=lambda c: c.margin)


class ShadowingReport(BaseModel):
    word: str
    steps: int
    level: float
    epsilon: float
    decay_rate: float
    alpha: float
    delta: float
    lyapunov_norm_shadow: float
    lyapunov_norm_orbit: float
    growth_bound: float
    measured_c: float
    measured_c_relative: float
    growth_lhs: float
    growth_rhs: float
    growth_ratio: float
    growth_passed: bool
    form_strict: bool  # c * delta^alpha < 1
    form_scaled: bool  # c * l * delta^alpha <= l


class SpectrumRow(BaseModel):
    measure: str
    exponent: float
    multiplicity: int


class SpectrumTable(BaseModel):
    rows: List[SpectrumRow] = []
    top_sums: Dict[str, List[float]] = {}
    qr_exponents: Dict[str, List[float]] = {}  # short finite-time QR cross-check


class IndexGap(BaseModel):
    index: int
    values: Dict[str, float]
    low: float
    high: float
    low_measure: str
    high_measure: str


class SpectrumGapReport(BaseModel):
    """Top exponents of every exterior power over the supplied periodic measures."""

    indices: List[IndexGap]
    separating_index: Optional[int] = None
    spectra_equal: bool = False
    scope: str = "supplied periodic measures only"


class BlockSchedule(BaseModel):
    """Block lengths and certified times of an irregular point.

    Coordinates 0..prefix_hi copy the cylinder base point; each level then
    appends bridge, high block, bridge, low block, each bridge ``gap`` long.
    """

    prefix_lo: int
    prefix_hi: int
    gap: int
    high_word: List[int]
    low_word: List[int]
    high_lengths: List[int] = []
    low_lengths: List[int] = []
    high_times: List[int] = []
    low_times: List[int] = []
    margin: float
    pesin_level: Optional[float] = None
    closed_form_high: List[bool] = []
    closed_form_low: List[bool] = []

    @property
    def levels(self) -> int:
        return len(self.high_lengths)

    @model_validator(mode="after")
    def _check_shape(self) -> "BlockSchedule":
        counts = {len(self.high_lengths), len(self.low_lengths), len(self.high_times), len(self.low_times)}
        if len(counts) != 1:
            raise ValueError("schedule lists must share one length")
        flags = {len(self.closed_form_high), len(self.closed_form_low)}
        if len(flags) != 1 or flags - {0, self.levels}:
            raise ValueError("closed-form flags must be empty or one per level")
        times = [t for pair in zip(self.high_times, self.low_times) for t in pair]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("certified times must increase strictly")
        return self


class LevelRecord(BaseModel):
    level: int
    high_time: int
    high_average: float
    high_threshold: float
    low_time: int
    low_average: float
    low_threshold: float
    closed_form_high: Optional[bool] = None
    closed_form_low: Optional[bool] = None

    @property
    def high_slack(self) -> float:
        return self.high_average - self.high_threshold

    @property
    def low_slack(self) -> float:
        return self.low_threshold - self.low_average


class CylinderRecord(BaseModel):
    lo: int
    hi: int
    word: List[int]


class IrregularWitness(BaseModel):
    space_hash: str
    cocycle_hash: str
    exterior_index: int = 1
    high_word: List[int]
    low_word: List[int]
    high_exponent: float
    low_exponent: float
    tau: float
    cylinder: CylinderRecord
    schedule: BlockSchedule
    levels: List[LevelRecord]
    oscillation_gap: float
    seed: int = 0
    containment: List[str] = []
    scope: str = "spectrum gap evaluated over supplied periodic measures only"


class ScanRow(BaseModel):
    cylinder: str
    certified: bool
    high_time: Optional[int] = None
    low_time: Optional[int] = None
    error: Optional[str] = None


class ScanReport(BaseModel):
    window: int
    index: int
    rows: List[ScanRow] = []

    @property
    def certified(self) -> int:
        return sum(1 for r in self.rows if r.certified)

    @property
    def fraction(self) -> float:
        return self.certified / len(self.rows) if self.rows else 0.0


class VectorOscillation(BaseModel):
    basis_index: int
    averages: List[float]
    spread: float


class ExperimentConfig(BaseModel):
    """JSON experiment description; paths resolve relative to the config file."""

    space: Optional[str] = None
    space_path: Optional[str] = None
    cocycle: Optional[str] = None
    cocycle_path: Optional[str] = None
    measures: List[str] = Field(default_factory=list)
    cylinder: Optional[str] = None
    cylinder_lo: Optional[int] = None
    tau: float = 0.05
    epsilon: float = 0.01
    levels: int = 3
    margin: Optional[float] = None
    horizon: int = 10_000
    window: int = 3
    o_n_index: int = 10
    alpha: float = 1.0
    max_block_length: Optional[int] = None
    bounds_steps: int = 20
    bounds_samples: int = 8
    cone_steps: int = 12
    agreement_margins: List[int] = Field(default_factory=lambda: [-2, -1, 0, 2])
    outside_word: Optional[str] = None
    seed: int = 0
    report_path: Optional[str] = None
    witness_path: Optional[str] = None
    plot_path: Optional[str] = None
    base_dir: Optional[str] = None
    mode: Literal["auto", "direct", "lift"] = "auto"

    @model_validator(mode="after")
    def _check_parameters(self) -> "ExperimentConfig":
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0 < self.epsilon < self.tau / 2:
            raise ValueError("epsilon must lie in (0, tau/2)")
        if self.levels < 0:
            raise ValueError("levels must be >= 0")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.space is None and self.space_path is None:
            raise ValueError("config needs a space description or space_path")
        if self.cocycle is None and self.cocycle_path is None:
            raise ValueError("config needs a cocycle description or cocycle_path")
        return self

    @property
    def resolved_margin(self) -> float:
        return self.tau / 10 if self.margin is None else self.margin
