from .schemas import (
    BlockSchedule,
    BoundCheck,
    BoundsReport,
    CylinderRecord,
    ExperimentConfig,
    IndexGap,
    IrregularWitness,
    LevelRecord,
    ScanReport,
    ScanRow,
    ShadowingReport,
    SpectrumGapReport,
    SpectrumRow,
    SpectrumTable,
    VectorOscillation,
)

__all__ = [
    "BlockSchedule",
    "BoundCheck",
    "BoundsReport",
    "CylinderRecord",
    "ExperimentConfig",
    "IndexGap",
    "IrregularWitness",
    "LevelRecord",
    "ScanReport",
    "ScanRow",
    "ShadowingReport",
    "SpectrumGapReport",
    "SpectrumRow",
    "SpectrumTable",
    "VectorOscillation",
]
