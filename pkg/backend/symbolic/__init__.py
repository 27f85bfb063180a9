from .shift_space import (
    ShiftSpace,
    Word,
    base_cycle,
    bridge,
    connect,
    legal_words,
    parse_word,
    primitivity_index,
    word_to_text,
)
from .points import (
    Cylinder,
    Run,
    ShiftPoint,
    SymbolStream,
    cylinder_from_word,
    periodic_point,
    periodic_splice,
    random_point,
    shadowing_point,
    shift_metric,
    splice,
)

__all__ = [
    "ShiftSpace",
    "Word",
    "base_cycle",
    "bridge",
    "connect",
    "legal_words",
    "parse_word",
    "primitivity_index",
    "word_to_text",
    "Cylinder",
    "Run",
    "ShiftPoint",
    "SymbolStream",
    "cylinder_from_word",
    "periodic_point",
    "periodic_splice",
    "random_point",
    "shadowing_point",
    "shift_metric",
    "splice",
]
