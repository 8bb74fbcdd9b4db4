"""Python bindings for the pageseg C++ core."""

import json

from ._pageseg import (
    ComponentStats,
    ConfigError,
    Error,
    PCAModel,
    ShapeError,
    UndefinedStatisticError,
    binarize,
    component_stats,
    confusion,
    f_measure,
    fit_pca,
    otsu_threshold,
    run_command,
    segment_page,
    similarity_s1,
    similarity_s2,
)

from ._pageseg import _generate_page

MAIN_TEXT = 1
SIDE_TEXT = 2


def generate_page(seed=0, **options):
    """Synthetic page as (image float32 HxW in [0,1], labels uint8 HxW).

    Options use the synth config keys, e.g. width, height, main_glyph_height,
    layout={"placement": "left", ...}.
    """
    return _generate_page(seed, json.dumps(options))


__all__ = [
    "ComponentStats",
    "ConfigError",
    "Error",
    "PCAModel",
    "ShapeError",
    "UndefinedStatisticError",
    "binarize",
    "component_stats",
    "confusion",
    "f_measure",
    "fit_pca",
    "generate_page",
    "otsu_threshold",
    "run_command",
    "segment_page",
    "similarity_s1",
    "similarity_s2",
    "MAIN_TEXT",
    "SIDE_TEXT",
]
