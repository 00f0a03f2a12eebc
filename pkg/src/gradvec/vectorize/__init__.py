from gradvec.vectorize.adam import AdamState, adam_step
from gradvec.vectorize.initialize import init_path, select_regions
from gradvec.vectorize.losses import (
    LossConfig,
    LossReport,
    focused_set,
    sg_loss,
    sg_weight,
    total_loss,
    udf_weight,
    xing_loss,
)
from gradvec.vectorize.pipeline import (
    EpochRecord,
    IterationRecord,
    PipelineError,
    VectorizeConfig,
    Vectorizer,
    vectorize,
)
from gradvec.vectorize.schedule import EpochSchedule, expand_clamp, parse_schedule, schedule_clamp

__all__ = [
    "AdamState",
    "EpochRecord",
    "EpochSchedule",
    "IterationRecord",
    "LossConfig",
    "LossReport",
    "PipelineError",
    "VectorizeConfig",
    "Vectorizer",
    "adam_step",
    "expand_clamp",
    "focused_set",
    "init_path",
    "parse_schedule",
    "schedule_clamp",
    "select_regions",
    "sg_loss",
    "sg_weight",
    "total_loss",
    "udf_weight",
    "vectorize",
    "xing_loss",
]
