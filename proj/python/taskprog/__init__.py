from taskprog._core import (
    FULL_CUP,
    PHASE_COUNT,
    VIEW_COUNT,
    ActionError,
    DigestMismatch,
    Embedder,
    InvalidArgument,
    IoError,
    NotFound,
    TrainingDiverged,
    crc64,
    gen_data,
    hex_digest,
    nearest_neighbor,
    particles_at_phase,
    render_phase,
    report,
    run_task,
    sample_triplets,
    train,
    triplet_loss,
)

__all__ = [
    "FULL_CUP",
    "PHASE_COUNT",
    "VIEW_COUNT",
    "ActionError",
    "DigestMismatch",
    "Embedder",
    "InvalidArgument",
    "IoError",
    "NotFound",
    "TrainingDiverged",
    "crc64",
    "gen_data",
    "hex_digest",
    "nearest_neighbor",
    "particles_at_phase",
    "render_phase",
    "report",
    "run_task",
    "sample_triplets",
    "train",
    "triplet_loss",
]
