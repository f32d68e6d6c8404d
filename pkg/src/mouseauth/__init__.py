"""Mouse-dynamics user authentication toolkit.

Submodules:
  ingest       CSV session parsing under configurable column schemas
  kinematics   coordinate -> speed sequence conversion
  sufficiency  KDE/KL proper-data-volume estimation
  mau          ApEn-driven MAU length selection and segmentation
  model        conv/residual/recurrent authentication classifier (numpy)
  evaluation   F1/AUC/EER/DSR metrics and the blind-attack protocol
  synth        seeded synthetic velocity generators
  cli          command-line pipeline
"""

from . import errors, evaluation, ingest, kinematics, mau, model, sufficiency, synth

__all__ = [
    "errors",
    "evaluation",
    "ingest",
    "kinematics",
    "mau",
    "model",
    "sufficiency",
    "synth",
]

__version__ = "0.1.0"
