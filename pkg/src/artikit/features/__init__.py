from .mfcc import MfccConfig, extract_mfcc, mel_filterbank
from .resample import bilinear_resize, resample_ultrasound_frame
from .samples import (
    AUDIO_CONTEXT,
    ULTRA_CONTEXT,
    BalancePolicy,
    Sample,
    balance_training_set,
    build_sample,
)

__all__ = [
    "MfccConfig",
    "extract_mfcc",
    "mel_filterbank",
    "bilinear_resize",
    "resample_ultrasound_frame",
    "Sample",
    "BalancePolicy",
    "build_sample",
    "balance_training_set",
    "AUDIO_CONTEXT",
    "ULTRA_CONTEXT",
]
