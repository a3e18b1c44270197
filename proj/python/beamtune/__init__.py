"""Beam search over locally-normalized sequence models.

The C++ core does the work; this package re-exports its surface: table and
count-based toy models, greedy/beam/exhaustive decoding under length-aware
scoring modes (length normalization, the GNMT penalty, a per-word reward),
corpus BLEU and length reports, and a perceptron tuner that fits the word
reward so mean output length matches the references.
"""

from beamtune._core import (
    BleuScore,
    GammaGridRow,
    GradientStep,
    Hypothesis,
    LengthReport,
    Model,
    ScoringMode,
    TunerConfig,
    TunerEpoch,
    TunerState,
    __version__,
    beam_decode,
    corpus_bleu,
    decode_corpus,
    default_max_len,
    evaluate_gamma_grid,
    exhaustive_decode,
    greedy_decode,
    label_bias_model_text,
    length_report,
    load_model,
    save_model,
    table_model_from_text,
    train_model,
    tune_word_reward,
    word_reward_gradient_step,
)

__all__ = [
    "BleuScore",
    "GammaGridRow",
    "GradientStep",
    "Hypothesis",
    "LengthReport",
    "Model",
    "ScoringMode",
    "TunerConfig",
    "TunerEpoch",
    "TunerState",
    "__version__",
    "beam_decode",
    "corpus_bleu",
    "decode_corpus",
    "default_max_len",
    "evaluate_gamma_grid",
    "exhaustive_decode",
    "greedy_decode",
    "label_bias_model_text",
    "length_report",
    "load_model",
    "save_model",
    "table_model_from_text",
    "train_model",
    "tune_word_reward",
    "word_reward_gradient_step",
]
