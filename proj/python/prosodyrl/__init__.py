"""Prosody modification toolkit: WSOLA editing, emotion saliency, conversion agent."""

from prosodyrl._core import (
    EMOTIONS,
    SAMPLE_RATE,
    ProsodyError,
    apply_edit,
    bandit_check,
    convert,
    estimate_f0,
    eval_salience,
    gen_corpus,
    prior_kl_bruteforce,
    prior_kl_chain,
    read_wav,
    salience_predict,
    time_stretch,
    train_agent,
    train_salience,
    write_wav,
)

__all__ = [
    "EMOTIONS",
    "SAMPLE_RATE",
    "ProsodyError",
    "apply_edit",
    "bandit_check",
    "convert",
    "estimate_f0",
    "eval_salience",
    "gen_corpus",
    "prior_kl_bruteforce",
    "prior_kl_chain",
    "read_wav",
    "salience_predict",
    "time_stretch",
    "train_agent",
    "train_salience",
    "write_wav",
]
