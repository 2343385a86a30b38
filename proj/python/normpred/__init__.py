"""Concreteness and imageability prediction over (cross-lingual) word embeddings."""

import json as _json

from normpred._core import (
    AlignmentTransform,
    BilingualPairs,
    DataError,
    EmbeddingSpace,
    FfnModel,
    FfnParams,
    NormLexicon,
    Standardizer,
    SvrModel,
    SvrParams,
    TransferDictionary,
    apply_transform,
    approx_randomization_test,
    downsample,
    ffn_train,
    fit_standardizer,
    fit_standardizer_matrix,
    learn_procrustes,
    load_ffn_model,
    load_lexicon,
    load_pairs,
    load_svr_model,
    load_transfer_dictionary,
    load_transform,
    make_folds,
    make_lexicon,
    make_pairs,
    make_space,
    make_transfer_dictionary,
    parse_vec_file,
    pearson,
    predict_lexicon,
    run_coefficient_analysis,
    spearman,
    standardize,
    standardize_matrix,
    svr_train,
)
from normpred import _core as _c

__version__ = "0.1.0"


def run_in_language_cv(space, lexicon, **kwargs):
    """3-fold CV within one language. Returns (report dict, words, pooled predictions)."""
    report, words, preds = _c.run_in_language_cv_json(space, lexicon, **kwargs)
    return _json.loads(report), words, preds


def run_embedding_transfer(source_space, source_lexicon, target_space, **kwargs):
    """Cross-lingual transfer over aligned embeddings.

    Returns (report dict or None, predicted NormLexicon, trained model).
    """
    report, predicted, model = _c.run_embedding_transfer_json(
        source_space, source_lexicon, target_space, **kwargs
    )
    return (None if report is None else _json.loads(report)), predicted, model


def run_dictionary_transfer(source_lexicon, dictionary, **kwargs):
    """Dictionary transfer with collision averaging.

    Returns (report dict or None, predicted NormLexicon).
    """
    report, predicted = _c.run_dictionary_transfer_json(source_lexicon, dictionary, **kwargs)
    return (None if report is None else _json.loads(report)), predicted
