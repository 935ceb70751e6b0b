"""Othering-language lexicon features and document embeddings for hate speech classification.

The pipeline in brief: build a lexicon of "othering" constructions
(dependency pairs, retained content words, pronouns) from hateful documents
that talk about an in-group and an out-group in the same breath, append those
features to every document's token stream, embed the streams as paragraph
vectors, and classify the vectors. Subpackages are deliberately flat:

- corpus:     documents, tokenization, pronoun inventories, two-sidedness
- parse:      CoNLL-U ingestion, dependency/POS filters, heuristic fallback
- othering:   lexicon construction, stream augmentation, lexicon files
- embedding:  paragraph-vector training (distributed memory / bag of words)
- classify:   small MLP, logistic regression, Gaussian NB, bag-of-words
- evaluation: stratified CV, metrics, synthetic corpora, reports
- projection: 2-D PCA, nearest neighbours, distance bands, TSV export
- cli:        the `otherlex` command
"""

__version__ = "0.1.0"
