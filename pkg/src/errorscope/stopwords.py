"""Fixed English stopword list used by the word-importance aggregation.

Deliberately small: it removes function words that dominate additive
saliency sums without hiding domain vocabulary.  Projects can override it
via the ``stopwords`` key in the config thresholds block.
"""

DEFAULT_STOPWORDS = frozenset({
    "a", "an", "the", "and", "or", "but", "if", "then", "than", "so",
    "of", "to", "in", "on", "at", "by", "for", "with", "from", "as",
    "is", "are", "was", "were", "be", "been", "being", "am",
    "do", "does", "did", "doing", "have", "has", "had", "having",
    "will", "would", "can", "could", "shall", "should", "may", "might",
    "must", "it", "its", "this", "that", "these", "those", "there",
    "i", "me", "my", "we", "us", "our", "you", "your", "he", "him",
    "his", "she", "her", "they", "them", "their", "what", "which",
    "who", "whom", "how", "when", "where", "why", "not", "no", "nor",
    "up", "down", "out", "off", "over", "under", "again", "any", "all",
    "each", "some", "such", "own", "same", "s", "t", "d", "ll", "m",
    "re", "ve", "y", "please", "about",
})
